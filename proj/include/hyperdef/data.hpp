/*
 * Copyright 2026 The HyperDef Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hyperdef/embedding.hpp"

namespace hyperdef {

enum class Relation : std::uint8_t { kHypernym, kHyponym, kSynonym, kAntonym, kOther };

Relation parse_relation(const std::string& name);
const char* relation_name(Relation r);

// One row of a preprocessed relation export. Sense ids are 1-based; a missing
// gloss falls back to the term's own surface string downstream.
struct RelationRecord {
  std::string term1;
  std::string term2;
  Relation relation = Relation::kOther;
  int sense1 = 1;
  int sense2 = 1;
  std::string gloss1;
  std::string gloss2;
};

// A labeled pair (x, d_x; y, d_y; 1/0). Sense ids are kept in memory for
// deduplication keys but are not part of the instance file format.
struct Instance {
  std::string x;
  std::string y;
  std::vector<std::string> dx;  // definition tokens, nonempty
  std::vector<std::string> dy;
  int sense_x = 1;
  int sense_y = 1;
  int label = 0;
  long long id = 0;
};

// A term with its sense-level definitions, most frequent sense first.
struct TermEntry {
  std::string term;
  std::vector<std::vector<std::string>> senses;  // token lists, nonempty
};

struct BuildStats {
  long long records = 0;
  long long skipped = 0;  // records with an empty term
  long long duplicates = 0;
  long long positives = 0;
  long long negatives_before = 0;  // pre-downsampling
  long long negatives_after = 0;
  double ratio() const {
    return positives > 0 ? static_cast<double>(negatives_after) / static_cast<double>(positives)
                         : 0.0;
  }
};

// The dataset recipe: positives from hypernym records and term-swapped
// hyponym records; negatives from synonym/antonym/other records plus the
// reverse of every positive; dedup on (x, y, sense ids); negatives
// downsampled to ratio_cap * positives when they exceed it.
std::vector<Instance> build_instances(const std::vector<RelationRecord>& records,
                                      double ratio_cap, std::uint64_t seed, BuildStats* stats);

struct SplitSpec {
  enum class Mode { kRandom, kLexical };
  Mode mode = Mode::kRandom;
  double train_fraction = 0.8;
  double dev_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 1;
};

struct SplitResult {
  std::vector<Instance> train;
  std::vector<Instance> dev;
  std::vector<Instance> test;
  long long dropped = 0;  // lexical-mode instances whose terms straddle parts
};

// Random mode: seeded shuffle, then partition by fractions. Lexical mode:
// partition the term vocabulary first; an instance lands in a part only if
// both its terms do, and straddlers are dropped.
SplitResult split_instances(const std::vector<Instance>& instances, const SplitSpec& spec);

struct SynthConfig {
  int taxonomy_size = 950;  // concept terms (tree nodes)
  int filler_count = 150;   // definition-filler vocabulary
  int dim = 32;
  double neg_ratio = 8.0;   // raw random negatives generated per positive
  double second_sense_fraction = 0.2;
  std::uint64_t seed = 1;
};

struct SynthData {
  std::vector<RelationRecord> records;
  std::vector<TermEntry> lexicon;
  EmbeddingTable embeddings;
};

// Seeded random taxonomy: a parent tree over concept terms whose definitions
// are filler templates containing the parent's token, so that hypernymy is
// decidable from the definition but not from the frozen random embeddings of
// the terms alone. Negatives: sibling pairs and random non-ancestor pairs
// (reversed positives are added by build_instances).
SynthData generate_synthetic(const SynthConfig& config);

// File formats (UTF-8 TSV, no headers). Relation export:
//   term1 \t term2 \t relation \t sense1 \t sense2 \t gloss1 \t gloss2
std::vector<RelationRecord> load_relations(const std::string& path);
void save_relations(const std::vector<RelationRecord>& records, const std::string& path);

// Instance file: x \t d_x \t y \t d_y \t label. Ids are assigned by line.
std::vector<Instance> load_instances(const std::string& path);
void save_instances(const std::vector<Instance>& instances, const std::string& path);

// Lexicon file: term \t gloss, one line per sense, in sense order.
std::vector<TermEntry> load_lexicon(const std::string& path);
void save_lexicon(const std::vector<TermEntry>& lexicon, const std::string& path);

}  // namespace hyperdef
