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

#include <string>
#include <vector>

#include "hyperdef/data.hpp"

namespace hyperdef {

// One scored, labeled pair. Ranking order is score descending with ties
// broken by ascending id, everywhere, so results are deterministic.
struct ScoredPair {
  long long id = 0;
  double score = 0.0;
  int gold = 0;
};

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  PrecisionRecall prf;
  double ap = 0.0;
  double ap_at_k = 0.0;
  int k = 100;
  double threshold = 0.5;
  long long total = 0;
  long long gold_positives = 0;
  long long predicted_positives = 0;
};

// Predict 1 iff score >= threshold; zero denominators yield 0 by convention.
PrecisionRecall precision_recall_f1(const std::vector<ScoredPair>& pairs, double threshold);

// Non-interpolated average precision: mean over gold-positive ranks r of
// (positives seen through r) / r. Requires at least one gold positive.
double average_precision(const std::vector<ScoredPair>& pairs);

// Average precision over the top-k ranks only, normalized by
// min(k, total gold positives).
double ap_at_k(const std::vector<ScoredPair>& pairs, int k);

// F1 sweep over the 99 dev-score quantiles plus 0.5; returns the lowest
// threshold achieving the best F1. Including 0.5 guarantees the selected
// threshold never scores below the plain 0.5 cut.
double select_threshold(const std::vector<ScoredPair>& dev);

EvalReport evaluate(const std::vector<ScoredPair>& pairs, double threshold, int k);

// Prediction file: id \t score \t gold (TSV), consumable standalone.
void save_predictions(const std::vector<ScoredPair>& pairs, const std::string& path);
std::vector<ScoredPair> load_predictions(const std::string& path);

// Anything that can score a term pair with explicit definitions; the model
// module provides the real implementation.
class PairScorer {
 public:
  virtual ~PairScorer() = default;
  virtual double score(const std::string& x, const std::vector<std::string>& dx,
                       const std::string& y, const std::vector<std::string>& dy) const = 0;
};

// Score using only each term's first (most frequent) sense definition.
double infer_topdef(const TermEntry& x, const TermEntry& y, const PairScorer& scorer);

// Max score over the sense cross product, each side truncated to the first
// `cap` senses.
double infer_alldef(const TermEntry& x, const TermEntry& y, const PairScorer& scorer, int cap);

}  // namespace hyperdef
