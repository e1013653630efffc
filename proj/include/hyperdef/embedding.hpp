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
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace hyperdef {

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Frozen word-vector table. Out-of-vocabulary tokens get a deterministic
// hash-seeded vector, so the same unknown token always maps to the same
// embedding across processes and runs.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  bool contains(const std::string& word) const { return index_.count(word) > 0; }

  // First occurrence of a word wins; a repeat is counted, not overwritten.
  void add(const std::string& word, const std::vector<double>& vec);
  int duplicates_ignored() const { return duplicates_; }

  // In-vocabulary lookup, or the hash-seeded OOV vector (uniform entries in
  // [-0.05, 0.05] seeded by the token string).
  std::vector<double> lookup(const std::string& token) const;

  const std::vector<std::string>& words() const { return words_; }
  const double* row(int i) const { return &storage_[static_cast<std::size_t>(i) * dim_]; }

  // Text format: optional header "V d", then lines "word v1 ... vd". Parse
  // problems raise ParseError naming the offending line.
  static EmbeddingTable load_file(const std::string& path);
  void save_file(const std::string& path) const;

  // Content hash over dimension, words, and exact value bytes, in table
  // order. Stored in model files so an embedding mismatch is detectable.
  std::uint64_t fingerprint() const;

 private:
  int dim_;
  int duplicates_ = 0;
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> words_;
  std::vector<double> storage_;
};

// Lowercases and splits on whitespace and underscores.
std::vector<std::string> tokenize(const std::string& text);

}  // namespace hyperdef
