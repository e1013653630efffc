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

#include "hyperdef/embedding.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hyperdef/rng.hpp"

namespace hyperdef {

EmbeddingTable::EmbeddingTable(int dim) : dim_(dim) {
  if (dim < 1) {
    throw ParseError("embedding table: dimension must be positive, got " + std::to_string(dim));
  }
}

void EmbeddingTable::add(const std::string& word, const std::vector<double>& vec) {
  if (static_cast<int>(vec.size()) != dim_) {
    throw ParseError("embedding table: vector for '" + word + "' has " +
                     std::to_string(vec.size()) + " values, expected " + std::to_string(dim_));
  }
  if (index_.count(word)) {
    ++duplicates_;
    return;
  }
  index_.emplace(word, static_cast<int>(words_.size()));
  words_.push_back(word);
  storage_.insert(storage_.end(), vec.begin(), vec.end());
}

std::vector<double> EmbeddingTable::lookup(const std::string& token) const {
  auto it = index_.find(token);
  if (it != index_.end()) {
    const double* r = row(it->second);
    return std::vector<double>(r, r + dim_);
  }
  Rng rng(fnv1a64(token));
  std::vector<double> v(static_cast<std::size_t>(dim_));
  for (double& x : v) x = rng.uniform(-0.05, 0.05);
  return v;
}

namespace {

bool parse_double(const std::string& field, double& out) {
  // strtod instead of std::stod: stod throws on subnormal magnitudes (ERANGE
  // underflow), which the writer can legitimately produce. Only a failed
  // conversion, trailing junk, or a true overflow is an error here.
  if (field.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) return false;
  if (errno == ERANGE && (out == HUGE_VAL || out == -HUGE_VAL)) return false;
  return true;
}

}  // namespace

EmbeddingTable EmbeddingTable::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("embedding file: cannot open " + path);

  std::string line;
  int line_no = 0;
  std::vector<std::pair<std::string, std::vector<double>>> entries;
  int dim = -1;
  bool first_content_line = true;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::vector<std::string> fields;
    std::string f;
    while (ss >> f) fields.push_back(f);
    if (fields.empty()) continue;

    if (first_content_line && fields.size() == 2) {
      // Possible "V d" header: two integer fields.
      double v0 = 0, v1 = 0;
      const bool num0 = parse_double(fields[0], v0);
      const bool num1 = parse_double(fields[1], v1);
      if (num0 && num1 && v0 == static_cast<long long>(v0) && v1 == static_cast<long long>(v1) &&
          v1 >= 1) {
        dim = static_cast<int>(v1);
        first_content_line = false;
        continue;
      }
    }
    first_content_line = false;

    if (fields.size() < 2) {
      throw ParseError("embedding file: line " + std::to_string(line_no) +
                       ": expected 'word v1 ... vd'");
    }
    const std::string& word = fields[0];
    std::vector<double> vec;
    vec.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      double x = 0;
      if (!parse_double(fields[i], x)) {
        throw ParseError("embedding file: line " + std::to_string(line_no) +
                         ": non-numeric field '" + fields[i] + "'");
      }
      vec.push_back(x);
    }
    if (dim < 0) dim = static_cast<int>(vec.size());
    if (static_cast<int>(vec.size()) != dim) {
      throw ParseError("embedding file: line " + std::to_string(line_no) + ": " +
                       std::to_string(vec.size()) + " values, expected " + std::to_string(dim));
    }
    entries.emplace_back(word, std::move(vec));
  }
  if (entries.empty()) throw ParseError("embedding file: no vectors in " + path);

  EmbeddingTable table(dim);
  int duplicate_warnings = 0;
  for (auto& [word, vec] : entries) {
    const bool dup = table.contains(word);
    table.add(word, vec);
    if (dup && duplicate_warnings < 5) {
      std::fprintf(stderr, "warning: duplicate embedding for '%s', first occurrence kept\n",
                   word.c_str());
      ++duplicate_warnings;
    }
  }
  if (table.duplicates_ignored() > duplicate_warnings) {
    std::fprintf(stderr, "warning: %d duplicate embeddings total, first occurrences kept\n",
                 table.duplicates_ignored());
  }
  return table;
}

void EmbeddingTable::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ParseError("embedding file: cannot write " + path);
  out << words_.size() << " " << dim_ << "\n";
  char buf[40];
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out << words_[i];
    const double* r = row(static_cast<int>(i));
    for (int j = 0; j < dim_; ++j) {
      // %.17g round-trips doubles exactly through text.
      std::snprintf(buf, sizeof buf, "%.17g", r[j]);
      out << ' ' << buf;
    }
    out << '\n';
  }
  if (!out) throw ParseError("embedding file: write failed for " + path);
}

std::uint64_t EmbeddingTable::fingerprint() const {
  std::uint64_t h = fnv1a64_bytes(&dim_, sizeof dim_);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    h = fnv1a64(words_[i], h);
    h = fnv1a64_bytes(row(static_cast<int>(i)), sizeof(double) * static_cast<std::size_t>(dim_),
                      h);
  }
  return h;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const unsigned char u = static_cast<unsigned char>(ch);
    if (std::isspace(u) || ch == '_') {
      if (!cur.empty()) {
        tokens.push_back(cur);
        cur.clear();
      }
    } else {
      cur.push_back(static_cast<char>(std::tolower(u)));
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

}  // namespace hyperdef
