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

// Shared helpers for the test binaries: independent brute-force metric
// oracles, random data builders, and a finite-difference gradient checker.
// Everything here is deliberately written with plain loops, independent of
// the library's own kernels, so it can serve as an oracle.

#ifndef HYPERDEF_TESTS_TEST_UTIL_HPP_
#define HYPERDEF_TESTS_TEST_UTIL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "hyperdef/eval.hpp"
#include "hyperdef/matrix.hpp"
#include "hyperdef/rng.hpp"

namespace testutil {

// ------------------------------------------------------------- matrices ----

inline hyperdef::Matrix random_matrix(int rows, int cols, hyperdef::Rng& rng, double lo = -1.0,
                                      double hi = 1.0) {
  hyperdef::Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(lo, hi);
  return m;
}

inline double max_abs_diff(const hyperdef::Matrix& a, const hyperdef::Matrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  }
  return worst;
}

// ------------------------------------------------- brute-force metrics -----

struct OracleCounts {
  long long tp = 0, fp = 0, fn = 0, tn = 0;
};

inline std::vector<hyperdef::ScoredPair> oracle_ranked(std::vector<hyperdef::ScoredPair> pairs) {
  std::sort(pairs.begin(), pairs.end(),
            [](const hyperdef::ScoredPair& a, const hyperdef::ScoredPair& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.id < b.id;
            });
  return pairs;
}

inline OracleCounts oracle_counts(const std::vector<hyperdef::ScoredPair>& pairs,
                                  double threshold) {
  OracleCounts c;
  for (const hyperdef::ScoredPair& p : pairs) {
    const bool pred = p.score >= threshold;
    if (pred && p.gold == 1) ++c.tp;
    if (pred && p.gold == 0) ++c.fp;
    if (!pred && p.gold == 1) ++c.fn;
    if (!pred && p.gold == 0) ++c.tn;
  }
  return c;
}

inline double oracle_precision(const OracleCounts& c) {
  return c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
}

inline double oracle_recall(const OracleCounts& c) {
  return c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
}

inline double oracle_f1(const OracleCounts& c) {
  const double p = oracle_precision(c);
  const double r = oracle_recall(c);
  return p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
}

// Non-interpolated AP over the full ranked list.
inline double oracle_ap(const std::vector<hyperdef::ScoredPair>& pairs) {
  const std::vector<hyperdef::ScoredPair> ranked = oracle_ranked(pairs);
  long long seen = 0;
  long long gold = 0;
  double sum = 0.0;
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    if (ranked[r].gold == 1) {
      ++seen;
      sum += static_cast<double>(seen) / static_cast<double>(r + 1);
    }
  }
  for (const hyperdef::ScoredPair& p : pairs) gold += p.gold;
  return sum / static_cast<double>(gold);
}

// AP over the top-k ranks only, normalized by min(k, total gold positives).
inline double oracle_ap_at_k(const std::vector<hyperdef::ScoredPair>& pairs, int k) {
  const std::vector<hyperdef::ScoredPair> ranked = oracle_ranked(pairs);
  long long gold = 0;
  for (const hyperdef::ScoredPair& p : pairs) gold += p.gold;
  long long seen = 0;
  double sum = 0.0;
  const std::size_t cut = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
  for (std::size_t r = 0; r < cut; ++r) {
    if (ranked[r].gold == 1) {
      ++seen;
      sum += static_cast<double>(seen) / static_cast<double>(r + 1);
    }
  }
  const long long denom = std::min<long long>(k, gold);
  return denom > 0 ? sum / static_cast<double>(denom) : 0.0;
}

// Random score list with at least one gold positive and one gold negative.
inline std::vector<hyperdef::ScoredPair> random_score_list(hyperdef::Rng& rng, int max_len = 200) {
  const int n = 2 + static_cast<int>(rng.index(static_cast<std::size_t>(max_len - 1)));
  std::vector<hyperdef::ScoredPair> pairs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double score = rng.uniform(0.0, 1.0);
    if (rng.index(4) == 0) score = std::round(score * 8.0) / 8.0;  // force score ties
    pairs[static_cast<std::size_t>(i)] =
        hyperdef::ScoredPair{i, score, rng.index(3) == 0 ? 1 : 0};
  }
  pairs[0].gold = 1;
  pairs[1].gold = 0;
  return pairs;
}

// ------------------------------------------- finite-difference checking ----

struct GradCheckStats {
  double worst_rel = 0.0;      // over entries where the relative test applies
  double worst_small = 0.0;    // worst |a - n| over near-zero entries
  long strict_entries = 0;     // entries checked with the relative criterion
  long small_entries = 0;      // entries below the dead-zone cutoff
  std::string worst_where;
};

// Entries where both gradients are below this are checked with an absolute
// tolerance instead: central differences at loss magnitudes of O(100) carry
// roundoff noise around 1e-9, which swamps a relative comparison of values
// that are genuinely zero (saturated tanh, crushed softmax tails). The
// absolute check still catches a real-magnitude analytic error at such
// entries; the relative criterion covers everything that matters.
constexpr double kGradDeadZone = 1e-6;

// Central finite differences over every entry of `param`, against the
// analytic gradient `grad`. `loss` must recompute the full forward pass from
// current parameter values.
inline void check_gradient(hyperdef::Matrix& param, const hyperdef::Matrix& grad,
                           const std::function<double()>& loss, const std::string& where,
                           GradCheckStats* stats, double h = 1e-4) {
  for (int r = 0; r < param.rows(); ++r) {
    for (int c = 0; c < param.cols(); ++c) {
      const double saved = param(r, c);
      param(r, c) = saved + h;
      const double up = loss();
      param(r, c) = saved - h;
      const double down = loss();
      param(r, c) = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = grad(r, c);
      const double diff = std::abs(analytic - numeric);
      if (std::max(std::abs(analytic), std::abs(numeric)) < kGradDeadZone) {
        ++stats->small_entries;
        stats->worst_small = std::max(stats->worst_small, diff);
        continue;
      }
      ++stats->strict_entries;
      const double rel = diff / (std::abs(analytic) + std::abs(numeric) + 1e-8);
      if (rel > stats->worst_rel) {
        stats->worst_rel = rel;
        stats->worst_where = where + "(" + std::to_string(r) + "," + std::to_string(c) +
                             "): analytic=" + std::to_string(analytic) +
                             " numeric=" + std::to_string(numeric);
      }
    }
  }
}

}  // namespace testutil

#endif  // HYPERDEF_TESTS_TEST_UTIL_HPP_
