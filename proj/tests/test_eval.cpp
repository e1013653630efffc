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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "hyperdef/data.hpp"
#include "hyperdef/eval.hpp"
#include "hyperdef/rng.hpp"
#include "test_util.hpp"

using hyperdef::EvalReport;
using hyperdef::PrecisionRecall;
using hyperdef::Rng;
using hyperdef::ScoredPair;
using hyperdef::TermEntry;

namespace {

ScoredPair pair_of(long long id, double score, int gold) {
  ScoredPair p;
  p.id = id;
  p.score = score;
  p.gold = gold;
  return p;
}

// Builds a list realizing exact confusion counts at threshold 0.5.
std::vector<ScoredPair> confusion(long long tp, long long fp, long long fn, long long tn) {
  std::vector<ScoredPair> pairs;
  pairs.reserve(static_cast<std::size_t>(tp + fp + fn + tn));
  long long id = 0;
  for (long long i = 0; i < tp; ++i) pairs.push_back(pair_of(id++, 1.0, 1));
  for (long long i = 0; i < fp; ++i) pairs.push_back(pair_of(id++, 1.0, 0));
  for (long long i = 0; i < fn; ++i) pairs.push_back(pair_of(id++, 0.0, 1));
  for (long long i = 0; i < tn; ++i) pairs.push_back(pair_of(id++, 0.0, 0));
  return pairs;
}

// Deterministic fake scorer: a hash of the joined arguments scaled into
// [0, 1), plus a call counter for cross-product accounting.
struct FakeScorer : hyperdef::PairScorer {
  mutable long long calls = 0;
  double score(const std::string& x, const std::vector<std::string>& dx, const std::string& y,
               const std::vector<std::string>& dy) const override {
    ++calls;
    std::string key = x + "|" + y;
    for (const std::string& t : dx) key += "/" + t;
    key += "#";
    for (const std::string& t : dy) key += "/" + t;
    return static_cast<double>(hyperdef::fnv1a64(key) % 1000000ULL) / 1000000.0;
  }
};

}  // namespace

// ---------------------------------------------------- precision / recall ----

TEST_CASE("a large confusion matrix reproduces exact hand-computed scores") {
  // 30619 true positives, 15081 false positives, 2881 false negatives give
  // precision 0.67 and recall 0.914 exactly, hence F1 near 0.773.
  const std::vector<ScoredPair> pairs = confusion(30619, 15081, 2881, 10000);
  const PrecisionRecall prf = hyperdef::precision_recall_f1(pairs, 0.5);
  CHECK(prf.precision == doctest::Approx(0.67).epsilon(1e-12));
  CHECK(prf.recall == doctest::Approx(0.914).epsilon(1e-12));
  CHECK(std::abs(prf.f1 - 0.773) < 5e-4);
}

TEST_CASE("precision/recall edge cases follow the zero-denominator rule") {
  const std::vector<ScoredPair> perfect = confusion(10, 0, 0, 10);
  const PrecisionRecall all = hyperdef::precision_recall_f1(perfect, 0.5);
  CHECK(all.precision == 1.0);
  CHECK(all.recall == 1.0);
  CHECK(all.f1 == 1.0);

  // Nothing predicted positive: precision and F1 are 0 by convention.
  const std::vector<ScoredPair> silent = confusion(0, 0, 5, 5);
  const PrecisionRecall none = hyperdef::precision_recall_f1(silent, 0.5);
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);

  // No gold positives at all: recall denominator is empty too.
  const std::vector<ScoredPair> no_gold = confusion(0, 3, 0, 7);
  const PrecisionRecall ng = hyperdef::precision_recall_f1(no_gold, 0.5);
  CHECK(ng.precision == 0.0);
  CHECK(ng.recall == 0.0);

  // Prediction is score >= threshold, border included.
  const std::vector<ScoredPair> border{pair_of(0, 0.5, 1), pair_of(1, 0.4999999, 0)};
  const PrecisionRecall b = hyperdef::precision_recall_f1(border, 0.5);
  CHECK(b.precision == 1.0);
  CHECK(b.recall == 1.0);

  CHECK_THROWS_AS(hyperdef::precision_recall_f1({}, 0.5), std::invalid_argument);
}

// ------------------------------------------------------ average precision ----

TEST_CASE("average precision: pinned rankings") {
  // Perfect ranking: every positive ahead of every negative.
  const std::vector<ScoredPair> perfect{pair_of(0, 0.9, 1), pair_of(1, 0.8, 1),
                                        pair_of(2, 0.3, 0), pair_of(3, 0.2, 0)};
  CHECK(hyperdef::average_precision(perfect) == 1.0);

  // Ranked golds 1,0,1: AP = (1/1 + 2/3) / 2 = 5/6.
  const std::vector<ScoredPair> mixed{pair_of(0, 3.0, 1), pair_of(1, 2.0, 0),
                                      pair_of(2, 1.0, 1)};
  CHECK(std::abs(hyperdef::average_precision(mixed) - 5.0 / 6.0) < 1e-12);

  // Worst ranking of one positive among three.
  const std::vector<ScoredPair> tail{pair_of(0, 3.0, 0), pair_of(1, 2.0, 0),
                                     pair_of(2, 1.0, 1)};
  CHECK(std::abs(hyperdef::average_precision(tail) - 1.0 / 3.0) < 1e-12);

  CHECK_THROWS_AS(hyperdef::average_precision(confusion(0, 3, 0, 3)), std::invalid_argument);
  CHECK_THROWS_AS(hyperdef::average_precision({}), std::invalid_argument);
}

TEST_CASE("average precision: ranking by score only, ids break ties") {
  // Any strictly increasing transform of the scores preserves AP.
  std::vector<ScoredPair> base{pair_of(0, 0.7, 1), pair_of(1, 0.3, 0), pair_of(2, 0.5, 1),
                               pair_of(3, 0.1, 0), pair_of(4, 0.9, 0)};
  std::vector<ScoredPair> scaled = base;
  for (ScoredPair& p : scaled) p.score = 2.0 * p.score + 7.0;
  CHECK(hyperdef::average_precision(base) == hyperdef::average_precision(scaled));

  // All scores equal: the ranking falls back to ascending id.
  std::vector<ScoredPair> tied{pair_of(2, 0.5, 0), pair_of(0, 0.5, 1), pair_of(1, 0.5, 0)};
  // Order by id: gold pattern 1,0,0 -> AP = 1.
  CHECK(hyperdef::average_precision(tied) == 1.0);
  std::vector<ScoredPair> tied2{pair_of(0, 0.5, 0), pair_of(1, 0.5, 1)};
  // Order by id: 0,1 -> the positive sits at rank 2.
  CHECK(hyperdef::average_precision(tied2) == 0.5);
}

TEST_CASE("ap_at_k: cutoff semantics and k covering the whole list") {
  const std::vector<ScoredPair> mixed{pair_of(0, 4.0, 1), pair_of(1, 3.0, 0),
                                      pair_of(2, 2.0, 1), pair_of(3, 1.0, 0)};
  // k >= list length reduces to plain AP.
  CHECK(hyperdef::ap_at_k(mixed, 4) == hyperdef::average_precision(mixed));
  CHECK(hyperdef::ap_at_k(mixed, 100) == hyperdef::average_precision(mixed));

  // k = 1: only the top-ranked pair counts, normalized by min(1, gold) = 1.
  CHECK(hyperdef::ap_at_k(mixed, 1) == 1.0);
  const std::vector<ScoredPair> cold{pair_of(0, 4.0, 0), pair_of(1, 3.0, 1)};
  CHECK(hyperdef::ap_at_k(cold, 1) == 0.0);

  // k = 2 over golds 1,0,1,0: hits (1/1) / min(2, 2 golds) = 0.5.
  CHECK(hyperdef::ap_at_k(mixed, 2) == 0.5);

  CHECK_THROWS_AS(hyperdef::ap_at_k(mixed, 0), std::invalid_argument);
  CHECK_THROWS_AS(hyperdef::ap_at_k(confusion(0, 2, 0, 2), 1), std::invalid_argument);
}

// ---------------------------------------------------- random-list oracle ----

TEST_CASE("1000 random score lists agree with independent metric oracles") {
  Rng rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::vector<ScoredPair> pairs = testutil::random_score_list(rng);
    const double threshold = rng.uniform(0.0, 1.0);
    const int k = 1 + static_cast<int>(rng.index(30));

    const testutil::OracleCounts counts = testutil::oracle_counts(pairs, threshold);
    const PrecisionRecall prf = hyperdef::precision_recall_f1(pairs, threshold);
    CHECK(prf.precision == testutil::oracle_precision(counts));
    CHECK(prf.recall == testutil::oracle_recall(counts));
    CHECK(prf.f1 == testutil::oracle_f1(counts));

    CHECK(std::abs(hyperdef::average_precision(pairs) - testutil::oracle_ap(pairs)) <= 1e-12);
    CHECK(std::abs(hyperdef::ap_at_k(pairs, k) - testutil::oracle_ap_at_k(pairs, k)) <= 1e-12);
  }
}

// --------------------------------------------------- threshold selection ----

TEST_CASE("select_threshold returns the lowest F1 maximizer") {
  // Scores 0.2/0.4 are negative, 0.6/0.8 positive: every threshold in
  // (0.4, 0.6] is perfect, and 0.5 is the lowest candidate among them.
  const std::vector<ScoredPair> dev{pair_of(0, 0.2, 0), pair_of(1, 0.4, 0),
                                    pair_of(2, 0.6, 1), pair_of(3, 0.8, 1)};
  CHECK(hyperdef::select_threshold(dev) == 0.5);
  CHECK_THROWS_AS(hyperdef::select_threshold({}), std::invalid_argument);
}

TEST_CASE("the selected threshold never scores below the plain 0.5 cut") {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<ScoredPair> dev = testutil::random_score_list(rng);
    const double chosen = hyperdef::select_threshold(dev);
    const double f1_chosen = hyperdef::precision_recall_f1(dev, chosen).f1;
    const double f1_half = hyperdef::precision_recall_f1(dev, 0.5).f1;
    CHECK(f1_chosen >= f1_half);
  }
}

// ------------------------------------------------------------ full report ----

TEST_CASE("evaluate bundles the metrics with the counting fields") {
  const std::vector<ScoredPair> pairs{pair_of(0, 0.9, 1), pair_of(1, 0.7, 0),
                                      pair_of(2, 0.6, 1), pair_of(3, 0.1, 0)};
  const EvalReport report = hyperdef::evaluate(pairs, 0.65, 2);
  CHECK(report.total == 4);
  CHECK(report.gold_positives == 2);
  CHECK(report.predicted_positives == 2);
  CHECK(report.threshold == 0.65);
  CHECK(report.k == 2);
  CHECK(report.prf.precision == 0.5);
  CHECK(report.prf.recall == 0.5);
  CHECK(report.ap == hyperdef::average_precision(pairs));
  CHECK(report.ap_at_k == hyperdef::ap_at_k(pairs, 2));
}

// -------------------------------------------------------- prediction file ----

TEST_CASE("prediction files round-trip scores exactly") {
  const std::vector<ScoredPair> pairs{pair_of(7, 1.0 / 3.0, 1), pair_of(3, 1e-17, 0),
                                      pair_of(11, 0.9999999999999999, 1)};
  const std::string path = "/tmp/hyperdef_test_predictions.tsv";
  hyperdef::save_predictions(pairs, path);
  const std::vector<ScoredPair> loaded = hyperdef::load_predictions(path);
  REQUIRE(loaded.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(loaded[i].id == pairs[i].id);
    CHECK(loaded[i].score == pairs[i].score);
    CHECK(loaded[i].gold == pairs[i].gold);
  }

  std::ofstream out(path);
  out << "1\t0.5\t2\n";
  out.close();
  CHECK_THROWS_WITH_AS(hyperdef::load_predictions(path), doctest::Contains("line 1"),
                       hyperdef::ParseError);
  CHECK_THROWS_AS(hyperdef::load_predictions("/tmp/hyperdef_missing_predictions.tsv"),
                  hyperdef::ParseError);
  std::remove(path.c_str());
}

// ------------------------------------------------------ sense-aware modes ----

TEST_CASE("top-sense and all-senses inference over the sense cross product") {
  const TermEntry x{"bank", {{"river", "side"}, {"money", "institution"}}};
  const TermEntry y{"slope", {{"rising", "ground"}, {"math", "ratio"}, {"ski", "run"}}};

  FakeScorer scorer;
  const double top = hyperdef::infer_topdef(x, y, scorer);
  CHECK(scorer.calls == 1);
  CHECK(top == scorer.score("bank", {"river", "side"}, "slope", {"rising", "ground"}));

  scorer.calls = 0;
  const double all = hyperdef::infer_alldef(x, y, scorer, 8);
  CHECK(scorer.calls == 6);  // 2 x 3 sense combinations
  CHECK(all >= top);

  // Cap 1 collapses to the top-sense score.
  scorer.calls = 0;
  CHECK(hyperdef::infer_alldef(x, y, scorer, 1) == top);
  CHECK(scorer.calls == 1);

  // The 2 x 2 cross product is exactly the max of the four pair scores.
  const TermEntry y2{"slope", {{"rising", "ground"}, {"math", "ratio"}}};
  double best = 0.0;
  for (const auto& sx : x.senses) {
    for (const auto& sy : y2.senses) {
      best = std::max(best, scorer.score("bank", sx, "slope", sy));
    }
  }
  CHECK(hyperdef::infer_alldef(x, y2, scorer, 4) == best);

  const TermEntry empty{"void", {}};
  CHECK_THROWS_AS(hyperdef::infer_topdef(empty, y, scorer), std::invalid_argument);
  CHECK_THROWS_AS(hyperdef::infer_alldef(x, empty, scorer, 4), std::invalid_argument);
  CHECK_THROWS_AS(hyperdef::infer_alldef(x, y, scorer, 0), std::invalid_argument);
}
