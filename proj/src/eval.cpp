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

#include "hyperdef/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace hyperdef {

namespace {

std::vector<ScoredPair> ranked(const std::vector<ScoredPair>& pairs) {
  std::vector<ScoredPair> r = pairs;
  std::sort(r.begin(), r.end(), [](const ScoredPair& a, const ScoredPair& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  return r;
}

long long count_gold(const std::vector<ScoredPair>& pairs) {
  long long g = 0;
  for (const ScoredPair& p : pairs) g += p.gold ? 1 : 0;
  return g;
}

}  // namespace

PrecisionRecall precision_recall_f1(const std::vector<ScoredPair>& pairs, double threshold) {
  if (pairs.empty()) throw std::invalid_argument("precision_recall_f1: empty list");
  long long tp = 0, fp = 0, fn = 0;
  for (const ScoredPair& p : pairs) {
    const bool predicted = p.score >= threshold;
    if (predicted && p.gold) {
      ++tp;
    } else if (predicted && !p.gold) {
      ++fp;
    } else if (!predicted && p.gold) {
      ++fn;
    }
  }
  PrecisionRecall out;
  out.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  out.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  out.f1 = out.precision + out.recall > 0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

double average_precision(const std::vector<ScoredPair>& pairs) {
  const long long gold = count_gold(pairs);
  if (gold == 0) throw std::invalid_argument("average_precision: no gold-positive pairs");
  const std::vector<ScoredPair> r = ranked(pairs);
  double sum = 0.0;
  long long seen = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i].gold) {
      ++seen;
      sum += static_cast<double>(seen) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(gold);
}

double ap_at_k(const std::vector<ScoredPair>& pairs, int k) {
  if (k < 1) throw std::invalid_argument("ap_at_k: k must be at least 1");
  const long long gold = count_gold(pairs);
  if (gold == 0) throw std::invalid_argument("ap_at_k: no gold-positive pairs");
  const std::vector<ScoredPair> r = ranked(pairs);
  const std::size_t top = std::min<std::size_t>(r.size(), static_cast<std::size_t>(k));
  double sum = 0.0;
  long long seen = 0;
  for (std::size_t i = 0; i < top; ++i) {
    if (r[i].gold) {
      ++seen;
      sum += static_cast<double>(seen) / static_cast<double>(i + 1);
    }
  }
  const long long denom = std::min<long long>(static_cast<long long>(k), gold);
  return sum / static_cast<double>(denom);
}

double select_threshold(const std::vector<ScoredPair>& dev) {
  if (dev.empty()) throw std::invalid_argument("select_threshold: empty list");
  std::vector<double> scores;
  scores.reserve(dev.size());
  for (const ScoredPair& p : dev) scores.push_back(p.score);
  std::sort(scores.begin(), scores.end());

  std::vector<double> candidates;
  candidates.reserve(100);
  for (int q = 1; q <= 99; ++q) {
    const std::size_t at =
        std::min(scores.size() - 1,
                 static_cast<std::size_t>(static_cast<double>(scores.size()) * q / 100.0));
    candidates.push_back(scores[at]);
  }
  candidates.push_back(0.5);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  double best_f1 = -1.0;
  double best_threshold = 0.5;
  for (double t : candidates) {
    const double f1 = precision_recall_f1(dev, t).f1;
    if (f1 > best_f1) {  // ties keep the lowest threshold: candidates ascend
      best_f1 = f1;
      best_threshold = t;
    }
  }
  return best_threshold;
}

EvalReport evaluate(const std::vector<ScoredPair>& pairs, double threshold, int k) {
  EvalReport report;
  report.prf = precision_recall_f1(pairs, threshold);
  report.ap = average_precision(pairs);
  report.ap_at_k = ap_at_k(pairs, k);
  report.k = k;
  report.threshold = threshold;
  report.total = static_cast<long long>(pairs.size());
  report.gold_positives = count_gold(pairs);
  for (const ScoredPair& p : pairs) report.predicted_positives += p.score >= threshold ? 1 : 0;
  return report;
}

void save_predictions(const std::vector<ScoredPair>& pairs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("prediction file: cannot write " + path);
  char buf[40];
  for (const ScoredPair& p : pairs) {
    std::snprintf(buf, sizeof buf, "%.17g", p.score);
    out << p.id << '\t' << buf << '\t' << p.gold << '\n';
  }
  if (!out) throw ParseError("prediction file: write failed for " + path);
}

std::vector<ScoredPair> load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("prediction file: cannot open " + path);
  std::vector<ScoredPair> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ScoredPair p;
    int gold = 0;
    if (std::sscanf(line.c_str(), "%lld\t%lf\t%d", &p.id, &p.score, &gold) != 3 ||
        (gold != 0 && gold != 1)) {
      throw ParseError("prediction file: line " + std::to_string(line_no) + ": expected 'id\tscore\tgold'");
    }
    p.gold = gold;
    out.push_back(p);
  }
  return out;
}

double infer_topdef(const TermEntry& x, const TermEntry& y, const PairScorer& scorer) {
  if (x.senses.empty() || y.senses.empty()) {
    throw std::invalid_argument("infer_topdef: term entry without senses");
  }
  return scorer.score(x.term, x.senses.front(), y.term, y.senses.front());
}

double infer_alldef(const TermEntry& x, const TermEntry& y, const PairScorer& scorer, int cap) {
  if (x.senses.empty() || y.senses.empty()) {
    throw std::invalid_argument("infer_alldef: term entry without senses");
  }
  if (cap < 1) throw std::invalid_argument("infer_alldef: sense cap must be at least 1");
  const std::size_t nx = std::min<std::size_t>(x.senses.size(), static_cast<std::size_t>(cap));
  const std::size_t ny = std::min<std::size_t>(y.senses.size(), static_cast<std::size_t>(cap));
  double best = 0.0;
  bool first = true;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      const double s = scorer.score(x.term, x.senses[i], y.term, y.senses[j]);
      if (first || s > best) {
        best = s;
        first = false;
      }
    }
  }
  return best;
}

}  // namespace hyperdef
