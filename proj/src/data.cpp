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

#include "hyperdef/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "hyperdef/rng.hpp"

namespace hyperdef {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == '\t') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

// Definition tokens with the term-string fallback for missing glosses.
std::vector<std::string> gloss_tokens(const std::string& gloss, const std::string& term) {
  std::vector<std::string> tokens = tokenize(gloss);
  if (tokens.empty()) tokens = tokenize(term);
  return tokens;
}

std::string dedup_key(const std::string& x, const std::string& y, int sx, int sy) {
  return x + '\x1f' + y + '\x1f' + std::to_string(sx) + '\x1f' + std::to_string(sy);
}

int parse_sense(const std::string& field, const char* path, int line_no) {
  if (field.empty()) return 1;
  try {
    std::size_t used = 0;
    const int v = std::stoi(field, &used);
    if (used == field.size() && v >= 1) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(std::string(path) + ": line " + std::to_string(line_no) +
                   ": bad sense id '" + field + "'");
}

}  // namespace

Relation parse_relation(const std::string& name) {
  if (name == "hypernym") return Relation::kHypernym;
  if (name == "hyponym") return Relation::kHyponym;
  if (name == "synonym") return Relation::kSynonym;
  if (name == "antonym") return Relation::kAntonym;
  if (name == "other") return Relation::kOther;
  throw ParseError("unknown relation '" + name + "'");
}

const char* relation_name(Relation r) {
  switch (r) {
    case Relation::kHypernym: return "hypernym";
    case Relation::kHyponym: return "hyponym";
    case Relation::kSynonym: return "synonym";
    case Relation::kAntonym: return "antonym";
    case Relation::kOther: return "other";
  }
  return "other";
}

std::vector<Instance> build_instances(const std::vector<RelationRecord>& records,
                                      double ratio_cap, std::uint64_t seed, BuildStats* stats) {
  if (records.empty()) throw std::invalid_argument("build_instances: no records");
  if (ratio_cap <= 0) throw std::invalid_argument("build_instances: ratio cap must be positive");

  BuildStats local;
  local.records = static_cast<long long>(records.size());

  std::vector<Instance> positives;
  std::vector<Instance> negatives;
  std::unordered_set<std::string> seen;

  auto make_instance = [&](const std::string& x, int sx, const std::string& gx,
                           const std::string& y, int sy, const std::string& gy,
                           int label) -> bool {
    Instance inst;
    inst.x = x;
    inst.y = y;
    inst.sense_x = sx;
    inst.sense_y = sy;
    inst.label = label;
    inst.dx = gloss_tokens(gx, x);
    inst.dy = gloss_tokens(gy, y);
    if (inst.dx.empty() || inst.dy.empty()) return false;
    if (!seen.insert(dedup_key(x, y, sx, sy)).second) {
      ++local.duplicates;
      return true;  // consumed, but not emitted
    }
    (label == 1 ? positives : negatives).push_back(std::move(inst));
    return true;
  };

  // Positives first, so they own their dedup keys.
  for (const RelationRecord& r : records) {
    if (r.term1.empty() || r.term2.empty()) {
      ++local.skipped;
      continue;
    }
    bool ok = true;
    if (r.relation == Relation::kHypernym) {
      ok = make_instance(r.term1, r.sense1, r.gloss1, r.term2, r.sense2, r.gloss2, 1);
    } else if (r.relation == Relation::kHyponym) {
      // A hyponym record names the pair in the other direction; swap.
      ok = make_instance(r.term2, r.sense2, r.gloss2, r.term1, r.sense1, r.gloss1, 1);
    }
    if (!ok) ++local.skipped;
  }

  // Reverse of every surviving positive, guaranteed present pre-downsampling.
  const std::size_t positive_count = positives.size();
  for (std::size_t i = 0; i < positive_count; ++i) {
    const Instance& p = positives[i];
    make_instance(p.y, p.sense_y, join_tokens(p.dy), p.x, p.sense_x, join_tokens(p.dx), 0);
  }

  for (const RelationRecord& r : records) {
    if (r.term1.empty() || r.term2.empty()) continue;  // counted above
    if (r.relation == Relation::kSynonym || r.relation == Relation::kAntonym ||
        r.relation == Relation::kOther) {
      if (!make_instance(r.term1, r.sense1, r.gloss1, r.term2, r.sense2, r.gloss2, 0)) {
        ++local.skipped;
      }
    }
  }

  local.positives = static_cast<long long>(positives.size());
  local.negatives_before = static_cast<long long>(negatives.size());

  const long long cap =
      static_cast<long long>(std::floor(ratio_cap * static_cast<double>(positives.size())));
  if (local.negatives_before > cap) {
    std::vector<std::size_t> order(negatives.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng = Rng(seed).fork(2);
    rng.shuffle(order);
    order.resize(static_cast<std::size_t>(std::max<long long>(cap, 0)));
    std::sort(order.begin(), order.end());  // keep original emission order
    std::vector<Instance> kept;
    kept.reserve(order.size());
    for (std::size_t idx : order) kept.push_back(std::move(negatives[idx]));
    negatives = std::move(kept);
  }
  local.negatives_after = static_cast<long long>(negatives.size());

  std::vector<Instance> out;
  out.reserve(positives.size() + negatives.size());
  for (Instance& p : positives) out.push_back(std::move(p));
  for (Instance& n : negatives) out.push_back(std::move(n));
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<long long>(i);

  if (stats) *stats = local;
  return out;
}

namespace {

void check_fractions(const SplitSpec& spec) {
  const double sum = spec.train_fraction + spec.dev_fraction + spec.test_fraction;
  if (spec.train_fraction <= 0 || spec.dev_fraction <= 0 || spec.test_fraction <= 0 ||
      std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split: fractions must be positive and sum to 1");
  }
}

}  // namespace

SplitResult split_instances(const std::vector<Instance>& instances, const SplitSpec& spec) {
  check_fractions(spec);
  SplitResult out;

  if (spec.mode == SplitSpec::Mode::kRandom) {
    std::vector<std::size_t> order(instances.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng = Rng(spec.seed).fork(3);
    rng.shuffle(order);
    const long long n = static_cast<long long>(order.size());
    const long long n_train = std::llround(static_cast<double>(n) * spec.train_fraction);
    const long long n_dev = std::llround(static_cast<double>(n) * spec.dev_fraction);
    for (long long i = 0; i < n; ++i) {
      const Instance& inst = instances[order[static_cast<std::size_t>(i)]];
      if (i < n_train) {
        out.train.push_back(inst);
      } else if (i < n_train + n_dev) {
        out.dev.push_back(inst);
      } else {
        out.test.push_back(inst);
      }
    }
  } else {
    std::vector<std::string> vocab;
    {
      std::unordered_set<std::string> seen;
      for (const Instance& inst : instances) {
        if (seen.insert(inst.x).second) vocab.push_back(inst.x);
        if (seen.insert(inst.y).second) vocab.push_back(inst.y);
      }
    }
    std::sort(vocab.begin(), vocab.end());
    Rng rng = Rng(spec.seed).fork(4);
    rng.shuffle(vocab);
    const long long v = static_cast<long long>(vocab.size());
    const long long v_train = std::llround(static_cast<double>(v) * spec.train_fraction);
    const long long v_dev = std::llround(static_cast<double>(v) * spec.dev_fraction);
    std::unordered_map<std::string, int> part;
    part.reserve(vocab.size());
    for (long long i = 0; i < v; ++i) {
      part[vocab[static_cast<std::size_t>(i)]] = i < v_train ? 0 : (i < v_train + v_dev ? 1 : 2);
    }
    for (const Instance& inst : instances) {
      const int px = part[inst.x];
      const int py = part[inst.y];
      if (px != py) {
        ++out.dropped;
        continue;
      }
      (px == 0 ? out.train : px == 1 ? out.dev : out.test).push_back(inst);
    }
  }

  if (out.train.empty() || out.dev.empty() || out.test.empty()) {
    throw std::runtime_error("split: a part came out empty (train " +
                             std::to_string(out.train.size()) + ", dev " +
                             std::to_string(out.dev.size()) + ", test " +
                             std::to_string(out.test.size()) + ")");
  }
  return out;
}

namespace {

// Unit vector along the shared embedding direction plus helpers for the
// synthetic geometry. All content tokens sit at coefficient 1.3 along the
// common direction with an orthogonal residual of norm sqrt(6); the "thing"
// marker sits at 3.0 with no residual. Attention from a definition position
// onto a term then prefers the marker unless the definition token is the
// term's own stem, which makes "parent stem appears in the definition" a
// linearly readable, term-independent signal.
std::vector<double> unit_direction(int dim, Rng& rng) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = rng.gaussian();
      norm += x * x;
    }
    norm = std::sqrt(norm);
  } while (norm < 1e-9);
  for (double& x : v) x /= norm;
  return v;
}

std::vector<double> content_token_vector(int dim, const std::vector<double>& dir, Rng& rng,
                                         double along, double residual_norm) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  double norm = 0.0;
  do {
    double dot = 0.0;
    for (int i = 0; i < dim; ++i) {
      v[static_cast<std::size_t>(i)] = rng.gaussian();
      dot += v[static_cast<std::size_t>(i)] * dir[static_cast<std::size_t>(i)];
    }
    norm = 0.0;
    for (int i = 0; i < dim; ++i) {
      v[static_cast<std::size_t>(i)] -= dot * dir[static_cast<std::size_t>(i)];
      norm += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
    }
    norm = std::sqrt(norm);
  } while (norm < 1e-9);
  for (int i = 0; i < dim; ++i) {
    v[static_cast<std::size_t>(i)] =
        v[static_cast<std::size_t>(i)] * (residual_norm / norm) +
        along * dir[static_cast<std::size_t>(i)];
  }
  return v;
}

}  // namespace

SynthData generate_synthetic(const SynthConfig& config) {
  if (config.taxonomy_size < 10 || config.filler_count < 10) {
    throw std::invalid_argument("generate_synthetic: sizes must be at least 10");
  }
  if (config.dim < 4) {
    throw std::invalid_argument("generate_synthetic: dimension must be at least 4");
  }
  const int n = config.taxonomy_size;
  const int m = config.filler_count;
  const Rng master(config.seed);

  constexpr double kMarkerAlong = 3.0;
  constexpr double kContentAlong = 1.3;
  const double residual_norm = std::sqrt(6.0);

  Rng dir_rng = master.fork(11);
  const std::vector<double> dir = unit_direction(config.dim, dir_rng);

  SynthData out{{}, {}, EmbeddingTable(config.dim)};
  {
    std::vector<double> marker(static_cast<std::size_t>(config.dim));
    for (int i = 0; i < config.dim; ++i) {
      marker[static_cast<std::size_t>(i)] = kMarkerAlong * dir[static_cast<std::size_t>(i)];
    }
    out.embeddings.add("thing", marker);
  }
  Rng tok_rng = master.fork(12);
  for (int i = 0; i < n; ++i) {
    out.embeddings.add("c" + std::to_string(i),
                       content_token_vector(config.dim, dir, tok_rng, kContentAlong,
                                            residual_norm));
  }
  for (int j = 0; j < m; ++j) {
    out.embeddings.add("f" + std::to_string(j),
                       content_token_vector(config.dim, dir, tok_rng, kContentAlong,
                                            residual_norm));
  }

  // Random parent tree: node 0 is the root.
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  Rng tree_rng = master.fork(13);
  for (int i = 1; i < n; ++i) {
    parent[static_cast<std::size_t>(i)] = static_cast<int>(tree_rng.index(static_cast<std::uint64_t>(i)));
  }
  std::vector<std::vector<int>> children(static_cast<std::size_t>(n));
  for (int i = 1; i < n; ++i) children[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])].push_back(i);

  Rng sense_rng = master.fork(14);
  std::vector<int> sense_count(static_cast<std::size_t>(n), 1);
  for (int i = 1; i < n; ++i) {
    if (sense_rng.next_double() < config.second_sense_fraction) sense_count[static_cast<std::size_t>(i)] = 2;
  }

  auto term_of = [](int i) { return "c" + std::to_string(i) + " thing"; };

  // Sense glosses: filler template around the parent's stem token.
  Rng gloss_rng = master.fork(15);
  auto filler = [&]() { return "f" + std::to_string(gloss_rng.index(static_cast<std::uint64_t>(m))); };
  std::vector<std::vector<std::string>> glosses(static_cast<std::size_t>(n));
  out.lexicon.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    TermEntry entry;
    entry.term = term_of(i);
    for (int s = 0; s < sense_count[static_cast<std::size_t>(i)]; ++s) {
      std::vector<std::string> tokens;
      if (i == 0) {
        tokens = {filler(), filler(), "thing", filler(), filler()};
      } else {
        tokens = {filler(), filler(), "c" + std::to_string(parent[static_cast<std::size_t>(i)]),
                  "thing", filler(), filler()};
      }
      glosses[static_cast<std::size_t>(i)].push_back(join_tokens(tokens));
      entry.senses.push_back(std::move(tokens));
    }
    out.lexicon.push_back(std::move(entry));
  }

  long long positives = 0;
  for (int i = 1; i < n; ++i) {
    for (int s = 1; s <= sense_count[static_cast<std::size_t>(i)]; ++s) {
      RelationRecord r;
      r.term1 = term_of(i);
      r.term2 = term_of(parent[static_cast<std::size_t>(i)]);
      r.relation = Relation::kHypernym;
      r.sense1 = s;
      r.sense2 = 1;
      r.gloss1 = glosses[static_cast<std::size_t>(i)][static_cast<std::size_t>(s - 1)];
      r.gloss2 = glosses[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])][0];
      out.records.push_back(std::move(r));
      ++positives;
    }
  }

  // Membership keys of pairs that already exist (as positives or their
  // reverses, or as sibling negatives), so random negatives stay distinct.
  std::set<long long> used;
  auto pair_key = [n](int a, int b) {
    return static_cast<long long>(a) * static_cast<long long>(n) + static_cast<long long>(b);
  };
  for (int i = 1; i < n; ++i) {
    used.insert(pair_key(i, parent[static_cast<std::size_t>(i)]));
    used.insert(pair_key(parent[static_cast<std::size_t>(i)], i));
  }

  Rng sib_rng = master.fork(16);
  for (int i = 1; i < n; ++i) {
    const std::vector<int>& sibs = children[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
    if (sibs.size() < 2) continue;
    int j = i;
    while (j == i) j = sibs[static_cast<std::size_t>(sib_rng.index(sibs.size()))];
    if (!used.insert(pair_key(i, j)).second) continue;
    RelationRecord r;
    r.term1 = term_of(i);
    r.term2 = term_of(j);
    r.relation = Relation::kOther;
    r.gloss1 = glosses[static_cast<std::size_t>(i)][0];
    r.gloss2 = glosses[static_cast<std::size_t>(j)][0];
    out.records.push_back(std::move(r));
  }

  auto is_ancestor = [&](int anc, int node) {
    for (int p = parent[static_cast<std::size_t>(node)]; p >= 0; p = parent[static_cast<std::size_t>(p)]) {
      if (p == anc) return true;
    }
    return false;
  };

  Rng pair_rng = master.fork(17);
  const long long target =
      static_cast<long long>(std::ceil(config.neg_ratio * static_cast<double>(positives)));
  long long made = 0;
  long long attempts = 0;
  const long long attempt_cap = target * 50;
  while (made < target && attempts < attempt_cap) {
    ++attempts;
    const int a = static_cast<int>(pair_rng.index(static_cast<std::uint64_t>(n)));
    const int b = static_cast<int>(pair_rng.index(static_cast<std::uint64_t>(n)));
    if (a == b || is_ancestor(b, a)) continue;
    if (!used.insert(pair_key(a, b)).second) continue;
    RelationRecord r;
    r.term1 = term_of(a);
    r.term2 = term_of(b);
    r.relation = Relation::kOther;
    r.gloss1 = glosses[static_cast<std::size_t>(a)][0];
    r.gloss2 = glosses[static_cast<std::size_t>(b)][0];
    out.records.push_back(std::move(r));
    ++made;
  }

  return out;
}

std::vector<RelationRecord> load_relations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("relation file: cannot open " + path);
  std::vector<RelationRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_tabs(line);
    if (f.size() != 7) {
      throw ParseError("relation file: line " + std::to_string(line_no) + ": expected 7 fields, got " +
                       std::to_string(f.size()));
    }
    RelationRecord r;
    r.term1 = f[0];
    r.term2 = f[1];
    try {
      r.relation = parse_relation(f[2]);
    } catch (const ParseError& e) {
      throw ParseError("relation file: line " + std::to_string(line_no) + ": " + e.what());
    }
    r.sense1 = parse_sense(f[3], "relation file", line_no);
    r.sense2 = parse_sense(f[4], "relation file", line_no);
    r.gloss1 = f[5];
    r.gloss2 = f[6];
    out.push_back(std::move(r));
  }
  return out;
}

void save_relations(const std::vector<RelationRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("relation file: cannot write " + path);
  for (const RelationRecord& r : records) {
    out << r.term1 << '\t' << r.term2 << '\t' << relation_name(r.relation) << '\t' << r.sense1
        << '\t' << r.sense2 << '\t' << r.gloss1 << '\t' << r.gloss2 << '\n';
  }
  if (!out) throw ParseError("relation file: write failed for " + path);
}

std::vector<Instance> load_instances(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("instance file: cannot open " + path);
  std::vector<Instance> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_tabs(line);
    if (f.size() != 5) {
      throw ParseError("instance file: line " + std::to_string(line_no) +
                       ": expected 5 fields, got " + std::to_string(f.size()));
    }
    Instance inst;
    inst.x = f[0];
    inst.y = f[2];
    inst.dx = tokenize(f[1]);
    inst.dy = tokenize(f[3]);
    if (inst.x.empty() || inst.y.empty()) {
      throw ParseError("instance file: line " + std::to_string(line_no) + ": empty term");
    }
    if (inst.dx.empty() || inst.dy.empty()) {
      throw ParseError("instance file: line " + std::to_string(line_no) + ": empty definition");
    }
    if (f[4] == "0") {
      inst.label = 0;
    } else if (f[4] == "1") {
      inst.label = 1;
    } else {
      throw ParseError("instance file: line " + std::to_string(line_no) + ": bad label '" +
                       f[4] + "'");
    }
    inst.id = static_cast<long long>(out.size());
    out.push_back(std::move(inst));
  }
  return out;
}

void save_instances(const std::vector<Instance>& instances, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("instance file: cannot write " + path);
  for (const Instance& inst : instances) {
    out << inst.x << '\t' << join_tokens(inst.dx) << '\t' << inst.y << '\t'
        << join_tokens(inst.dy) << '\t' << inst.label << '\n';
  }
  if (!out) throw ParseError("instance file: write failed for " + path);
}

std::vector<TermEntry> load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("lexicon file: cannot open " + path);
  std::vector<TermEntry> out;
  std::unordered_map<std::string, std::size_t> where;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_tabs(line);
    if (f.size() != 2) {
      throw ParseError("lexicon file: line " + std::to_string(line_no) +
                       ": expected 'term<TAB>gloss'");
    }
    std::vector<std::string> tokens = gloss_tokens(f[1], f[0]);
    if (f[0].empty() || tokens.empty()) {
      throw ParseError("lexicon file: line " + std::to_string(line_no) + ": empty term");
    }
    auto it = where.find(f[0]);
    if (it == where.end()) {
      where.emplace(f[0], out.size());
      out.push_back(TermEntry{f[0], {std::move(tokens)}});
    } else {
      out[it->second].senses.push_back(std::move(tokens));
    }
  }
  return out;
}

void save_lexicon(const std::vector<TermEntry>& lexicon, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("lexicon file: cannot write " + path);
  for (const TermEntry& e : lexicon) {
    for (const std::vector<std::string>& sense : e.senses) {
      out << e.term << '\t' << join_tokens(sense) << '\n';
    }
  }
  if (!out) throw ParseError("lexicon file: write failed for " + path);
}

}  // namespace hyperdef
