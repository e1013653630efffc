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

#include "hyperdef/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hyperdef/adagrad.hpp"
#include "hyperdef/kernels.hpp"
#include "hyperdef/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; this build targets little-endian hosts");

namespace hyperdef {

namespace {

constexpr char kMagic[9] = {'H', 'Y', 'P', 'E', 'R', 'D', 'E', 'F', '1'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr double kProbFloor = 1e-12;

const char* kWayNames[4] = {"ww", "wd", "dw", "dd"};

}  // namespace

AblationMask AblationMask::from_bits(std::uint8_t bits) {
  AblationMask m;
  m.ww = bits & 1;
  m.wd = bits & 2;
  m.dw = bits & 4;
  m.dd = bits & 8;
  if (m.active_count() == 0) {
    throw std::invalid_argument("ablation mask: at least one way must stay active");
  }
  return m;
}

std::string AblationMask::to_string() const {
  std::string out;
  const bool act[4] = {ww, wd, dw, dd};
  for (int i = 0; i < 4; ++i) {
    if (!act[i]) continue;
    if (!out.empty()) out.push_back(',');
    out += kWayNames[i];
  }
  return out;
}

AblationMask AblationMask::parse(const std::string& spec) {
  AblationMask m;
  m.ww = m.wd = m.dw = m.dd = false;
  std::string token;
  std::istringstream ss(spec);
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    if (token == "ww") {
      m.ww = true;
    } else if (token == "wd") {
      m.wd = true;
    } else if (token == "dw") {
      m.dw = true;
    } else if (token == "dd") {
      m.dd = true;
    } else {
      throw std::invalid_argument("ablation mask: unknown way '" + token +
                                  "' (expected ww, wd, dw, dd)");
    }
  }
  if (m.active_count() == 0) {
    throw std::invalid_argument("ablation mask: at least one way must stay active");
  }
  return m;
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "fourway") return ModelKind::kFourWay;
  if (name == "noattention") return ModelKind::kNoAttention;
  if (name == "nodefinition") return ModelKind::kNoDefinition;
  throw std::invalid_argument("model kind: unknown '" + name +
                              "' (expected fourway, noattention, nodefinition)");
}

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kFourWay: return "fourway";
    case ModelKind::kNoAttention: return "noattention";
    case ModelKind::kNoDefinition: return "nodefinition";
  }
  return "fourway";
}

int classifier_width(ModelKind kind, const AblationMask& mask, int dim) {
  switch (kind) {
    case ModelKind::kFourWay: return dim * mask.active_count();
    case ModelKind::kNoAttention: return 4 * dim;
    case ModelKind::kNoDefinition: return 2 * dim;
  }
  return dim;
}

namespace {

Matrix glorot_uniform(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  const double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& x : m.values()) x = rng.uniform(-s, s);
  return m;
}

}  // namespace

ModelParams init_params(ModelKind kind, const AblationMask& mask, const Hyperparams& hp) {
  if (hp.dim < 1) throw std::invalid_argument("init_params: dimension must be positive");
  ModelParams p;
  p.kind = kind;
  p.mask = mask;
  p.hp = hp;
  Rng rng = Rng(hp.seed).fork(20);
  const int d = hp.dim;
  for (int w = 0; w < 4; ++w) {
    p.way[w].W = glorot_uniform(d, 4 * d, rng);
    p.way[w].b = Matrix(d, 1);
  }
  p.cnn_x.W = glorot_uniform(d, 3 * d, rng);
  p.cnn_x.b = Matrix(d, 1);
  p.cnn_y.W = glorot_uniform(d, 3 * d, rng);
  p.cnn_y.b = Matrix(d, 1);
  const int width = classifier_width(kind, mask, d);
  p.U = glorot_uniform(2, width, rng);
  p.c = Matrix(2, 1);
  return p;
}

namespace {

template <typename Params, typename MatrixPtr>
std::vector<MatrixPtr> collect_tensors(Params& p) {
  std::vector<MatrixPtr> out;
  if (p.kind == ModelKind::kFourWay) {
    const bool act[4] = {p.mask.ww, p.mask.wd, p.mask.dw, p.mask.dd};
    for (int w = 0; w < 4; ++w) {
      if (!act[w]) continue;
      out.push_back(&p.way[w].W);
      out.push_back(&p.way[w].b);
    }
  } else if (p.kind == ModelKind::kNoAttention) {
    out.push_back(&p.cnn_x.W);
    out.push_back(&p.cnn_x.b);
    out.push_back(&p.cnn_y.W);
    out.push_back(&p.cnn_y.b);
  }
  out.push_back(&p.U);
  out.push_back(&p.c);
  return out;
}

}  // namespace

std::vector<Matrix*> trainable_tensors(ModelParams& params) {
  return collect_tensors<ModelParams, Matrix*>(params);
}

std::vector<const Matrix*> trainable_tensors(const ModelParams& params) {
  return collect_tensors<const ModelParams, const Matrix*>(params);
}

std::vector<std::string> trainable_names(const ModelParams& params) {
  std::vector<std::string> out;
  if (params.kind == ModelKind::kFourWay) {
    const bool act[4] = {params.mask.ww, params.mask.wd, params.mask.dw, params.mask.dd};
    for (int w = 0; w < 4; ++w) {
      if (!act[w]) continue;
      out.push_back(std::string("way_") + kWayNames[w] + ".W");
      out.push_back(std::string("way_") + kWayNames[w] + ".b");
    }
  } else if (params.kind == ModelKind::kNoAttention) {
    out.insert(out.end(), {"cnn_x.W", "cnn_x.b", "cnn_y.W", "cnn_y.b"});
  }
  out.push_back("U");
  out.push_back("c");
  return out;
}

InstanceGraph build_instance_graph(Tape& tape, const ModelParams& params,
                                   const EmbeddingTable& table, const Instance& inst,
                                   bool with_loss, bool with_gradients,
                                   bool embedding_gradients, std::vector<int>* state_leaves) {
  if (inst.label != 0 && inst.label != 1) {
    throw std::invalid_argument("instance label must be 0 or 1, got " +
                                std::to_string(inst.label));
  }
  const std::vector<std::string> xt = tokenize(inst.x);
  const std::vector<std::string> yt = tokenize(inst.y);
  if (xt.empty() || yt.empty()) {
    throw std::invalid_argument("instance with empty term tokens: '" + inst.x + "' / '" +
                                inst.y + "'");
  }

  auto state_leaf = [&](const std::vector<std::string>& tokens, int cap) {
    FeatureMap fm = embed_sequence(tokens, table, cap);
    const int id = tape.leaf(std::move(fm.states), embedding_gradients);
    if (state_leaves) state_leaves->push_back(id);
    return id;
  };
  auto param_leaf = [&](const Matrix& m, InstanceGraph& g) {
    const int id = tape.leaf(m, with_gradients);
    g.params.push_back(id);
    return id;
  };

  InstanceGraph g;
  int pair_vector = -1;

  if (params.kind == ModelKind::kFourWay) {
    const int hx = state_leaf(xt, 0);
    const int hy = state_leaf(yt, 0);
    const int hdx = state_leaf(inst.dx, params.hp.definition_cap);
    const int hdy = state_leaf(inst.dy, params.hp.definition_cap);
    const bool act[4] = {params.mask.ww, params.mask.wd, params.mask.dw, params.mask.dd};
    const int s1[4] = {hx, hx, hdx, hdx};
    const int s2[4] = {hy, hdy, hy, hdy};
    std::vector<int> parts;
    for (int w = 0; w < 4; ++w) {
      if (!act[w]) continue;
      const int wid = param_leaf(params.way[w].W, g);
      const int bid = param_leaf(params.way[w].b, g);
      parts.push_back(encode_pair_node(tape, s1[w], s2[w], wid, bid));
    }
    pair_vector = parts.size() == 1 ? parts[0] : tape.concat_rows(parts);
  } else if (params.kind == ModelKind::kNoAttention) {
    const int hx = state_leaf(xt, 0);
    const int hdx = state_leaf(inst.dx, params.hp.definition_cap);
    const int hy = state_leaf(yt, 0);
    const int hdy = state_leaf(inst.dy, params.hp.definition_cap);
    const int wcx = param_leaf(params.cnn_x.W, g);
    const int bcx = param_leaf(params.cnn_x.b, g);
    const int wcy = param_leaf(params.cnn_y.W, g);
    const int bcy = param_leaf(params.cnn_y.b, g);
    const int vx = tape.mean_cols(hx);
    const int vdx = encode_cnn_node(tape, hdx, wcx, bcx);
    const int vy = tape.mean_cols(hy);
    const int vdy = encode_cnn_node(tape, hdy, wcy, bcy);
    pair_vector = tape.concat_rows({vx, vdx, vy, vdy});
  } else {
    const int hx = state_leaf(xt, 0);
    const int hy = state_leaf(yt, 0);
    const int vx = tape.mean_cols(hx);
    const int vy = tape.mean_cols(hy);
    pair_vector = tape.concat_rows({vx, vy});
  }

  const int uid = param_leaf(params.U, g);
  const int cid = param_leaf(params.c, g);
  const int logits = tape.affine_cols(uid, pair_vector, cid);
  g.prob = tape.softmax_cols(logits);

  if (with_loss) {
    const int picked = tape.pick_entry(g.prob, inst.label, 0);
    g.loss = tape.neg(tape.log_clamp(picked, kProbFloor));
  }
  return g;
}

double score_instance(const ModelParams& params, const EmbeddingTable& table,
                      const Instance& inst) {
  Tape tape;
  const InstanceGraph g = build_instance_graph(tape, params, table, inst,
                                               /*with_loss=*/false, /*with_gradients=*/false);
  return tape.value(g.prob)(1, 0);
}

std::vector<ScoredPair> score_instances(const ModelParams& params, const EmbeddingTable& table,
                                        const std::vector<Instance>& instances) {
  std::vector<ScoredPair> out(instances.size());
  const int n = static_cast<int>(instances.size());
  std::string first_error;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16) num_threads(kernels::threads()) \
    if (kernels::threads() > 1 && n >= 64)
#endif
  for (int i = 0; i < n; ++i) {
    try {
      const Instance& inst = instances[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(i)] =
          ScoredPair{inst.id, score_instance(params, table, inst), inst.label};
    } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (!first_error.empty()) throw std::runtime_error(first_error);
  return out;
}

double ModelScorer::score(const std::string& x, const std::vector<std::string>& dx,
                          const std::string& y, const std::vector<std::string>& dy) const {
  Instance inst;
  inst.x = x;
  inst.y = y;
  inst.dx = dx.empty() ? tokenize(x) : dx;
  inst.dy = dy.empty() ? tokenize(y) : dy;
  return score_instance(params_, table_, inst);
}

TrainResult train_model(ModelKind kind, const AblationMask& mask, const Hyperparams& hp,
                        const std::vector<Instance>& train, const std::vector<Instance>& dev,
                        const EmbeddingTable& table) {
  if (train.empty() || dev.empty()) {
    throw std::invalid_argument("train: empty train or dev split");
  }
  if (hp.dim != table.dim()) {
    throw std::invalid_argument("train: configured dimension " + std::to_string(hp.dim) +
                                " does not match embedding dimension " +
                                std::to_string(table.dim()));
  }
  bool dev_has_positive = false;
  for (const Instance& inst : dev) dev_has_positive = dev_has_positive || inst.label == 1;
  if (!dev_has_positive) {
    throw std::invalid_argument("train: dev split has no positive instances");
  }
  if (hp.batch_size < 1 || hp.max_epochs < 1 || hp.patience < 1) {
    throw std::invalid_argument("train: batch size, epochs, and patience must be positive");
  }

  ModelParams params = init_params(kind, mask, hp);
  params.embedding_fingerprint = table.fingerprint();
  std::vector<Matrix*> tensors = trainable_tensors(params);

  AdaGradState opt;
  opt.learning_rate = hp.learning_rate;
  opt.epsilon = hp.epsilon;
  opt.reset(tensors);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle_rng = Rng(hp.seed).fork(21);

  TrainResult result;
  ModelParams best = params;
  double best_ap = -1.0;
  int since_best = 0;

  const int n = static_cast<int>(train.size());
  for (int epoch = 1; epoch <= hp.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;

    for (int start = 0; start < n; start += hp.batch_size) {
      const int bn = std::min(hp.batch_size, n - start);
      std::vector<std::vector<Matrix>> slabs(static_cast<std::size_t>(bn));
      std::vector<double> losses(static_cast<std::size_t>(bn), 0.0);
      std::string first_error;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(kernels::threads()) \
    if (kernels::threads() > 1 && bn >= 4)
#endif
      for (int i = 0; i < bn; ++i) {
        try {
          const Instance& inst = train[order[static_cast<std::size_t>(start + i)]];
          Tape tape;
          const InstanceGraph g = build_instance_graph(tape, params, table, inst,
                                                       /*with_loss=*/true,
                                                       /*with_gradients=*/true);
          tape.backward(g.loss);
          losses[static_cast<std::size_t>(i)] = tape.value(g.loss)(0, 0);
          std::vector<Matrix>& slab = slabs[static_cast<std::size_t>(i)];
          slab.reserve(g.params.size());
          for (int pid : g.params) slab.push_back(tape.grad(pid));
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
          if (first_error.empty()) first_error = e.what();
        }
      }
      if (!first_error.empty()) throw std::runtime_error(first_error);

      // Reduce per-instance gradients in instance order so the update (and
      // therefore the trained model bytes) is independent of thread count.
      std::vector<Matrix> grads;
      grads.reserve(tensors.size());
      for (const Matrix* t : tensors) grads.emplace_back(t->rows(), t->cols());
      for (int i = 0; i < bn; ++i) {
        const std::vector<Matrix>& slab = slabs[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < grads.size(); ++k) {
          kernels::axpy(1.0, slab[k], grads[k]);
        }
      }
      const double inv = 1.0 / static_cast<double>(bn);
      for (Matrix& gm : grads) {
        for (double& v : gm.values()) v *= inv;
      }
      adagrad_step(tensors, grads, opt);
      for (double l : losses) loss_sum += l;
    }

    const std::vector<ScoredPair> dev_scores = score_instances(params, table, dev);
    const double ap = average_precision(dev_scores);

    EpochLog log_entry;
    log_entry.epoch = epoch;
    log_entry.mean_loss = loss_sum / static_cast<double>(n);
    log_entry.dev_ap = ap;
    log_entry.improved = ap > best_ap;
    if (ap > best_ap) {
      best_ap = ap;
      best = params;
      result.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
    log_entry.best_ap = best_ap;
    result.log.push_back(log_entry);
    if (since_best >= hp.patience) break;
  }

  best.threshold = select_threshold(score_instances(best, table, dev));
  result.params = std::move(best);
  return result;
}

namespace {

void put_bytes(std::ofstream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

template <typename T>
void put(std::ofstream& out, T v) {
  put_bytes(out, &v, sizeof v);
}

void put_matrix(std::ofstream& out, const std::string& name, const Matrix& m) {
  const std::uint32_t len = static_cast<std::uint32_t>(name.size());
  put(out, len);
  put_bytes(out, name.data(), name.size());
  put(out, static_cast<std::int32_t>(m.rows()));
  put(out, static_cast<std::int32_t>(m.cols()));
  put_bytes(out, m.data(), sizeof(double) * m.size());
}

void get_bytes(std::ifstream& in, void* data, std::size_t n, const char* what) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw ParseError(std::string("model file: truncated while reading ") + what);
  }
}

template <typename T>
T get(std::ifstream& in, const char* what) {
  T v;
  get_bytes(in, &v, sizeof v, what);
  return v;
}

Matrix get_matrix(std::ifstream& in, const std::string& expected_name) {
  const std::uint32_t len = get<std::uint32_t>(in, "tensor name length");
  if (len > 256) throw ParseError("model file: tensor name length " + std::to_string(len));
  std::string name(len, '\0');
  get_bytes(in, name.data(), len, "tensor name");
  if (name != expected_name) {
    throw ParseError("model file: unexpected tensor '" + name + "', expected '" +
                     expected_name + "'");
  }
  const std::int32_t rows = get<std::int32_t>(in, "tensor rows");
  const std::int32_t cols = get<std::int32_t>(in, "tensor cols");
  if (rows < 0 || cols < 0 || static_cast<long long>(rows) * cols > (1LL << 28)) {
    throw ParseError("model file: implausible tensor shape " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
  Matrix m(rows, cols);
  get_bytes(in, m.data(), sizeof(double) * m.size(), "tensor values");
  return m;
}

std::vector<std::pair<std::string, const Matrix*>> all_tensors(const ModelParams& p) {
  std::vector<std::pair<std::string, const Matrix*>> out;
  for (int w = 0; w < 4; ++w) {
    out.emplace_back(std::string("way_") + kWayNames[w] + ".W", &p.way[w].W);
    out.emplace_back(std::string("way_") + kWayNames[w] + ".b", &p.way[w].b);
  }
  out.emplace_back("cnn_x.W", &p.cnn_x.W);
  out.emplace_back("cnn_x.b", &p.cnn_x.b);
  out.emplace_back("cnn_y.W", &p.cnn_y.W);
  out.emplace_back("cnn_y.b", &p.cnn_y.b);
  out.emplace_back("U", &p.U);
  out.emplace_back("c", &p.c);
  return out;
}

}  // namespace

void save_model(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("model file: cannot write " + path);
  put_bytes(out, kMagic, sizeof kMagic);
  put(out, kFormatVersion);
  put(out, static_cast<std::uint8_t>(params.kind));
  put(out, params.mask.bits());
  put(out, static_cast<std::uint16_t>(0));
  put(out, static_cast<std::int32_t>(params.hp.dim));
  put(out, params.hp.learning_rate);
  put(out, params.hp.epsilon);
  put(out, static_cast<std::int32_t>(params.hp.definition_cap));
  put(out, static_cast<std::int32_t>(params.hp.batch_size));
  put(out, static_cast<std::int32_t>(params.hp.max_epochs));
  put(out, static_cast<std::int32_t>(params.hp.patience));
  put(out, static_cast<std::int32_t>(params.hp.sense_cap));
  put(out, params.hp.seed);
  put(out, params.threshold);
  put(out, params.embedding_fingerprint);
  const auto tensors = all_tensors(params);
  put(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, m] : tensors) put_matrix(out, name, *m);
  if (!out) throw ParseError("model file: write failed for " + path);
}

ModelParams load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("model file: cannot open " + path);
  char magic[sizeof kMagic];
  get_bytes(in, magic, sizeof magic, "magic");
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ParseError("model file: bad magic, not a model file: " + path);
  }
  const std::uint32_t version = get<std::uint32_t>(in, "format version");
  if (version != kFormatVersion) {
    throw ParseError("model file: unsupported format version " + std::to_string(version));
  }
  ModelParams p;
  const std::uint8_t kind = get<std::uint8_t>(in, "model kind");
  if (kind > 2) throw ParseError("model file: unknown model kind " + std::to_string(kind));
  p.kind = static_cast<ModelKind>(kind);
  p.mask = AblationMask::from_bits(get<std::uint8_t>(in, "ablation mask"));
  get<std::uint16_t>(in, "padding");
  p.hp.dim = get<std::int32_t>(in, "dimension");
  p.hp.learning_rate = get<double>(in, "learning rate");
  p.hp.epsilon = get<double>(in, "epsilon");
  p.hp.definition_cap = get<std::int32_t>(in, "definition cap");
  p.hp.batch_size = get<std::int32_t>(in, "batch size");
  p.hp.max_epochs = get<std::int32_t>(in, "max epochs");
  p.hp.patience = get<std::int32_t>(in, "patience");
  p.hp.sense_cap = get<std::int32_t>(in, "sense cap");
  p.hp.seed = get<std::uint64_t>(in, "seed");
  p.threshold = get<double>(in, "threshold");
  p.embedding_fingerprint = get<std::uint64_t>(in, "embedding fingerprint");
  const std::uint32_t count = get<std::uint32_t>(in, "tensor count");
  if (count != 14) {
    throw ParseError("model file: expected 14 tensors, found " + std::to_string(count));
  }
  for (int w = 0; w < 4; ++w) {
    p.way[w].W = get_matrix(in, std::string("way_") + kWayNames[w] + ".W");
    p.way[w].b = get_matrix(in, std::string("way_") + kWayNames[w] + ".b");
  }
  p.cnn_x.W = get_matrix(in, "cnn_x.W");
  p.cnn_x.b = get_matrix(in, "cnn_x.b");
  p.cnn_y.W = get_matrix(in, "cnn_y.W");
  p.cnn_y.b = get_matrix(in, "cnn_y.b");
  p.U = get_matrix(in, "U");
  p.c = get_matrix(in, "c");
  return p;
}

void check_embedding_fingerprint(const ModelParams& params, const EmbeddingTable& table) {
  const std::uint64_t actual = table.fingerprint();
  if (params.embedding_fingerprint != actual) {
    char expect_hex[20], actual_hex[20];
    std::snprintf(expect_hex, sizeof expect_hex, "%016llx",
                  static_cast<unsigned long long>(params.embedding_fingerprint));
    std::snprintf(actual_hex, sizeof actual_hex, "%016llx",
                  static_cast<unsigned long long>(actual));
    throw std::runtime_error(std::string("embedding fingerprint mismatch: model expects ") +
                             expect_hex + ", table is " + actual_hex);
  }
}

}  // namespace hyperdef
