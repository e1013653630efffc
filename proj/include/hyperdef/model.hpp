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

#include "hyperdef/data.hpp"
#include "hyperdef/embedding.hpp"
#include "hyperdef/encoder.hpp"
#include "hyperdef/eval.hpp"
#include "hyperdef/tape.hpp"

namespace hyperdef {

// Which pair encodings feed the classifier: term-term, term-definition,
// definition-term, definition-definition. Concatenation order is fixed.
struct AblationMask {
  bool ww = true;
  bool wd = true;
  bool dw = true;
  bool dd = true;

  int active_count() const {
    return (ww ? 1 : 0) + (wd ? 1 : 0) + (dw ? 1 : 0) + (dd ? 1 : 0);
  }
  std::uint8_t bits() const {
    return static_cast<std::uint8_t>((ww ? 1 : 0) | (wd ? 2 : 0) | (dw ? 4 : 0) | (dd ? 8 : 0));
  }
  static AblationMask from_bits(std::uint8_t bits);
  std::string to_string() const;               // e.g. "ww,wd,dw,dd"
  static AblationMask parse(const std::string& spec);  // throws on none active
};

enum class ModelKind : std::uint8_t {
  kFourWay = 0,      // the attentive pair encoder over all (unmasked) ways
  kNoAttention = 1,  // term means + plain-CNN definitions
  kNoDefinition = 2, // term means only
};

ModelKind parse_model_kind(const std::string& name);
const char* model_kind_name(ModelKind kind);

struct Hyperparams {
  int dim = 32;
  double learning_rate = 0.02;
  double epsilon = 1e-8;
  int definition_cap = 64;  // definition tokens kept per sequence
  int batch_size = 32;
  int max_epochs = 50;
  int patience = 5;  // epochs without dev-AP improvement before stopping
  int sense_cap = 8;
  std::uint64_t seed = 1;
};

// All trainable tensors plus everything needed to reproduce predictions.
// The embedding table itself is not stored here: it stays frozen and is
// referenced by fingerprint.
struct ModelParams {
  ModelKind kind = ModelKind::kFourWay;
  AblationMask mask;
  Hyperparams hp;
  EncoderParams way[4];              // ww, wd, dw, dd; W is d x 4d
  EncoderParams cnn_x, cnn_y;        // plain-CNN definition encoders; W is d x 3d
  Matrix U;                          // 2 x classifier width
  Matrix c;                          // 2 x 1
  double threshold = 0.5;
  std::uint64_t embedding_fingerprint = 0;
};

// d x active ways for the four-way model, 4d for no-attention, 2d for
// no-definition.
int classifier_width(ModelKind kind, const AblationMask& mask, int dim);

// Seeded deterministic initialization; weights uniform in +-sqrt(6/(fan_in +
// fan_out)), biases zero.
ModelParams init_params(ModelKind kind, const AblationMask& mask, const Hyperparams& hp);

// The trainable tensors for the model's kind/mask, in a fixed order shared
// by gradient slabs and the optimizer.
std::vector<Matrix*> trainable_tensors(ModelParams& params);
std::vector<const Matrix*> trainable_tensors(const ModelParams& params);
std::vector<std::string> trainable_names(const ModelParams& params);

// One instance's forward graph; node ids into the tape.
struct InstanceGraph {
  std::vector<int> params;  // leaves in trainable_tensors order
  int prob = -1;            // 2x1 class distribution node
  int loss = -1;            // 1x1 negative log-likelihood node (if built)
};

// Builds the full forward (and optionally loss) graph for one instance.
// with_gradients controls whether parameter leaves track gradients;
// embedding_gradients exposes the (normally frozen) state leaves for tests.
InstanceGraph build_instance_graph(Tape& tape, const ModelParams& params,
                                   const EmbeddingTable& table, const Instance& inst,
                                   bool with_loss, bool with_gradients,
                                   bool embedding_gradients = false,
                                   std::vector<int>* state_leaves = nullptr);

// Probability that the pair is a hypernym pair (class 1).
double score_instance(const ModelParams& params, const EmbeddingTable& table,
                      const Instance& inst);

// Scores every instance in id order; parallel over instances when the
// kernel thread count allows, with results written by index (deterministic).
std::vector<ScoredPair> score_instances(const ModelParams& params, const EmbeddingTable& table,
                                        const std::vector<Instance>& instances);

// PairScorer adapter for the sense-aware inference modes.
class ModelScorer : public PairScorer {
 public:
  ModelScorer(const ModelParams& params, const EmbeddingTable& table)
      : params_(params), table_(table) {}
  double score(const std::string& x, const std::vector<std::string>& dx, const std::string& y,
               const std::vector<std::string>& dy) const override;

 private:
  const ModelParams& params_;
  const EmbeddingTable& table_;
};

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  double dev_ap = 0.0;
  double best_ap = 0.0;
  bool improved = false;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLog> log;
  int best_epoch = 0;
};

// Minibatch NLL with AdaGrad over frozen embeddings. Per-instance gradients
// may be computed in parallel but are reduced in instance order, so the
// result is independent of thread count. Best checkpoint by dev AP; the
// decision threshold is then selected on dev.
TrainResult train_model(ModelKind kind, const AblationMask& mask, const Hyperparams& hp,
                        const std::vector<Instance>& train, const std::vector<Instance>& dev,
                        const EmbeddingTable& table);

// Versioned binary container, magic "HYPERDEF1", little-endian.
void save_model(const ModelParams& params, const std::string& path);
ModelParams load_model(const std::string& path);

// Throws when the table is not the one the model was trained against.
void check_embedding_fingerprint(const ModelParams& params, const EmbeddingTable& table);

}  // namespace hyperdef
