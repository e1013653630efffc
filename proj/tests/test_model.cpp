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
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "hyperdef/data.hpp"
#include "hyperdef/embedding.hpp"
#include "hyperdef/kernels.hpp"
#include "hyperdef/matrix.hpp"
#include "hyperdef/model.hpp"
#include "hyperdef/rng.hpp"
#include "hyperdef/tape.hpp"
#include "test_util.hpp"

using hyperdef::AblationMask;
using hyperdef::EmbeddingTable;
using hyperdef::Hyperparams;
using hyperdef::Instance;
using hyperdef::Matrix;
using hyperdef::ModelKind;
using hyperdef::ModelParams;
using hyperdef::Rng;
using hyperdef::Tape;
using hyperdef::TrainResult;

namespace {

struct ThreadGuard {
  ~ThreadGuard() { hyperdef::kernels::set_threads(1); }
};

Instance make_instance(std::string x, std::string y, std::vector<std::string> dx,
                       std::vector<std::string> dy, int label, long long id = 0) {
  Instance inst;
  inst.x = std::move(x);
  inst.y = std::move(y);
  inst.dx = std::move(dx);
  inst.dy = std::move(dy);
  inst.label = label;
  inst.id = id;
  return inst;
}

// A table with no vocabulary: every token falls back to the deterministic
// hash-seeded vector, giving small near-zero initial logits.
EmbeddingTable empty_table(int dim) { return EmbeddingTable(dim); }

// Random instances over a made-up vocabulary, alternating labels.
std::vector<Instance> random_instances(int n, Rng& rng) {
  std::vector<Instance> out;
  auto word = [&rng] { return "tok" + std::to_string(rng.index(500)); };
  for (int i = 0; i < n; ++i) {
    std::vector<std::string> dx, dy;
    const int nx = 2 + static_cast<int>(rng.index(4));
    const int ny = 2 + static_cast<int>(rng.index(4));
    for (int k = 0; k < nx; ++k) dx.push_back(word());
    for (int k = 0; k < ny; ++k) dy.push_back(word());
    out.push_back(make_instance(word(), word(), dx, dy, i % 2, i));
  }
  return out;
}

// Small learnable dataset: y is x's hypernym exactly when x's definition
// names y. Definitions use an in-vocabulary marker so the signal is strong.
std::vector<Instance> learnable_instances(int pairs, EmbeddingTable* table, Rng& rng) {
  std::vector<Instance> out;
  const int d = table->dim();
  for (int i = 0; i < 2 * pairs; ++i) {
    std::vector<double> v(static_cast<std::size_t>(d));
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    table->add("w" + std::to_string(i), v);
  }
  for (int i = 0; i < pairs; ++i) {
    const std::string x = "w" + std::to_string(2 * i);
    const std::string y = "w" + std::to_string(2 * i + 1);
    out.push_back(make_instance(x, y, {"kind", "of", y}, {"a", "group"}, 1,
                                static_cast<long long>(out.size())));
    out.push_back(make_instance(y, x, {"not", "related"}, {"a", "group"}, 0,
                                static_cast<long long>(out.size())));
  }
  return out;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

// ---------------------------------------------------------- mask parsing ----

TEST_CASE("ablation mask: parsing, printing, and bit codes") {
  const AblationMask all = AblationMask::parse("ww,wd,dw,dd");
  CHECK(all.active_count() == 4);
  CHECK(all.bits() == 0xF);
  CHECK(all.to_string() == "ww,wd,dw,dd");

  const AblationMask one = AblationMask::parse("dw");
  CHECK(one.active_count() == 1);
  CHECK_FALSE(one.ww);
  CHECK(one.dw);
  CHECK(AblationMask::from_bits(one.bits()).to_string() == one.to_string());

  CHECK_THROWS_AS(AblationMask::parse("ww,xx"), std::invalid_argument);
  CHECK_THROWS_AS(AblationMask::parse(""), std::invalid_argument);
  CHECK_THROWS_AS(AblationMask::from_bits(0), std::invalid_argument);
}

TEST_CASE("classifier width covers every mask and both ablation kinds") {
  const int d = 6;
  for (int bits = 1; bits < 16; ++bits) {
    const AblationMask mask = AblationMask::from_bits(static_cast<std::uint8_t>(bits));
    CHECK(hyperdef::classifier_width(ModelKind::kFourWay, mask, d) == d * mask.active_count());
  }
  const AblationMask all;
  CHECK(hyperdef::classifier_width(ModelKind::kNoAttention, all, d) == 4 * d);
  CHECK(hyperdef::classifier_width(ModelKind::kNoDefinition, all, d) == 2 * d);
}

// ---------------------------------------------------------- initialization ----

TEST_CASE("init_params: seeded, deterministic, and shaped by kind") {
  Hyperparams hp;
  hp.dim = 8;
  const ModelParams a = hyperdef::init_params(ModelKind::kFourWay, AblationMask{}, hp);
  const ModelParams b = hyperdef::init_params(ModelKind::kFourWay, AblationMask{}, hp);
  const auto ta = hyperdef::trainable_tensors(a);
  const auto tb = hyperdef::trainable_tensors(b);
  REQUIRE(ta.size() == tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) CHECK(*ta[i] == *tb[i]);

  Hyperparams other = hp;
  other.seed = 2;
  const ModelParams c = hyperdef::init_params(ModelKind::kFourWay, AblationMask{}, other);
  CHECK(testutil::max_abs_diff(a.way[0].W, c.way[0].W) > 0.0);

  CHECK(a.way[0].W.rows() == 8);
  CHECK(a.way[0].W.cols() == 32);
  CHECK(a.U.rows() == 2);
  CHECK(a.U.cols() == 32);
  CHECK(a.c.rows() == 2);
  for (std::size_t i = 0; i < a.way[0].b.size(); ++i) CHECK(a.way[0].b.data()[i] == 0.0);

  // Glorot bound for a d x 4d weight block.
  const double bound = std::sqrt(6.0 / (8 + 32));
  for (std::size_t i = 0; i < a.way[0].W.size(); ++i) {
    CHECK(std::abs(a.way[0].W.data()[i]) <= bound);
  }

  const ModelParams cnn = hyperdef::init_params(ModelKind::kNoAttention, AblationMask{}, hp);
  CHECK(cnn.cnn_x.W.rows() == 8);
  CHECK(cnn.cnn_x.W.cols() == 24);
  CHECK(cnn.U.cols() == 32);

  Hyperparams bad = hp;
  bad.dim = 0;
  CHECK_THROWS_AS(hyperdef::init_params(ModelKind::kFourWay, AblationMask{}, bad),
                  std::invalid_argument);
}

TEST_CASE("trainable tensors: order, names, and per-kind selection") {
  Hyperparams hp;
  hp.dim = 4;
  ModelParams four = hyperdef::init_params(ModelKind::kFourWay, AblationMask::parse("ww,dd"), hp);
  const auto names = hyperdef::trainable_names(four);
  const std::vector<std::string> expected{"way_ww.W", "way_ww.b", "way_dd.W",
                                          "way_dd.b", "U",        "c"};
  CHECK(names == expected);
  CHECK(hyperdef::trainable_tensors(four).size() == 6);

  ModelParams noatt = hyperdef::init_params(ModelKind::kNoAttention, AblationMask{}, hp);
  const auto cnn_names = hyperdef::trainable_names(noatt);
  const std::vector<std::string> cnn_expected{"cnn_x.W", "cnn_x.b", "cnn_y.W",
                                              "cnn_y.b", "U",       "c"};
  CHECK(cnn_names == cnn_expected);

  ModelParams nodef = hyperdef::init_params(ModelKind::kNoDefinition, AblationMask{}, hp);
  CHECK(hyperdef::trainable_names(nodef) == std::vector<std::string>{"U", "c"});
}

// ------------------------------------------------------------ forward pass ----

TEST_CASE("zero classifier scores exactly one half, and probabilities sum to 1") {
  Hyperparams hp;
  hp.dim = 6;
  const EmbeddingTable table = empty_table(6);
  Rng rng(31);
  const std::vector<Instance> instances = random_instances(10, rng);

  for (const ModelKind kind :
       {ModelKind::kFourWay, ModelKind::kNoAttention, ModelKind::kNoDefinition}) {
    ModelParams params = hyperdef::init_params(kind, AblationMask{}, hp);
    ModelParams zeroed = params;
    zeroed.U.fill(0.0);
    zeroed.c.fill(0.0);
    for (const Instance& inst : instances) {
      CHECK(hyperdef::score_instance(zeroed, table, inst) == 0.5);

      Tape tape;
      const auto graph =
          hyperdef::build_instance_graph(tape, params, table, inst, /*with_loss=*/false,
                                         /*with_gradients=*/false);
      const Matrix& prob = tape.value(graph.prob);
      CHECK(prob.rows() == 2);
      CHECK(prob.cols() == 1);
      CHECK(prob(0, 0) + prob(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(prob(0, 0) > 0.0);
      CHECK(prob(1, 0) > 0.0);
    }
  }
}

TEST_CASE("loss node: exact values at pinned probabilities, sane at start") {
  // The loss subgraph is -log of the picked class probability; pin it with
  // hand-built distributions.
  Tape tape;
  const int certain = tape.leaf(Matrix::from_rows({{1.0}, {0.0}}), false);
  CHECK(tape.value(tape.neg(tape.log_clamp(tape.pick_entry(certain, 0, 0), 1e-12)))(0, 0) == 0.0);
  const int even = tape.leaf(Matrix::from_rows({{0.5}, {0.5}}), false);
  CHECK(tape.value(tape.neg(tape.log_clamp(tape.pick_entry(even, 1, 0), 1e-12)))(0, 0) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));

  // Fresh model, tiny hash-seeded embeddings: logits are near zero, so the
  // mean loss over random instances starts near ln 2.
  Hyperparams hp;
  hp.dim = 8;
  const EmbeddingTable table = empty_table(8);
  ModelParams params = hyperdef::init_params(ModelKind::kFourWay, AblationMask{}, hp);
  Rng rng(32);
  const std::vector<Instance> instances = random_instances(50, rng);
  double total = 0.0;
  for (const Instance& inst : instances) {
    Tape t;
    const auto graph = hyperdef::build_instance_graph(t, params, table, inst, true, false);
    total += t.value(graph.loss)(0, 0);
  }
  CHECK(std::abs(total / 50.0 - std::log(2.0)) < 0.05);
}

TEST_CASE("instance validation: bad labels and empty terms are rejected") {
  Hyperparams hp;
  hp.dim = 4;
  const EmbeddingTable table = empty_table(4);
  const ModelParams params = hyperdef::init_params(ModelKind::kFourWay, AblationMask{}, hp);

  Instance bad_label = make_instance("a", "b", {"c"}, {"d"}, 2);
  Tape tape;
  CHECK_THROWS_AS(hyperdef::build_instance_graph(tape, params, table, bad_label, true, false),
                  std::invalid_argument);

  Instance empty_term = make_instance("", "b", {"c"}, {"d"}, 1);
  Tape tape2;
  CHECK_THROWS_AS(hyperdef::build_instance_graph(tape2, params, table, empty_term, true, false),
                  std::invalid_argument);
}

TEST_CASE("definition cap and sense handling flow through scoring") {
  Hyperparams hp;
  hp.dim = 4;
  hp.definition_cap = 2;
  const EmbeddingTable table = empty_table(4);
  const ModelParams params = hyperdef::init_params(ModelKind::kFourWay, AblationMask{}, hp);

  // With the cap at 2, tokens beyond the first two cannot change the score.
  const Instance shorter = make_instance("a", "b", {"p", "q"}, {"r"}, 1);
  const Instance longer = make_instance("a", "b", {"p", "q", "zebra", "yak"}, {"r"}, 1);
  CHECK(hyperdef::score_instance(params, table, shorter) ==
        hyperdef::score_instance(params, table, longer));

  const Instance different = make_instance("a", "b", {"p", "zebra"}, {"r"}, 1);
  CHECK(hyperdef::score_instance(params, table, shorter) !=
        hyperdef::score_instance(params, table, different));
}

// --------------------------------------------------------- model gradients ----

TEST_CASE("full-model gradients pass finite differences for every kind") {
  const EmbeddingTable table = empty_table(5);
  Rng rng(33);
  testutil::GradCheckStats stats;
  const std::vector<Instance> instances = random_instances(3, rng);

  for (const ModelKind kind :
       {ModelKind::kFourWay, ModelKind::kNoAttention, ModelKind::kNoDefinition}) {
    Hyperparams hp;
    hp.dim = 5;
    hp.seed = 7;
    ModelParams params = hyperdef::init_params(kind, AblationMask::parse("ww,dw"), hp);
    for (const Instance& inst : instances) {
      auto forward = [&] {
        Tape tape;
        const auto g = hyperdef::build_instance_graph(tape, params, table, inst, true, false);
        return tape.value(g.loss)(0, 0);
      };
      Tape tape;
      const auto graph = hyperdef::build_instance_graph(tape, params, table, inst, true, true);
      tape.backward(graph.loss);

      const auto tensors = hyperdef::trainable_tensors(params);
      const auto names = hyperdef::trainable_names(params);
      REQUIRE(tensors.size() == graph.params.size());
      for (std::size_t t = 0; t < tensors.size(); ++t) {
        testutil::check_gradient(*tensors[t], tape.grad(graph.params[t]), forward,
                                 std::string(hyperdef::model_kind_name(kind)) + "/" + names[t],
                                 &stats);
      }
    }
  }
  INFO("worst relative error ", stats.worst_rel, " at ", stats.worst_where);
  CHECK(stats.strict_entries > 500);
  CHECK(stats.worst_rel < 1e-4);
  CHECK(stats.worst_small < 1e-6);
}

// ----------------------------------------------------------- training loop ----

TEST_CASE("training is deterministic and leaves the embeddings untouched") {
  EmbeddingTable table(6);
  Rng rng(34);
  const std::vector<Instance> data = learnable_instances(12, &table, rng);
  const std::uint64_t fingerprint_before = table.fingerprint();

  Hyperparams hp;
  hp.dim = 6;
  hp.max_epochs = 4;
  hp.batch_size = 8;
  hp.patience = 10;
  hp.seed = 3;

  const TrainResult a = hyperdef::train_model(ModelKind::kFourWay, AblationMask{}, hp, data,
                                              data, table);
  const TrainResult b = hyperdef::train_model(ModelKind::kFourWay, AblationMask{}, hp, data,
                                              data, table);
  CHECK(table.fingerprint() == fingerprint_before);

  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].mean_loss == b.log[i].mean_loss);
    CHECK(a.log[i].dev_ap == b.log[i].dev_ap);
    CHECK(a.log[i].improved == b.log[i].improved);
  }
  CHECK(a.best_epoch == b.best_epoch);
  CHECK(a.params.threshold == b.params.threshold);

  const auto ta = hyperdef::trainable_tensors(a.params);
  const auto tb = hyperdef::trainable_tensors(b.params);
  for (std::size_t i = 0; i < ta.size(); ++i) CHECK(*ta[i] == *tb[i]);

  // Thread count must not change the result either.
  ThreadGuard guard;
  hyperdef::kernels::set_threads(4);
  const TrainResult c = hyperdef::train_model(ModelKind::kFourWay, AblationMask{}, hp, data,
                                              data, table);
  hyperdef::kernels::set_threads(1);
  const auto tc = hyperdef::trainable_tensors(c.params);
  for (std::size_t i = 0; i < ta.size(); ++i) CHECK(*ta[i] == *tc[i]);
}

TEST_CASE("training input validation") {
  EmbeddingTable table(4);
  Rng rng(35);
  std::vector<Instance> data = random_instances(6, rng);
  Hyperparams hp;
  hp.dim = 4;

  CHECK_THROWS_AS(hyperdef::train_model(ModelKind::kFourWay, AblationMask{}, hp, {}, data, table),
                  std::invalid_argument);

  Hyperparams wrong = hp;
  wrong.dim = 5;
  CHECK_THROWS_AS(
      hyperdef::train_model(ModelKind::kFourWay, AblationMask{}, wrong, data, data, table),
      std::invalid_argument);

  std::vector<Instance> all_negative = data;
  for (Instance& inst : all_negative) inst.label = 0;
  CHECK_THROWS_AS(
      hyperdef::train_model(ModelKind::kFourWay, AblationMask{}, hp, data, all_negative, table),
      std::invalid_argument);

  Hyperparams bad_batch = hp;
  bad_batch.batch_size = 0;
  CHECK_THROWS_AS(
      hyperdef::train_model(ModelKind::kFourWay, AblationMask{}, bad_batch, data, data, table),
      std::invalid_argument);
}

TEST_CASE("a small model overfits a small learnable set to perfect accuracy") {
  EmbeddingTable table(16);
  Rng rng(36);
  const std::vector<Instance> data = learnable_instances(25, &table, rng);
  REQUIRE(data.size() == 50);

  Hyperparams hp;
  hp.dim = 16;
  hp.max_epochs = 200;
  hp.patience = 200;  // effectively disables early stopping
  hp.batch_size = 10;
  hp.seed = 5;

  const TrainResult result =
      hyperdef::train_model(ModelKind::kFourWay, AblationMask{}, hp, data, data, table);
  CHECK(result.log.size() <= 200);

  int correct = 0;
  for (const Instance& inst : data) {
    const double score = hyperdef::score_instance(result.params, table, inst);
    const int predicted = score >= result.params.threshold ? 1 : 0;
    correct += predicted == inst.label ? 1 : 0;
  }
  CHECK(correct == 50);
}

// ------------------------------------------------------- batch scoring ----

TEST_CASE("score_instances: id order, thread independence, scorer adapter") {
  Hyperparams hp;
  hp.dim = 6;
  const EmbeddingTable table = empty_table(6);
  const ModelParams params = hyperdef::init_params(ModelKind::kFourWay, AblationMask{}, hp);
  Rng rng(37);
  std::vector<Instance> instances = random_instances(80, rng);
  for (std::size_t i = 0; i < instances.size(); ++i)
    instances[i].id = static_cast<long long>(1000 + i);

  const auto serial = hyperdef::score_instances(params, table, instances);
  REQUIRE(serial.size() == instances.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].id == instances[i].id);
    CHECK(serial[i].gold == instances[i].label);
    CHECK(serial[i].score == hyperdef::score_instance(params, table, instances[i]));
  }

  ThreadGuard guard;
  hyperdef::kernels::set_threads(4);
  const auto threaded = hyperdef::score_instances(params, table, instances);
  hyperdef::kernels::set_threads(1);
  REQUIRE(threaded.size() == serial.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(threaded[i].score == serial[i].score);
    CHECK(threaded[i].id == serial[i].id);
  }

  // The PairScorer adapter scores (x, dx, y, dy) exactly like an instance.
  const hyperdef::ModelScorer scorer(params, table);
  const Instance& inst = instances[0];
  CHECK(scorer.score(inst.x, inst.dx, inst.y, inst.dy) ==
        hyperdef::score_instance(params, table, inst));
}

// ----------------------------------------------------------- serialization ----

TEST_CASE("models round-trip through the binary file bit-exactly") {
  EmbeddingTable table(6);
  Rng rng(38);
  const std::vector<Instance> data = learnable_instances(10, &table, rng);

  Hyperparams hp;
  hp.dim = 6;
  hp.max_epochs = 2;
  hp.batch_size = 8;
  hp.definition_cap = 48;
  hp.seed = 11;

  const TrainResult trained = hyperdef::train_model(
      ModelKind::kFourWay, AblationMask::parse("ww,wd,dd"), hp, data, data, table);

  const std::string path = "/tmp/hyperdef_test_model.bin";
  hyperdef::save_model(trained.params, path);
  const ModelParams loaded = hyperdef::load_model(path);

  CHECK(loaded.kind == trained.params.kind);
  CHECK(loaded.mask.bits() == trained.params.mask.bits());
  CHECK(loaded.hp.dim == hp.dim);
  CHECK(loaded.hp.definition_cap == hp.definition_cap);
  CHECK(loaded.hp.seed == hp.seed);
  CHECK(loaded.threshold == trained.params.threshold);
  CHECK(loaded.embedding_fingerprint == trained.params.embedding_fingerprint);

  const auto got = hyperdef::trainable_tensors(loaded);
  const auto want = hyperdef::trainable_tensors(trained.params);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(*got[i] == *want[i]);

  // Inactive ways and unused CNN tensors round-trip too: the file always
  // carries all fourteen tensors.
  CHECK(loaded.way[2].W == trained.params.way[2].W);
  CHECK(loaded.cnn_x.W == trained.params.cnn_x.W);

  // Scores from the reloaded model are bit-identical.
  for (const Instance& inst : data) {
    CHECK(hyperdef::score_instance(loaded, table, inst) ==
          hyperdef::score_instance(trained.params, table, inst));
  }

  // Saving the identical params twice gives identical bytes.
  const std::string path2 = "/tmp/hyperdef_test_model2.bin";
  hyperdef::save_model(trained.params, path2);
  CHECK(read_bytes(path) == read_bytes(path2));
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("fingerprint check rejects a different embedding table") {
  EmbeddingTable table(4);
  table.add("alpha", {1.0, 0.0, 0.0, 0.0});
  Hyperparams hp;
  hp.dim = 4;
  ModelParams params = hyperdef::init_params(ModelKind::kFourWay, AblationMask{}, hp);
  params.embedding_fingerprint = table.fingerprint();
  CHECK_NOTHROW(hyperdef::check_embedding_fingerprint(params, table));

  EmbeddingTable other(4);
  other.add("alpha", {1.0, 0.0, 0.0, 0.5});
  CHECK_THROWS_WITH_AS(hyperdef::check_embedding_fingerprint(params, other),
                       doctest::Contains("fingerprint mismatch"), std::runtime_error);
}

TEST_CASE("model files reject corruption and wrong magic") {
  EmbeddingTable table(4);
  Hyperparams hp;
  hp.dim = 4;
  const ModelParams params = hyperdef::init_params(ModelKind::kFourWay, AblationMask{}, hp);
  const std::string path = "/tmp/hyperdef_test_corrupt.bin";
  hyperdef::save_model(params, path);

  std::string bytes = read_bytes(path);
  {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(hyperdef::load_model(path), hyperdef::ParseError);

  {
    std::ofstream out(path, std::ios::binary);
    std::string wrong = bytes;
    wrong[0] = 'X';
    out.write(wrong.data(), static_cast<std::streamsize>(wrong.size()));
  }
  CHECK_THROWS_AS(hyperdef::load_model(path), hyperdef::ParseError);
  CHECK_THROWS_AS(hyperdef::load_model("/tmp/hyperdef_no_such_file.bin"), hyperdef::ParseError);
  std::remove(path.c_str());
}

// ------------------------------------------------ ablation mask behavior ----

TEST_CASE("every mask yields a working model with the right feature width") {
  Hyperparams hp;
  hp.dim = 4;
  const EmbeddingTable table = empty_table(4);
  Rng rng(39);
  const Instance inst = random_instances(1, rng)[0];

  for (int bits = 1; bits < 16; ++bits) {
    const AblationMask mask = AblationMask::from_bits(static_cast<std::uint8_t>(bits));
    const ModelParams params = hyperdef::init_params(ModelKind::kFourWay, mask, hp);
    CHECK(params.U.cols() == 4 * mask.active_count());
    const double score = hyperdef::score_instance(params, table, inst);
    CHECK(score > 0.0);
    CHECK(score < 1.0);
  }
}
