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

// Command-line front end: build | train | eval | predict.
//
// Every option can also come from a line-oriented key=value config file
// (--config FILE). Explicit flags override file values, and --print-config
// writes the effective configuration back out in the same format, so a
// configuration round-trips losslessly through its on-disk form.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "hyperdef/data.hpp"
#include "hyperdef/embedding.hpp"
#include "hyperdef/eval.hpp"
#include "hyperdef/kernels.hpp"
#include "hyperdef/model.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace hyperdef;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Binds each option to both CLI11 and a key=value config representation.
// The value is everything after the first '=', so paths and terms with
// spaces need no quoting.
class ConfigBinder {
 public:
  explicit ConfigBinder(CLI::App* sub) : sub_(sub) {
    sub_->add_option("--config", config_path_, "Read options from a key=value config file");
    sub_->add_flag("--print-config", print_config_,
                   "Print the effective configuration as key=value lines and exit");
  }

  void add(const std::string& name, std::string* p, const std::string& help,
           bool required = false) {
    sub_->add_option("--" + name, *p, help);
    entries_.push_back({name, p, required});
  }
  void add(const std::string& name, double* p, const std::string& help) {
    sub_->add_option("--" + name, *p, help);
    entries_.push_back({name, p, false});
  }
  void add(const std::string& name, int* p, const std::string& help) {
    sub_->add_option("--" + name, *p, help);
    entries_.push_back({name, p, false});
  }
  void add(const std::string& name, std::uint64_t* p, const std::string& help) {
    sub_->add_option("--" + name, *p, help);
    entries_.push_back({name, p, false});
  }
  void add_flag(const std::string& name, bool* p, const std::string& help) {
    sub_->add_flag("--" + name, *p, help);
    entries_.push_back({name, p, false});
  }

  // Apply the config file (if any), skipping options given explicitly, then
  // enforce required options. Returns true if --print-config handled the run.
  bool finish() {
    if (!config_path_.empty()) apply_file();
    if (print_config_) {
      std::cout << to_config();
      return true;
    }
    for (const Entry& e : entries_) {
      if (e.required && !given(e) && std::get<std::string*>(e.target)->empty()) {
        throw std::invalid_argument(sub_->get_name() + ": --" + e.name + " is required");
      }
    }
    return false;
  }

 private:
  struct Entry {
    std::string name;
    std::variant<std::string*, double*, int*, std::uint64_t*, bool*> target;
    bool required = false;
  };

  bool given(const Entry& e) const { return sub_->count("--" + e.name) > 0; }

  void apply_file() {
    std::ifstream in(config_path_);
    if (!in) throw std::invalid_argument("config: cannot open " + config_path_);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        throw std::invalid_argument("config: " + config_path_ + ":" + std::to_string(lineno) +
                                    ": expected key=value");
      }
      const std::string key = line.substr(0, eq);
      const std::string value = line.substr(eq + 1);
      Entry* entry = nullptr;
      for (Entry& e : entries_) {
        if (e.name == key) {
          entry = &e;
          break;
        }
      }
      if (entry == nullptr) {
        throw std::invalid_argument("config: " + config_path_ + ":" + std::to_string(lineno) +
                                    ": unknown key '" + key + "'");
      }
      if (given(*entry)) continue;  // explicit flags win
      try {
        std::visit(
            [&](auto* p) {
              using T = std::remove_pointer_t<decltype(p)>;
              if constexpr (std::is_same_v<T, std::string>) {
                *p = value;
              } else if constexpr (std::is_same_v<T, double>) {
                *p = std::stod(value);
              } else if constexpr (std::is_same_v<T, int>) {
                *p = std::stoi(value);
              } else if constexpr (std::is_same_v<T, std::uint64_t>) {
                *p = std::stoull(value);
              } else {
                if (value == "true" || value == "1") {
                  *p = true;
                } else if (value == "false" || value == "0") {
                  *p = false;
                } else {
                  throw std::invalid_argument("expected true or false");
                }
              }
            },
            entry->target);
      } catch (const std::exception&) {
        throw std::invalid_argument("config: " + config_path_ + ":" + std::to_string(lineno) +
                                    ": cannot parse value '" + value + "' for key '" + key +
                                    "'");
      }
    }
  }

  std::string to_config() const {
    std::string out;
    for (const Entry& e : entries_) {
      out += e.name;
      out += '=';
      std::visit(
          [&](auto* p) {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_same_v<T, std::string>) {
              out += *p;
            } else if constexpr (std::is_same_v<T, double>) {
              out += fmt_double(*p);
            } else if constexpr (std::is_same_v<T, bool>) {
              out += *p ? "true" : "false";
            } else {
              out += std::to_string(*p);
            }
          },
          e.target);
      out += '\n';
    }
    return out;
  }

  CLI::App* sub_;
  std::string config_path_;
  bool print_config_ = false;
  std::vector<Entry> entries_;
};

void parse_fractions(const std::string& text, SplitSpec* spec) {
  double f[3];
  int idx = 0;
  std::string token;
  std::istringstream ss(text);
  while (std::getline(ss, token, ',')) {
    if (idx >= 3) throw std::invalid_argument("fractions: expected three comma-separated values");
    try {
      f[idx++] = std::stod(token);
    } catch (const std::exception&) {
      throw std::invalid_argument("fractions: cannot parse '" + token + "'");
    }
  }
  if (idx != 3) throw std::invalid_argument("fractions: expected three comma-separated values");
  spec->train_fraction = f[0];
  spec->dev_fraction = f[1];
  spec->test_fraction = f[2];
}

// ---------------------------------------------------------------- build ----

struct BuildOpts {
  bool synthetic = false;
  std::string relations;
  std::string out_dir;
  double neg_ratio = 8.0;
  std::string split_mode = "random";
  std::string fractions = "0.8,0.1,0.1";
  std::uint64_t seed = 1;
  int taxonomy_size = 950;
  int filler_count = 150;
  int dim = 32;
  double second_sense_fraction = 0.2;
};

int run_build(const BuildOpts& o) {
  if (o.synthetic == !o.relations.empty()) {
    throw std::invalid_argument("build: pass exactly one of --synthetic or --relations");
  }

  SplitSpec spec;
  if (o.split_mode == "random") {
    spec.mode = SplitSpec::Mode::kRandom;
  } else if (o.split_mode == "lexical") {
    spec.mode = SplitSpec::Mode::kLexical;
  } else {
    throw std::invalid_argument("build: --split must be random or lexical, got '" +
                                o.split_mode + "'");
  }
  parse_fractions(o.fractions, &spec);
  spec.seed = o.seed;

  std::vector<RelationRecord> records;
  std::optional<SynthData> synth;
  if (o.synthetic) {
    SynthConfig cfg;
    cfg.taxonomy_size = o.taxonomy_size;
    cfg.filler_count = o.filler_count;
    cfg.dim = o.dim;
    cfg.neg_ratio = o.neg_ratio;
    cfg.second_sense_fraction = o.second_sense_fraction;
    cfg.seed = o.seed;
    synth = generate_synthetic(cfg);
    records = synth->records;
  } else {
    records = load_relations(o.relations);
  }

  BuildStats stats;
  const std::vector<Instance> instances = build_instances(records, o.neg_ratio, o.seed, &stats);
  const SplitResult split = split_instances(instances, spec);

  // All inputs parsed and all computation done: only now touch the disk, so a
  // bad input never leaves partial outputs behind.
  namespace fs = std::filesystem;
  fs::create_directories(o.out_dir);
  const auto in_dir = [&](const char* name) { return (fs::path(o.out_dir) / name).string(); };

  save_instances(split.train, in_dir("train.tsv"));
  save_instances(split.dev, in_dir("dev.tsv"));
  save_instances(split.test, in_dir("test.tsv"));
  if (synth) {
    synth->embeddings.save_file(in_dir("embeddings.txt"));
    save_lexicon(synth->lexicon, in_dir("lexicon.tsv"));
    save_relations(synth->records, in_dir("relations.tsv"));
  }

  std::vector<std::pair<std::string, std::string>> manifest;
  manifest.emplace_back("source", o.synthetic ? "synthetic" : o.relations);
  manifest.emplace_back("seed", std::to_string(o.seed));
  manifest.emplace_back("split", o.split_mode);
  manifest.emplace_back("fractions", o.fractions);
  manifest.emplace_back("records", std::to_string(stats.records));
  manifest.emplace_back("skipped", std::to_string(stats.skipped));
  manifest.emplace_back("duplicates", std::to_string(stats.duplicates));
  manifest.emplace_back("positives", std::to_string(stats.positives));
  manifest.emplace_back("negatives_before", std::to_string(stats.negatives_before));
  manifest.emplace_back("negatives_after", std::to_string(stats.negatives_after));
  manifest.emplace_back("ratio", fmt_double(stats.ratio()));
  manifest.emplace_back("instances", std::to_string(instances.size()));
  manifest.emplace_back("train_size", std::to_string(split.train.size()));
  manifest.emplace_back("dev_size", std::to_string(split.dev.size()));
  manifest.emplace_back("test_size", std::to_string(split.test.size()));
  manifest.emplace_back("dropped", std::to_string(split.dropped));

  std::ofstream mf(in_dir("manifest.tsv"));
  if (!mf) throw std::runtime_error("build: cannot write " + in_dir("manifest.tsv"));
  for (const auto& [k, v] : manifest) {
    mf << k << '\t' << v << '\n';
    std::cout << k << '\t' << v << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- train ----

struct TrainOpts {
  std::string train_path;
  std::string dev_path;
  std::string embeddings;
  std::string model;
  std::string kind = "fourway";
  std::string mask = "ww,wd,dw,dd";
  int dim = 0;  // 0: take the embedding table's dimension
  double learning_rate = 0.02;
  double epsilon = 1e-8;
  int epochs = 50;
  int batch = 32;
  int patience = 5;
  int definition_cap = 64;
  int sense_cap = 8;
  std::uint64_t seed = 1;
  std::string log_path;
  int threads = 1;
};

int run_train(const TrainOpts& o) {
  kernels::set_threads(o.threads);
  const EmbeddingTable table = EmbeddingTable::load_file(o.embeddings);

  Hyperparams hp;
  hp.dim = o.dim == 0 ? table.dim() : o.dim;
  hp.learning_rate = o.learning_rate;
  hp.epsilon = o.epsilon;
  hp.definition_cap = o.definition_cap;
  hp.batch_size = o.batch;
  hp.max_epochs = o.epochs;
  hp.patience = o.patience;
  hp.sense_cap = o.sense_cap;
  hp.seed = o.seed;
  if (hp.dim != table.dim()) {
    throw std::invalid_argument("train: --dim " + std::to_string(hp.dim) +
                                " does not match embedding dimension " +
                                std::to_string(table.dim()));
  }

  const std::vector<Instance> train_set = load_instances(o.train_path);
  const std::vector<Instance> dev_set = load_instances(o.dev_path);

  const TrainResult result = train_model(parse_model_kind(o.kind), AblationMask::parse(o.mask),
                                         hp, train_set, dev_set, table);
  save_model(result.params, o.model);

  const std::string log_path = o.log_path.empty() ? o.model + ".log.tsv" : o.log_path;
  std::ofstream lf(log_path);
  if (!lf) throw std::runtime_error("train: cannot write " + log_path);
  lf << "epoch\tmean_loss\tdev_ap\tbest_ap\timproved\n";
  for (const EpochLog& e : result.log) {
    lf << e.epoch << '\t' << fmt_double(e.mean_loss) << '\t' << fmt_double(e.dev_ap) << '\t'
       << fmt_double(e.best_ap) << '\t' << (e.improved ? 1 : 0) << '\n';
  }

  double best_ap = 0.0;
  for (const EpochLog& e : result.log) best_ap = std::max(best_ap, e.dev_ap);
  std::cout << "model\t" << o.model << '\n'
            << "log\t" << log_path << '\n'
            << "kind\t" << model_kind_name(result.params.kind) << '\n'
            << "mask\t" << result.params.mask.to_string() << '\n'
            << "train_instances\t" << train_set.size() << '\n'
            << "dev_instances\t" << dev_set.size() << '\n'
            << "epochs_run\t" << result.log.size() << '\n'
            << "best_epoch\t" << result.best_epoch << '\n'
            << "best_dev_ap\t" << fmt_double(best_ap) << '\n'
            << "threshold\t" << fmt_double(result.params.threshold) << '\n';
  return 0;
}

// ----------------------------------------------------------------- eval ----

struct EvalOpts {
  std::string model;
  std::string data;
  std::string embeddings;
  std::string lexicon;
  std::string mode = "instance";
  int k = 100;
  double threshold = -1.0;  // negative: use the model's stored threshold
  std::string predictions;
  int threads = 1;
};

TermEntry lexicon_entry(const std::map<std::string, TermEntry>& lexicon, const std::string& term) {
  const auto it = lexicon.find(term);
  if (it != lexicon.end()) return it->second;
  return TermEntry{term, {tokenize(term)}};
}

int run_eval(const EvalOpts& o) {
  kernels::set_threads(o.threads);
  if (o.mode != "instance" && o.mode != "topdef" && o.mode != "alldef") {
    throw std::invalid_argument("eval: --mode must be instance, topdef, or alldef, got '" +
                                o.mode + "'");
  }
  const ModelParams params = load_model(o.model);
  const EmbeddingTable table = EmbeddingTable::load_file(o.embeddings);
  check_embedding_fingerprint(params, table);
  const std::vector<Instance> instances = load_instances(o.data);

  std::vector<ScoredPair> scores;
  if (o.mode == "instance") {
    scores = score_instances(params, table, instances);
  } else {
    std::map<std::string, TermEntry> lexicon;
    if (!o.lexicon.empty()) {
      for (TermEntry& e : load_lexicon(o.lexicon)) lexicon.emplace(e.term, std::move(e));
    }
    // Collapse instance rows to unique (x, y) pairs: sense choice is the
    // inference mode's job here, and a pair is gold-positive if any of its
    // sense combinations is.
    std::map<std::pair<std::string, std::string>, std::pair<long long, int>> pairs;
    for (const Instance& inst : instances) {
      auto [it, fresh] = pairs.emplace(std::make_pair(inst.x, inst.y),
                                       std::make_pair(inst.id, inst.label));
      if (!fresh) it->second.second = std::max(it->second.second, inst.label);
    }
    std::vector<std::pair<std::pair<std::string, std::string>, std::pair<long long, int>>> flat(
        pairs.begin(), pairs.end());
    scores.resize(flat.size());
    const ModelScorer scorer(params, table);
    const int n = static_cast<int>(flat.size());
    std::string first_error;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(kernels::threads()) \
    if (kernels::threads() > 1 && n >= 32)
#endif
    for (int i = 0; i < n; ++i) {
      try {
        const auto& [pair, meta] = flat[static_cast<std::size_t>(i)];
        const TermEntry ex = lexicon_entry(lexicon, pair.first);
        const TermEntry ey = lexicon_entry(lexicon, pair.second);
        const double s = o.mode == "topdef"
                             ? infer_topdef(ex, ey, scorer)
                             : infer_alldef(ex, ey, scorer, params.hp.sense_cap);
        scores[static_cast<std::size_t>(i)] = ScoredPair{meta.first, s, meta.second};
      } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
        if (first_error.empty()) first_error = e.what();
      }
    }
    if (!first_error.empty()) throw std::runtime_error(first_error);
  }

  const double threshold = o.threshold >= 0.0 ? o.threshold : params.threshold;
  const EvalReport report = evaluate(scores, threshold, o.k);

  const std::string pred_path = o.predictions.empty() ? o.data + ".predictions.tsv"
                                                      : o.predictions;
  save_predictions(scores, pred_path);

  std::cout << "mode\t" << o.mode << '\n'
            << "instances\t" << instances.size() << '\n'
            << "scored\t" << report.total << '\n'
            << "gold_positives\t" << report.gold_positives << '\n'
            << "predicted_positives\t" << report.predicted_positives << '\n'
            << "threshold\t" << fmt_double(report.threshold) << '\n'
            << "precision\t" << fmt_double(report.prf.precision) << '\n'
            << "recall\t" << fmt_double(report.prf.recall) << '\n'
            << "f1\t" << fmt_double(report.prf.f1) << '\n'
            << "ap\t" << fmt_double(report.ap) << '\n'
            << "ap_at_k\t" << fmt_double(report.ap_at_k) << '\n'
            << "k\t" << report.k << '\n'
            << "predictions\t" << pred_path << '\n';
  return 0;
}

// -------------------------------------------------------------- predict ----

struct PredictOpts {
  std::string model;
  std::string embeddings;
  std::string lexicon;
  std::string x;
  std::string y;
  std::string dx;
  std::string dy;
};

int run_predict(const PredictOpts& o) {
  const ModelParams params = load_model(o.model);
  const EmbeddingTable table = EmbeddingTable::load_file(o.embeddings);
  check_embedding_fingerprint(params, table);

  std::map<std::string, TermEntry> lexicon;
  if (!o.lexicon.empty()) {
    for (TermEntry& e : load_lexicon(o.lexicon)) lexicon.emplace(e.term, std::move(e));
  }

  // Definition priority: explicit flag, then lexicon senses, then the term
  // string standing in for its own definition.
  const auto senses_for = [&](const std::string& term, const std::string& supplied) {
    const std::vector<std::string> tokens = tokenize(supplied);
    if (!tokens.empty()) return TermEntry{term, {tokens}};
    return lexicon_entry(lexicon, term);
  };
  const TermEntry ex = senses_for(o.x, o.dx);
  const TermEntry ey = senses_for(o.y, o.dy);

  const ModelScorer scorer(params, table);
  const double score = infer_alldef(ex, ey, scorer, params.hp.sense_cap);
  const int label = score >= params.threshold ? 1 : 0;

  std::cout << "x\t" << o.x << '\n'
            << "y\t" << o.y << '\n'
            << "score\t" << fmt_double(score) << '\n'
            << "threshold\t" << fmt_double(params.threshold) << '\n'
            << "label\t" << label << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypernymy detection over term pairs and their definitions"};
  app.require_subcommand(1);

  BuildOpts build;
  CLI::App* cb = app.add_subcommand("build", "Build instance TSVs and splits from relations");
  ConfigBinder bind_build(cb);
  bind_build.add_flag("synthetic", &build.synthetic, "Generate a seeded synthetic taxonomy");
  bind_build.add("relations", &build.relations, "Relation export TSV to build from");
  bind_build.add("out", &build.out_dir, "Output directory", /*required=*/true);
  bind_build.add("neg-ratio", &build.neg_ratio, "Negative:positive downsampling cap");
  bind_build.add("split", &build.split_mode, "Split mode: random or lexical");
  bind_build.add("fractions", &build.fractions, "Train,dev,test fractions");
  bind_build.add("seed", &build.seed, "Seed for all build randomness");
  bind_build.add("taxonomy-size", &build.taxonomy_size, "Synthetic: concept term count");
  bind_build.add("filler-count", &build.filler_count, "Synthetic: filler vocabulary size");
  bind_build.add("dim", &build.dim, "Synthetic: embedding dimension");
  bind_build.add("second-sense-fraction", &build.second_sense_fraction,
                 "Synthetic: fraction of terms given a second sense");

  TrainOpts train;
  CLI::App* ct = app.add_subcommand("train", "Train a model and write it to disk");
  ConfigBinder bind_train(ct);
  bind_train.add("train", &train.train_path, "Training instance TSV", /*required=*/true);
  bind_train.add("dev", &train.dev_path, "Dev instance TSV", /*required=*/true);
  bind_train.add("embeddings", &train.embeddings, "Embedding text file", /*required=*/true);
  bind_train.add("model", &train.model, "Output model path", /*required=*/true);
  bind_train.add("kind", &train.kind, "Model kind: fourway, noattention, nodefinition");
  bind_train.add("mask", &train.mask, "Active ways, comma list of ww,wd,dw,dd");
  bind_train.add("dim", &train.dim, "State dimension (0: use the embedding dimension)");
  bind_train.add("lr", &train.learning_rate, "AdaGrad learning rate");
  bind_train.add("epsilon", &train.epsilon, "AdaGrad denominator epsilon");
  bind_train.add("epochs", &train.epochs, "Maximum training epochs");
  bind_train.add("batch", &train.batch, "Minibatch size");
  bind_train.add("patience", &train.patience, "Epochs without dev-AP improvement");
  bind_train.add("definition-cap", &train.definition_cap, "Definition tokens kept");
  bind_train.add("sense-cap", &train.sense_cap, "Senses kept per term at inference");
  bind_train.add("seed", &train.seed, "Seed for init and batch order");
  bind_train.add("log", &train.log_path, "Training log TSV (default: model path + .log.tsv)");
  bind_train.add("threads", &train.threads, "Worker threads (1: serial)");

  EvalOpts eval;
  CLI::App* ce = app.add_subcommand("eval", "Evaluate a model on an instance TSV");
  ConfigBinder bind_eval(ce);
  bind_eval.add("model", &eval.model, "Model file", /*required=*/true);
  bind_eval.add("data", &eval.data, "Instance TSV to evaluate", /*required=*/true);
  bind_eval.add("embeddings", &eval.embeddings, "Embedding text file", /*required=*/true);
  bind_eval.add("lexicon", &eval.lexicon, "Sense lexicon TSV for topdef/alldef modes");
  bind_eval.add("mode", &eval.mode, "instance, topdef, or alldef");
  bind_eval.add("k", &eval.k, "Rank cutoff for AP@k");
  bind_eval.add("threshold", &eval.threshold,
                "Decision threshold (negative: model's stored threshold)");
  bind_eval.add("predictions", &eval.predictions,
                "Prediction TSV path (default: data path + .predictions.tsv)");
  bind_eval.add("threads", &eval.threads, "Worker threads (1: serial)");

  PredictOpts predict;
  CLI::App* cp = app.add_subcommand("predict", "Score one term pair");
  ConfigBinder bind_predict(cp);
  bind_predict.add("model", &predict.model, "Model file", /*required=*/true);
  bind_predict.add("embeddings", &predict.embeddings, "Embedding text file", /*required=*/true);
  bind_predict.add("x", &predict.x, "Candidate hyponym term", /*required=*/true);
  bind_predict.add("y", &predict.y, "Candidate hypernym term", /*required=*/true);
  bind_predict.add("dx", &predict.dx, "Definition of x (default: lexicon, then term string)");
  bind_predict.add("dy", &predict.dy, "Definition of y (default: lexicon, then term string)");
  bind_predict.add("lexicon", &predict.lexicon, "Sense lexicon TSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (app.got_subcommand(cb)) return bind_build.finish() ? 0 : run_build(build);
    if (app.got_subcommand(ct)) return bind_train.finish() ? 0 : run_train(train);
    if (app.got_subcommand(ce)) return bind_eval.finish() ? 0 : run_eval(eval);
    if (app.got_subcommand(cp)) return bind_predict.finish() ? 0 : run_predict(predict);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cerr << "error: no subcommand selected\n";
  return 1;
}
