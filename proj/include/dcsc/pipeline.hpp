#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "dcsc/checkpoint.hpp"
#include "dcsc/data.hpp"
#include "dcsc/io.hpp"
#include "dcsc/metrics.hpp"
#include "dcsc/synth.hpp"
#include "dcsc/trainer.hpp"

namespace dcsc {

using json = nlohmann::json;

// Built-in synthetic corpora addressable by name from the CLI and configs.
inline BlobSpec synth_preset(const std::string& name) {
  BlobSpec b;
  if (name == "default") {
    // Overlapping blobs: raw-feature K-Means++ lands well below perfect.
    b.noise_sigma = 4.5;
  } else if (name == "easy") {
    b.noise_sigma = 0.5;
  } else if (name == "tiny") {
    b.num_clusters = 4;
    b.samples_per_cluster = 40;
    b.input_dim = 8;
    b.noise_sigma = 0.3;
  } else if (name == "zero-noise") {
    b.num_clusters = 4;
    b.samples_per_cluster = 40;
    b.input_dim = 8;
    b.noise_sigma = 0.0;
  } else if (name == "tokens") {
    b.num_clusters = 4;
    b.samples_per_cluster = 40;
    b.input_dim = 8;
    b.noise_sigma = 0.3;
    b.tokens = TokenMode{};
  } else if (name == "hard") {
    b.noise_sigma = 2.0;
    b.hard_mode = true;
  } else {
    fail(ErrorKind::invalid_spec, "unknown synth preset '" + name + "'");
  }
  return b;
}

struct SynthSource {
  std::string preset = "default";
  BlobSpec spec;
  // When unset, the blob seed is derived from the root seed.
  std::optional<std::uint64_t> seed;
};

struct RunConfig {
  std::optional<SynthSource> synth;
  std::string corpus_path;
  std::string test_corpus_path;
  std::optional<int> num_intents;
  double test_fraction = 0.2;
  double known_fraction = 0.75;
  double labeled_ratio = 0.1;
  EncoderConfig encoder;
  bool standardize_inputs = true;
  TrainConfig train;
  std::uint64_t seed = 0;
  std::string out_dir = "dcsc_out";
};

// ---------------------------------------------------------------------------
// Config (de)serialization. Every field is written, so a resolved config is
// a complete record of the run.

inline json blob_spec_to_json(const BlobSpec& b) {
  json j = {{"num_clusters", b.num_clusters},   {"samples_per_cluster", b.samples_per_cluster},
            {"input_dim", b.input_dim},         {"center_scale", b.center_scale},
            {"noise_sigma", b.noise_sigma},     {"hard_mode", b.hard_mode}};
  if (b.tokens) j["tokens"] = {{"min_length", b.tokens->min_length}, {"max_length", b.tokens->max_length}};
  return j;
}

inline BlobSpec blob_spec_from_json(const json& j, BlobSpec b) {
  b.num_clusters = j.value("num_clusters", b.num_clusters);
  b.samples_per_cluster = j.value("samples_per_cluster", b.samples_per_cluster);
  b.input_dim = j.value("input_dim", b.input_dim);
  b.center_scale = j.value("center_scale", b.center_scale);
  b.noise_sigma = j.value("noise_sigma", b.noise_sigma);
  b.hard_mode = j.value("hard_mode", b.hard_mode);
  if (j.contains("tokens")) {
    if (j["tokens"].is_null()) {
      b.tokens.reset();
    } else {
      TokenMode t = b.tokens.value_or(TokenMode{});
      t.min_length = j["tokens"].value("min_length", t.min_length);
      t.max_length = j["tokens"].value("max_length", t.max_length);
      b.tokens = t;
    }
  }
  return b;
}

inline json train_config_to_json(const TrainConfig& t) {
  return {{"warmup_epochs", t.warmup_epochs},
          {"cluster_epochs", t.cluster_epochs},
          {"learning_rate", t.optimizer.learning_rate},
          {"weight_decay", t.optimizer.weight_decay},
          {"adam_beta1", t.optimizer.beta1},
          {"adam_beta2", t.optimizer.beta2},
          {"adam_epsilon", t.optimizer.epsilon},
          {"supervised_batch", t.batches.supervised_batch_size},
          {"unsupervised_batch", t.batches.unsupervised_batch_size},
          {"cluster_batch", t.batches.cluster_batch_size},
          {"tau", t.tau},
          {"sinkhorn_epsilon", t.sinkhorn.epsilon},
          {"sinkhorn_iters", t.sinkhorn.iterations},
          {"ablation_no_sup_cluster", t.ablation_no_sup_cluster},
          {"kmeans_max_iters", t.kmeans_max_iters}};
}

inline TrainConfig train_config_from_json(const json& j, TrainConfig t) {
  t.warmup_epochs = j.value("warmup_epochs", t.warmup_epochs);
  t.cluster_epochs = j.value("cluster_epochs", t.cluster_epochs);
  t.optimizer.learning_rate = j.value("learning_rate", t.optimizer.learning_rate);
  t.optimizer.weight_decay = j.value("weight_decay", t.optimizer.weight_decay);
  t.optimizer.beta1 = j.value("adam_beta1", t.optimizer.beta1);
  t.optimizer.beta2 = j.value("adam_beta2", t.optimizer.beta2);
  t.optimizer.epsilon = j.value("adam_epsilon", t.optimizer.epsilon);
  t.batches.supervised_batch_size = j.value("supervised_batch", t.batches.supervised_batch_size);
  t.batches.unsupervised_batch_size = j.value("unsupervised_batch", t.batches.unsupervised_batch_size);
  t.batches.cluster_batch_size = j.value("cluster_batch", t.batches.cluster_batch_size);
  t.tau = j.value("tau", t.tau);
  t.sinkhorn.epsilon = j.value("sinkhorn_epsilon", t.sinkhorn.epsilon);
  t.sinkhorn.iterations = j.value("sinkhorn_iters", t.sinkhorn.iterations);
  t.ablation_no_sup_cluster = j.value("ablation_no_sup_cluster", t.ablation_no_sup_cluster);
  t.kmeans_max_iters = j.value("kmeans_max_iters", t.kmeans_max_iters);
  return t;
}

inline json run_config_to_json(const RunConfig& c) {
  json j;
  if (c.synth) {
    json s = {{"preset", c.synth->preset}, {"spec", blob_spec_to_json(c.synth->spec)}};
    s["seed"] = c.synth->seed ? json(*c.synth->seed) : json(nullptr);
    j["synth"] = s;
  } else {
    j["synth"] = nullptr;
  }
  j["corpus"] = c.corpus_path;
  j["test_corpus"] = c.test_corpus_path;
  j["num_intents"] = c.num_intents ? json(*c.num_intents) : json(nullptr);
  j["test_fraction"] = c.test_fraction;
  j["known_fraction"] = c.known_fraction;
  j["labeled_ratio"] = c.labeled_ratio;
  auto enc = encoder_config_to_json(c.encoder);
  enc.erase("input_dim");
  j["encoder"] = enc;
  j["standardize_inputs"] = c.standardize_inputs;
  j["train"] = train_config_to_json(c.train);
  j["seed"] = c.seed;
  j["out"] = c.out_dir;
  return j;
}

// Overlays the fields present in `j` onto `c`. A run manifest is accepted
// too: its "config" member is used.
inline RunConfig run_config_from_json(const json& in, RunConfig c = {}) {
  const json& j = in.contains("config") && in["config"].is_object() ? in["config"] : in;
  require(j.is_object(), ErrorKind::invalid_spec, "config must be a JSON object");
  if (j.contains("synth")) {
    if (j["synth"].is_null()) {
      c.synth.reset();
    } else if (j["synth"].is_string()) {
      c.synth = SynthSource{j["synth"].get<std::string>(), synth_preset(j["synth"].get<std::string>()), std::nullopt};
    } else {
      const auto& s = j["synth"];
      SynthSource src;
      src.preset = s.value("preset", std::string("default"));
      src.spec = synth_preset(src.preset);
      if (s.contains("spec")) src.spec = blob_spec_from_json(s["spec"], src.spec);
      if (s.contains("seed") && !s["seed"].is_null()) src.seed = s["seed"].get<std::uint64_t>();
      c.synth = src;
    }
  }
  c.corpus_path = j.value("corpus", c.corpus_path);
  c.test_corpus_path = j.value("test_corpus", c.test_corpus_path);
  if (j.contains("num_intents")) {
    c.num_intents = j["num_intents"].is_null() ? std::nullopt : std::optional<int>(j["num_intents"].get<int>());
  }
  c.test_fraction = j.value("test_fraction", c.test_fraction);
  c.known_fraction = j.value("known_fraction", c.known_fraction);
  c.labeled_ratio = j.value("labeled_ratio", c.labeled_ratio);
  if (j.contains("encoder")) {
    const auto& e = j["encoder"];
    const auto input_dim = c.encoder.input_dim;
    c.encoder = encoder_config_from_json(e, c.encoder);
    c.encoder.input_dim = input_dim;
  }
  c.standardize_inputs = j.value("standardize_inputs", c.standardize_inputs);
  if (j.contains("train")) c.train = train_config_from_json(j["train"], c.train);
  c.seed = j.value("seed", c.seed);
  c.out_dir = j.value("out", c.out_dir);
  return c;
}

inline RunConfig load_run_config(const std::string& path, RunConfig base = {}) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::invalid_spec, "config '" + path + "': " + e.what());
  }
  return run_config_from_json(j, std::move(base));
}

inline json metrics_to_json(const MetricReport& m) { return {{"acc", m.acc}, {"ari", m.ari}, {"nmi", m.nmi}}; }

inline std::string fixed4(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// One end-to-end run: split -> warm-up -> head init -> clustering -> evaluate.

struct RunResult {
  json config;
  std::string dataset_fingerprint;
  std::string test_fingerprint;
  int known_intents = 0;
  int num_intents = 0;
  std::size_t labeled_count = 0;
  std::size_t unlabeled_count = 0;
  std::size_t test_count = 0;
  MetricReport metrics;
  MetricReport head_argmax;
  MetricReport raw_feature_baseline;
  MetricReport encoder_init_baseline;
  double labeled_accuracy_after_warmup = 0.0;
  double labeled_accuracy_final = 0.0;
  std::map<std::string, double> stage_seconds;
  LossHistory history;
  std::size_t warnings = 0;
  Checkpoint warmup_checkpoint;
  Checkpoint cluster_checkpoint;
  std::vector<int> known_original_intents;
};

struct LoadedData {
  Corpus train;
  Corpus test;
};

inline LoadedData load_data(const RunConfig& c) {
  LoadedData d;
  if (c.synth) {
    BlobSpec spec = c.synth->spec;
    spec.seed = c.synth->seed.value_or(derive_seed(c.seed, "synth"));
    auto split = holdout_split(generate(spec), c.test_fraction, derive_seed(c.seed, "holdout"));
    d.train = std::move(split.train);
    d.test = std::move(split.test);
    return d;
  }
  require(!c.corpus_path.empty(), ErrorKind::usage, "no corpus: set a corpus path or a synth preset");
  Corpus full = read_corpus(c.corpus_path, c.num_intents);
  if (c.test_corpus_path.empty()) {
    auto split = holdout_split(full, c.test_fraction, derive_seed(c.seed, "holdout"));
    d.train = std::move(split.train);
    d.test = std::move(split.test);
  } else {
    d.train = std::move(full);
    d.test = read_corpus(c.test_corpus_path, d.train.num_intents);
  }
  return d;
}

inline RunResult run_experiment(RunConfig c) {
  using clock = std::chrono::steady_clock;
  auto seconds_since = [](clock::time_point t0) {
    return std::chrono::duration<double>(clock::now() - t0).count();
  };
  RunResult r;
  auto t0 = clock::now();
  const auto data = load_data(c);
  const std::size_t dim = validate(data.train);
  require(dim >= 1, ErrorKind::insufficient_data, "training corpus is empty");
  c.encoder.input_dim = dim;
  r.config = run_config_to_json(c);
  r.dataset_fingerprint = corpus_fingerprint(data.train);
  r.test_fingerprint = corpus_fingerprint(data.test);

  const auto split = split_corpus(data.train, {c.known_fraction, c.labeled_ratio, derive_seed(c.seed, "split")});
  r.known_intents = split.known_intents();
  r.num_intents = data.train.num_intents;
  r.labeled_count = split.train.labeled.size();
  r.unlabeled_count = split.train.unlabeled.size();
  r.known_original_intents = split.known_original_intents;
  const int g = r.num_intents;
  const std::uint64_t eval_seed = derive_seed(c.seed, "kmeans");

  TrainConfig tc = c.train;
  tc.seed = derive_seed(c.seed, "train");
  TrainState state = init_state(c.encoder, r.known_intents, g, tc.seed);
  if (c.standardize_inputs) standardize_inputs(state, split.train);

  const auto test = pool_labeled(data.test, dim);
  r.test_count = static_cast<std::size_t>(test.x.rows());
  r.raw_feature_baseline = evaluate_representations(test.x, test.truth, g, eval_seed, tc.kmeans_max_iters).kmeans;
  r.encoder_init_baseline = evaluate(state, data.test, g, eval_seed, tc.kmeans_max_iters).kmeans;
  r.stage_seconds["setup"] = seconds_since(t0);

  t0 = clock::now();
  warmup_stage(state, tc, split.train);
  r.labeled_accuracy_after_warmup = labeled_accuracy(state, split.train);
  r.warmup_checkpoint = checkpoint_of(state, "warmup");
  r.stage_seconds["warmup"] = seconds_since(t0);

  t0 = clock::now();
  init_cluster_head(state, split.train, g, tc.seed, tc.kmeans_max_iters);
  r.stage_seconds["head_init"] = seconds_since(t0);

  t0 = clock::now();
  clustering_stage(state, tc, split.train);
  r.labeled_accuracy_final = labeled_accuracy(state, split.train);
  r.cluster_checkpoint = checkpoint_of(state, "cluster");
  r.stage_seconds["clustering"] = seconds_since(t0);

  t0 = clock::now();
  const auto eval = evaluate(state, data.test, g, eval_seed, tc.kmeans_max_iters);
  r.metrics = eval.kmeans;
  r.head_argmax = *eval.head_argmax;
  r.stage_seconds["evaluate"] = seconds_since(t0);
  r.history = state.history;
  r.warnings = state.warnings;
  return r;
}

inline json manifest_of(const RunResult& r) {
  json j;
  j["config"] = r.config;
  j["dataset_fingerprint"] = r.dataset_fingerprint;
  j["test_fingerprint"] = r.test_fingerprint;
  j["known_intents"] = r.known_intents;
  j["num_intents"] = r.num_intents;
  j["known_original_intents"] = r.known_original_intents;
  j["counts"] = {{"labeled", r.labeled_count}, {"unlabeled", r.unlabeled_count}, {"test", r.test_count}};
  j["stage_seconds"] = r.stage_seconds;
  j["loss_history"] = r.history;
  j["warnings"] = r.warnings;
  j["metrics"] = metrics_to_json(r.metrics);
  j["head_argmax_metrics"] = metrics_to_json(r.head_argmax);
  j["baselines"] = {{"raw_features_kmeans", metrics_to_json(r.raw_feature_baseline)},
                    {"encoder_init_kmeans", metrics_to_json(r.encoder_init_baseline)}};
  j["labeled_accuracy"] = {{"after_warmup", r.labeled_accuracy_after_warmup}, {"final", r.labeled_accuracy_final}};
  return j;
}

inline std::string report_table(const RunResult& r) {
  std::ostringstream os;
  os << "| Known | Method | ACC | ARI | NMI |\n|---|---|---|---|---|\n";
  const auto frac = fixed4(r.config.value("known_fraction", 0.0));
  auto row = [&](const std::string& name, const MetricReport& m) {
    os << "| " << frac << " | " << name << " | " << fixed4(m.acc) << " | " << fixed4(m.ari) << " | " << fixed4(m.nmi) << " |\n";
  };
  row(r.config["train"].value("ablation_no_sup_cluster", false) ? "DCSC (no sup. clustering)" : "DCSC", r.metrics);
  row("DCSC head argmax", r.head_argmax);
  row("K-Means++ raw features", r.raw_feature_baseline);
  row("K-Means++ untrained encoder", r.encoder_init_baseline);
  return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write '" + path.string() + "'");
  out << text;
  require(static_cast<bool>(out), ErrorKind::io, "write failed for '" + path.string() + "'");
}

inline void write_run_outputs(const RunResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "metrics.json", metrics_to_json(r.metrics).dump(2) + "\n");
  write_text(dir / "manifest.json", manifest_of(r).dump(2) + "\n");
  write_text(dir / "report.md", report_table(r));
  save_checkpoint((dir / "checkpoint_warmup.json").string(), r.warmup_checkpoint);
  save_checkpoint((dir / "checkpoint_cluster.json").string(), r.cluster_checkpoint);
}

// ---------------------------------------------------------------------------
// Cluster assignment export

struct AssignmentRecord {
  std::string id;
  int cluster = 0;
  bool known_intent = false;
};

inline std::vector<AssignmentRecord> assign_clusters(const Checkpoint& ckpt, const Corpus& corpus) {
  require(ckpt.head.has_value(), ErrorKind::usage, "checkpoint has no cluster head (use a clustering-stage checkpoint)");
  std::vector<AssignmentRecord> out;
  if (corpus.samples.empty()) return out;
  const std::size_t dim = validate(corpus);
  require(dim == ckpt.encoder.input_dim(), ErrorKind::shape_mismatch,
          "corpus dimension " + std::to_string(dim) + " does not match checkpoint input dimension " +
              std::to_string(ckpt.encoder.input_dim()));
  const Matrix x = pooled_matrix(corpus.samples.size(), dim,
                                 [&](std::size_t i) -> const Features& { return corpus.samples[i].features; });
  const Matrix logits = encode(ckpt.encoder, x) * ckpt.head->prototypes.transpose();
  const auto hard = harden(logits).b;
  for (std::size_t i = 0; i < hard.size(); ++i) {
    out.push_back({corpus.samples[i].id, hard[i], hard[i] < ckpt.head->known_count});
  }
  return out;
}

inline void write_assignments(std::ostream& out, const std::vector<AssignmentRecord>& records) {
  for (const auto& r : records) {
    out << json{{"id", r.id}, {"cluster", r.cluster}, {"known_intent_flag", r.known_intent}}.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Sweep over known fractions and seeds, optionally paired with the ablation.

struct SweepConfig {
  RunConfig base;
  std::vector<double> known_fractions;
  std::vector<std::uint64_t> seeds{0};
  bool ablation = false;
};

inline SweepConfig sweep_config_from_json(const json& j, SweepConfig s = {}) {
  s.base = run_config_from_json(j, s.base);
  if (j.contains("sweep")) {
    const auto& w = j["sweep"];
    s.known_fractions = w.value("known_fractions", s.known_fractions);
    s.seeds = w.value("seeds", s.seeds);
    s.ablation = w.value("ablation", s.ablation);
  }
  return s;
}

struct SweepCell {
  double known_fraction = 0.0;
  std::uint64_t seed = 0;
  bool ablation = false;
  std::string dir;
  std::optional<RunResult> result;
  std::string error;
};

inline std::string cell_name(const SweepCell& c) {
  std::ostringstream os;
  os << "kf" << fixed4(c.known_fraction) << "_seed" << c.seed << (c.ablation ? "_ablation" : "");
  return os.str();
}

inline std::size_t sweep_threads() {
  if (const char* v = std::getenv("DCSC_THREADS")) {
    const long n = std::strtol(v, nullptr, 10);
    if (n >= 1) return static_cast<std::size_t>(n);
  }
  return 1;
}

struct SweepResult {
  std::vector<SweepCell> cells;
  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto& c : cells) n += !c.result.has_value();
    return n;
  }
};

inline SweepResult run_sweep(const SweepConfig& cfg, const std::filesystem::path& out_dir) {
  require(!cfg.known_fractions.empty(), ErrorKind::usage, "sweep needs at least one known fraction");
  require(!cfg.seeds.empty(), ErrorKind::usage, "sweep needs at least one seed");
  SweepResult res;
  for (double f : cfg.known_fractions) {
    for (auto seed : cfg.seeds) {
      for (int abl = 0; abl <= (cfg.ablation ? 1 : 0); ++abl) {
        SweepCell c;
        c.known_fraction = f;
        c.seed = seed;
        c.ablation = abl == 1;
        c.dir = (out_dir / "cells" / cell_name(c)).string();
        res.cells.push_back(std::move(c));
      }
    }
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < res.cells.size(); i = next++) {
      auto& cell = res.cells[i];
      RunConfig rc = cfg.base;
      rc.known_fraction = cell.known_fraction;
      rc.seed = cell.seed;
      rc.train.ablation_no_sup_cluster = cell.ablation;
      rc.out_dir = cell.dir;
      try {
        auto r = run_experiment(rc);
        write_run_outputs(r, cell.dir);
        cell.result = std::move(r);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  const std::size_t n_threads = std::min(sweep_threads(), res.cells.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return res;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

inline MeanStd mean_std(const std::vector<double>& v) {
  MeanStd m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.std += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(m.std / static_cast<double>(v.size()));
  return m;
}

inline std::string sweep_table(const SweepConfig& cfg, const SweepResult& res) {
  std::ostringstream os;
  os << "| Known | Method | ACC | ARI | NMI | Runs |\n|---|---|---|---|---|---|\n";
  auto cellfmt = [](const std::vector<double>& v) {
    const auto m = mean_std(v);
    return fixed4(m.mean) + " ± " + fixed4(m.std);
  };
  for (double f : cfg.known_fractions) {
    struct Acc {
      std::vector<double> acc, ari, nmi;
      void add(const MetricReport& m) {
        acc.push_back(m.acc);
        ari.push_back(m.ari);
        nmi.push_back(m.nmi);
      }
    } raw, full, abl;
    for (const auto& c : res.cells) {
      if (c.known_fraction != f || !c.result) continue;
      if (c.ablation) {
        abl.add(c.result->metrics);
      } else {
        full.add(c.result->metrics);
        raw.add(c.result->raw_feature_baseline);
      }
    }
    auto row = [&](const std::string& name, const Acc& a) {
      os << "| " << fixed4(f) << " | " << name << " | " << cellfmt(a.acc) << " | " << cellfmt(a.ari) << " | "
         << cellfmt(a.nmi) << " | " << a.acc.size() << " |\n";
    };
    row("K-Means++ raw features", raw);
    row("DCSC", full);
    if (cfg.ablation) row("DCSC†", abl);
  }
  return os.str();
}

inline json sweep_summary(const SweepConfig& cfg, const SweepResult& res) {
  json cells = json::array();
  for (const auto& c : res.cells) {
    json j = {{"known_fraction", c.known_fraction}, {"seed", c.seed}, {"ablation", c.ablation}, {"dir", c.dir}};
    if (c.result) {
      j["metrics"] = metrics_to_json(c.result->metrics);
      j["raw_features_kmeans"] = metrics_to_json(c.result->raw_feature_baseline);
    } else {
      j["error"] = c.error;
    }
    cells.push_back(j);
  }
  json base = run_config_to_json(cfg.base);
  base["sweep"] = {{"known_fractions", cfg.known_fractions}, {"seeds", cfg.seeds}, {"ablation", cfg.ablation}};
  return {{"config", base}, {"cells", cells}, {"failures", res.failures()}};
}

inline void write_sweep_outputs(const SweepConfig& cfg, const SweepResult& res, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "sweep.json", sweep_summary(cfg, res).dump(2) + "\n");
  write_text(dir / "sweep_report.md", sweep_table(cfg, res));
}

}  // namespace dcsc
