#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "dcsc/dcsc.hpp"

namespace {

using dcsc::ErrorKind;

int report_error(ErrorKind kind, const std::string& message) {
  std::cerr << dcsc::json{{"error", {{"kind", dcsc::to_string(kind)}, {"message", message}}}}.dump() << '\n';
  return kind == ErrorKind::usage ? 2 : 1;
}

// Flags shared by `run` and `sweep`. Unset flags leave the config untouched.
struct Overrides {
  std::string config;
  std::string synth;
  std::string corpus;
  std::string test_corpus;
  std::optional<double> known_fraction;
  std::optional<double> labeled_ratio;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs_warmup;
  std::optional<int> epochs_cluster;
  std::optional<double> tau;
  std::optional<double> sinkhorn_eps;
  std::optional<int> sinkhorn_iters;
  std::optional<double> lr;
  bool ablate = false;
  std::string out;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON config file (a run manifest also works)");
    app->add_option("--synth", synth, "synthetic preset: default, easy, tiny, zero-noise, tokens, hard");
    app->add_option("--corpus", corpus, "training corpus (.jsonl or .csv)");
    app->add_option("--test-corpus", test_corpus, "separate test corpus; otherwise a holdout split is used");
    app->add_option("--known-fraction", known_fraction);
    app->add_option("--labeled-ratio", labeled_ratio);
    app->add_option("--seed", seed);
    app->add_option("--epochs-warmup", epochs_warmup);
    app->add_option("--epochs-cluster", epochs_cluster);
    app->add_option("--tau", tau);
    app->add_option("--sinkhorn-eps", sinkhorn_eps);
    app->add_option("--sinkhorn-iters", sinkhorn_iters);
    app->add_option("--lr", lr);
    app->add_flag("--ablate-sup-cluster", ablate, "drop supervised steps from the clustering stage");
    app->add_option("--out", out, "output directory");
  }

  dcsc::RunConfig resolve() const {
    dcsc::RunConfig c;
    if (!config.empty()) c = dcsc::load_run_config(config);
    apply(c);
    return c;
  }

  void apply(dcsc::RunConfig& c) const {
    if (!synth.empty()) {
      c.synth = dcsc::SynthSource{synth, dcsc::synth_preset(synth), std::nullopt};
      c.corpus_path.clear();
    }
    if (!corpus.empty()) {
      c.corpus_path = corpus;
      c.synth.reset();
    }
    if (!test_corpus.empty()) c.test_corpus_path = test_corpus;
    if (known_fraction) c.known_fraction = *known_fraction;
    if (labeled_ratio) c.labeled_ratio = *labeled_ratio;
    if (seed) c.seed = *seed;
    if (epochs_warmup) c.train.warmup_epochs = *epochs_warmup;
    if (epochs_cluster) c.train.cluster_epochs = *epochs_cluster;
    if (tau) c.train.tau = *tau;
    if (sinkhorn_eps) c.train.sinkhorn.epsilon = *sinkhorn_eps;
    if (sinkhorn_iters) c.train.sinkhorn.iterations = *sinkhorn_iters;
    if (lr) c.train.optimizer.learning_rate = *lr;
    if (ablate) c.train.ablation_no_sup_cluster = true;
    if (!out.empty()) c.out_dir = out;
  }
};

int cmd_run(const Overrides& o) {
  const auto cfg = o.resolve();
  const auto result = dcsc::run_experiment(cfg);
  dcsc::write_run_outputs(result, cfg.out_dir);
  std::cout << dcsc::report_table(result);
  return 0;
}

int cmd_sweep(const Overrides& o, const std::vector<double>& fractions, const std::vector<std::uint64_t>& seeds,
              bool ablation) {
  dcsc::SweepConfig cfg;
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    dcsc::require(static_cast<bool>(in), ErrorKind::io, "cannot open config '" + o.config + "'");
    cfg = dcsc::sweep_config_from_json(dcsc::json::parse(in));
  }
  o.apply(cfg.base);
  if (!fractions.empty()) cfg.known_fractions = fractions;
  if (!seeds.empty()) cfg.seeds = seeds;
  if (ablation) cfg.ablation = true;
  const auto res = dcsc::run_sweep(cfg, cfg.base.out_dir);
  dcsc::write_sweep_outputs(cfg, res, cfg.base.out_dir);
  std::cout << dcsc::sweep_table(cfg, res);
  for (const auto& c : res.cells) {
    if (!c.result) std::cerr << "cell " << dcsc::cell_name(c) << " failed: " << c.error << '\n';
  }
  return res.failures() == 0 ? 0 : 1;
}

int cmd_assign(const std::string& checkpoint, const std::string& corpus, const std::string& out) {
  const auto ckpt = dcsc::load_checkpoint(checkpoint);
  // Labels are irrelevant here; any non-negative label is accepted.
  const auto data = dcsc::read_corpus(corpus, std::numeric_limits<int>::max());
  const auto records = dcsc::assign_clusters(ckpt, data);
  if (out.empty() || out == "-") {
    dcsc::write_assignments(std::cout, records);
  } else {
    std::ofstream f(out);
    dcsc::require(static_cast<bool>(f), ErrorKind::io, "cannot write '" + out + "'");
    dcsc::write_assignments(f, records);
  }
  return 0;
}

int cmd_synth(const std::string& preset, std::uint64_t seed, const std::string& out) {
  auto spec = dcsc::synth_preset(preset);
  spec.seed = seed;
  dcsc::write_jsonl(out, dcsc::generate(spec));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-supervised deep clustering for new intent discovery"};
  app.require_subcommand(1);

  Overrides run_opts;
  auto* run = app.add_subcommand("run", "train and evaluate one configuration");
  run_opts.attach(run);

  Overrides sweep_opts;
  std::vector<double> fractions;
  std::vector<std::uint64_t> sweep_seeds;
  bool sweep_ablation = false;
  auto* sweep = app.add_subcommand("sweep", "grid over known fractions and seeds");
  sweep_opts.attach(sweep);
  sweep->add_option("--fractions", fractions, "known fractions, e.g. 0.25 0.5 0.75");
  sweep->add_option("--seeds", sweep_seeds);
  sweep->add_flag("--with-ablation", sweep_ablation, "pair every cell with the ablated variant");

  std::string ckpt, assign_corpus, assign_out;
  auto* assign = app.add_subcommand("assign", "export cluster assignments from a clustering checkpoint");
  assign->add_option("--checkpoint", ckpt)->required();
  assign->add_option("--corpus", assign_corpus)->required();
  assign->add_option("--out", assign_out, "JSONL output path (stdout if omitted)");

  std::string synth_preset = "default", synth_out;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "write a synthetic corpus as JSONL");
  synth->add_option("--preset", synth_preset);
  synth->add_option("--seed", synth_seed);
  synth->add_option("--out", synth_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(ErrorKind::usage, e.what());
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*sweep) return cmd_sweep(sweep_opts, fractions, sweep_seeds, sweep_ablation);
    if (*assign) return cmd_assign(ckpt, assign_corpus, assign_out);
    if (*synth) return cmd_synth(synth_preset, synth_seed, synth_out);
  } catch (const dcsc::Error& e) {
    return report_error(e.kind(), e.what());
  } catch (const dcsc::json::exception& e) {
    return report_error(ErrorKind::invalid_spec, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error(ErrorKind::io, e.what());
  }
  return 0;
}
