// Runs the acceptance criteria end to end and prints one PASS/FAIL line per
// criterion. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "dcsc/dcsc.hpp"
#include "oracles.hpp"

using namespace dcsc;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int random_in(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1))); }

// ---------------------------------------------------------------------------

Verdict gradients() {
  Rng rng(20240601);
  double worst = 0.0;
  std::string worst_name;
  auto note = [&](const std::string& name, double e) {
    if (e > worst) {
      worst = e;
      worst_name = name;
    }
  };
  for (int inst = 0; inst < 20; ++inst) {
    const int n = random_in(rng, 2, 8);
    const int g = random_in(rng, 2, 6);
    const int k = random_in(rng, 1, g);
    const int d = random_in(rng, 2, 8);
    const double tau = 0.1 + 0.9 * rng.uniform();
    Matrix z = oracle::random_unit_rows(rng, n, d);
    Matrix zp = oracle::random_unit_rows(rng, n, d);
    Matrix w = oracle::random_matrix(rng, k, d);
    Matrix protos = oracle::random_unit_rows(rng, g, d);
    const Labels y = oracle::random_labels(rng, static_cast<std::size_t>(n), k);
    const Labels pseudo = oracle::random_labels(rng, 2 * static_cast<std::size_t>(n), g);
    const Matrix a = oracle::random_distributions(rng, n, g);
    const Matrix ap = oracle::random_distributions(rng, n, g);
    auto views = [&] { return ViewPair{z, zp}; };

    using Fn = std::function<LossOutput(const ViewPair&)>;
    const std::vector<std::tuple<std::string, Fn, Matrix*>> terms = {
        {"ce", [&](const ViewPair& v) { return cross_entropy(v, y, w); }, &w},
        {"sc", [&](const ViewPair& v) { return supervised_contrastive(v, duplicate_labels(y), tau); }, nullptr},
        {"unsup", [&](const ViewPair& v) { return unsupervised_contrastive(v, tau); }, nullptr},
        {"swapped", [&](const ViewPair& v) { return sinkhorn_swapped_loss(v, protos, a, ap); }, &protos},
        {"pseudo", [&](const ViewPair& v) { return pseudo_supervised_contrastive(v, pseudo, tau); }, nullptr},
        {"ce+sc", [&](const ViewPair& v) { return supervised_objective(v, y, w, tau); }, &w},
        {"swapped+pseudo",
         [&](const ViewPair& v) {
           return compose(sinkhorn_swapped_loss(v, protos, a, ap), pseudo_supervised_contrastive(v, pseudo, tau));
         },
         &protos},
    };
    for (const auto& [name, fn, weights] : terms) {
      const auto out = fn(views());
      auto f = [&, &fn = fn] { return fn(views()).value; };
      note(name + " dz", oracle::fd_check(z, out.grad_z, f));
      note(name + " dz'", oracle::fd_check(zp, out.grad_z_prime, f));
      if (weights) note(name + " dW", oracle::fd_check(*weights, *out.grad_weights, f));
    }

    // Whole objectives through the encoder, with dropout masks held fixed.
    EncoderConfig cfg;
    cfg.input_dim = static_cast<std::size_t>(random_in(rng, 2, 8));
    cfg.hidden_dims = {static_cast<std::size_t>(random_in(rng, 2, 8))};
    cfg.output_dim = static_cast<std::size_t>(d);
    cfg.dropout = 0.2;
    cfg.hidden_activation = inst % 2 ? Activation::tanh : Activation::identity;
    cfg.normalize_output = inst % 3 != 0;
    auto p = init_encoder(cfg, rng.next_u64());
    const Matrix x = oracle::random_matrix(rng, n, static_cast<Eigen::Index>(cfg.input_dim));
    for (const auto& [name, fn, weights] : terms) {
      const auto fwd = forward_two_views(p, x, 11, 12);
      const auto out = fn(fwd.views);
      const auto grads = backward_two_views(p, fwd, out.grad_z, out.grad_z_prime);
      auto f = [&, &fn = fn] { return fn(forward_two_views(p, x, 11, 12).views).value; };
      for (std::size_t l = 0; l < p.layers.size(); ++l) {
        note(name + " encoder W", oracle::fd_check(p.layers[l].weight, grads.layers[l].weight, f));
        note(name + " encoder b", oracle::fd_check(p.layers[l].bias, grads.layers[l].bias, f));
      }
    }
  }
  std::ostringstream os;
  os << "worst relative error " << worst << " (" << worst_name << ") over 20 instances";
  return {worst <= 1e-4, os.str()};
}

// ---------------------------------------------------------------------------

Verdict assignment() {
  Rng rng(7);
  int hungarian_bad = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int s = random_in(rng, 1, 6);
    const int r = random_in(rng, 1, s);
    Matrix c(r, s);
    const bool integral = trial % 2 == 0;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      c.data()[i] = integral ? static_cast<double>(rng.below(5)) : rng.normal();
    }
    const auto got = hungarian(c);
    const auto ref = oracle::brute_force_assignment(c);
    double cost = 0.0;
    for (int i = 0; i < r; ++i) cost += c(i, got.column_of_row[i]);
    if (got.column_of_row != ref.column_of_row || cost != ref.cost) ++hungarian_bad;
  }

  double worst_row = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    SinkhornOptions opt;
    opt.epsilon = 0.01 + rng.uniform();
    opt.iterations = random_in(rng, 1, 50);
    const auto soft = sinkhorn_assign(oracle::random_matrix(rng, random_in(rng, 1, 40), random_in(rng, 1, 10), 3.0), opt);
    for (Eigen::Index i = 0; i < soft.a.rows(); ++i) worst_row = std::max(worst_row, std::abs(soft.a.row(i).sum() - 1.0));
  }

  // Plain kernel exp(Q) on standard normal logits. The training epsilon is
  // reported alongside; its sharper kernel converges more slowly.
  auto tv_run = [&](double epsilon, int& over) {
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const int g = random_in(rng, 2, 10);
      SinkhornOptions opt;
      opt.epsilon = epsilon;
      opt.iterations = 200;
      opt.record_marginals = true;
      const double tv = sinkhorn_assign(oracle::random_matrix(rng, 4 * g, g), opt).column_tv.back();
      worst = std::max(worst, tv);
      over += tv > 1e-3;
    }
    return worst;
  };
  int over = 0, over_train = 0;
  const double worst_tv = tv_run(1.0, over);
  const double worst_train = tv_run(kDefaultSinkhornEpsilon, over_train);
  std::ostringstream os;
  os << "hungarian mismatches " << hungarian_bad << "/200, worst row-sum error " << worst_row
     << ", worst column TV after 200 iterations " << worst_tv << " (eps 1); at eps " << kDefaultSinkhornEpsilon
     << " " << over_train << "/200 above 1e-3, worst " << worst_train;
  return {hungarian_bad == 0 && worst_row <= 1e-9 && worst_tv <= 1e-3, os.str()};
}

// ---------------------------------------------------------------------------

Verdict metrics() {
  Rng rng(3);
  int bad = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(11);
    const auto pred = oracle::random_labels(rng, n, random_in(rng, 1, 5));
    const auto truth = oracle::random_labels(rng, n, random_in(rng, 1, 5));
    bad += clustering_accuracy(pred, truth) != oracle::accuracy(pred, truth);
    bad += adjusted_rand_index(pred, truth) != oracle::ari(pred, truth);
    bad += normalized_mutual_information(pred, truth) != oracle::nmi(pred, truth);
  }
  const double worked = clustering_accuracy({0, 1, 1, 1}, {0, 0, 1, 1});
  std::ostringstream os;
  os << "oracle mismatches " << bad << "/600, worked case ACC " << worked;
  return {bad == 0 && worked == 0.75, os.str()};
}

// ---------------------------------------------------------------------------

Verdict fixed_points() {
  Rng rng(5);
  bool ok = true;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = random_in(rng, 1, 8);
    const ViewPair one{oracle::random_unit_rows(rng, 1, d), oracle::random_unit_rows(rng, 1, d)};
    ok = ok && supervised_contrastive(one, {0, 0}, 0.5).value == 0.0;
    ok = ok && unsupervised_contrastive(one, 0.5).value == 0.0;

    const int n = random_in(rng, 1, 8);
    const int k = random_in(rng, 1, 6);
    const ViewPair v{oracle::random_matrix(rng, n, d), oracle::random_matrix(rng, n, d)};
    const double ce = cross_entropy(v, oracle::random_labels(rng, static_cast<std::size_t>(n), k), Matrix::Zero(k, d)).value;
    worst = std::max(worst, std::abs(ce - std::log(static_cast<double>(k))));

    const int g = random_in(rng, 1, 6);
    const Matrix q = Matrix::Constant(n, g, rng.normal());
    const auto sw = swapped_cross_entropy(q, q, oracle::random_distributions(rng, n, g), oracle::random_distributions(rng, n, g));
    worst = std::max(worst, std::abs(sw.value - std::log(static_cast<double>(g))));
  }
  std::ostringstream os;
  os << "N=1 contrastive exactly zero: " << (ok ? "yes" : "no") << ", worst |loss - ln K| or |loss - ln G| " << worst;
  return {ok && worst <= 1e-12, os.str()};
}

// ---------------------------------------------------------------------------

RunConfig desk_config() { return load_run_config(std::string(DCSC_CONFIG_DIR) + "/desk.json"); }

Verdict end_to_end() {
  int wins = 0;
  double raw_sum = 0.0, final_sum = 0.0;
  double slowest = 0.0;
  std::ostringstream per_seed;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto c = desk_config();
    c.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_experiment(c);
    slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    raw_sum += r.raw_feature_baseline.acc;
    final_sum += r.metrics.acc;
    const bool win = r.metrics.acc >= r.raw_feature_baseline.acc + 0.05;
    wins += win;
    per_seed << " " << seed << ":" << fixed4(r.raw_feature_baseline.acc) << "->" << fixed4(r.metrics.acc);
  }
  const double raw_mean = raw_sum / 10.0;
  const bool raw_ok = raw_mean >= 0.55 && raw_mean <= 0.75;
  std::ostringstream os;
  os << wins << "/10 seeds gain >= 5 ACC points; raw mean " << fixed4(raw_mean) << " (band "
     << (raw_ok ? "ok" : "missed") << "), DCSC mean " << fixed4(final_sum / 10.0) << ", slowest run " << slowest
     << " s; raw->DCSC" << per_seed.str();
  return {wins >= 8 && raw_ok && slowest < 300.0, os.str()};
}

Verdict ablation() {
  int wins = 0;
  double full_sum = 0.0, abl_sum = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto c = desk_config();
    c.seed = seed;
    c.known_fraction = 0.75;
    const double full = run_experiment(c).metrics.acc;
    c.train.ablation_no_sup_cluster = true;
    const double abl = run_experiment(c).metrics.acc;
    wins += full >= abl;
    full_sum += full;
    abl_sum += abl;
  }
  std::ostringstream os;
  os << wins << "/10 seeds full >= ablated; mean full " << fixed4(full_sum / 10.0) << ", mean ablated "
     << fixed4(abl_sum / 10.0);
  return {wins >= 8, os.str()};
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Verdict determinism() {
  const auto dir = fs::temp_directory_path() / "dcsc_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string config = std::string(DCSC_CONFIG_DIR) + "/desk.json";
  for (const char* name : {"a", "b"}) {
    const std::string cmd = std::string(DCSC_CLI_PATH) + " run --config " + config + " --seed 1 --out " +
                            (dir / name).string() + " > /dev/null 2> " + (dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, "CLI run failed: " + slurp(dir / "stderr.txt")};
  }
  const auto a = slurp(dir / "a" / "metrics.json");
  const auto b = slurp(dir / "b" / "metrics.json");
  fs::remove_all(dir);
  return {!a.empty() && a == b, "metrics.json of two runs " + std::string(a == b ? "identical" : "differ") + " (" +
                                    std::to_string(a.size()) + " bytes)"};
}

// ---------------------------------------------------------------------------

Verdict weight_sharing() {
  auto spec = synth_preset("tiny");
  spec.seed = 2;
  const auto split = split_corpus(generate(spec), {0.5, 0.25, 2});
  EncoderConfig enc;
  enc.input_dim = static_cast<std::size_t>(spec.input_dim);
  enc.hidden_dims = {16};
  enc.output_dim = 8;
  TrainConfig tc;
  tc.warmup_epochs = 1;
  tc.cluster_epochs = 1;
  tc.optimizer.learning_rate = 1e-3;
  tc.batches.supervised_batch_size = 16;
  tc.batches.unsupervised_batch_size = 32;
  tc.batches.cluster_batch_size = 32;
  auto s = init_state(enc, split.known_intents(), spec.num_clusters, 1);
  warmup_stage(s, tc, split.train);
  init_cluster_head(s, split.train, spec.num_clusters, 1);
  clustering_stage(s, tc, split.train);

  const int k = s.known_intents;
  bool ok = s.head && s.warmup_classifier.size() == 0 && s.classifier_weights().rows() == k;
  ok = ok && s.classifier_weights().data() == s.head->prototypes.data();
  // Mutate every shared entry through one name and read it through the other.
  for (int r = 0; ok && r < k; ++r) {
    for (Eigen::Index c = 0; c < s.head->prototypes.cols(); ++c) {
      const double v = 1000.0 + r * 31 + static_cast<double>(c);
      s.classifier_weights()(r, c) = v;
      ok = ok && s.head->prototypes(r, c) == v;
      s.head->prototypes(r, c) = -v;
      ok = ok && s.classifier_weights()(r, c) == -v && s.classifier_snapshot()(r, c) == -v;
    }
  }
  // The supervised loss must see the mutation.
  const Matrix x = pool_training(split.train, enc.input_dim).full.topRows(4);
  Labels y;
  for (int i = 0; i < 4; ++i) y.push_back(split.train.labeled[i].label);
  const auto views = ViewPair{encode(s.encoder, x), encode(s.encoder, x)};
  const double before = cross_entropy(views, y, s.classifier_snapshot()).value;
  s.head->prototypes.topRows(k) *= 0.0;
  const double after = cross_entropy(views, y, s.classifier_snapshot()).value;
  ok = ok && before != after && std::abs(after - std::log(static_cast<double>(k))) < 1e-12;
  return {ok, std::string("classifier rows ") + (ok ? "alias" : "do not alias") + " prototype rows [0, " +
                  std::to_string(k) + ")"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"gradient correctness", gradients}, {"assignment oracles", assignment}, {"metric oracles", metrics},
      {"loss fixed points", fixed_points}, {"end-to-end improvement", end_to_end}, {"ablation direction", ablation},
      {"determinism", determinism},        {"weight sharing", weight_sharing},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !v.pass;
    std::printf("%s %zu %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
