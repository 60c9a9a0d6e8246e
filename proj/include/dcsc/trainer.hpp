#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dcsc/data.hpp"
#include "dcsc/encoder.hpp"
#include "dcsc/error.hpp"
#include "dcsc/kmeans.hpp"
#include "dcsc/losses.hpp"
#include "dcsc/metrics.hpp"
#include "dcsc/optimizer.hpp"
#include "dcsc/prototypes.hpp"
#include "dcsc/random.hpp"
#include "dcsc/sinkhorn.hpp"

namespace dcsc {

struct TrainConfig {
  int warmup_epochs = 100;
  int cluster_epochs = 100;
  AdamWConfig optimizer{};
  BatchScheduleConfig batches{};
  double tau = kDefaultTemperature;
  SinkhornOptions sinkhorn{};
  std::uint64_t seed = 0;
  bool ablation_no_sup_cluster = false;
  int kmeans_max_iters = 300;
};

inline void validate(const TrainConfig& c) {
  require(c.warmup_epochs >= 0 && c.cluster_epochs >= 0, ErrorKind::invalid_spec, "epoch counts must be non-negative");
  require(c.optimizer.learning_rate > 0.0 && c.optimizer.weight_decay >= 0.0, ErrorKind::invalid_spec,
          "learning rate must be positive and weight decay non-negative");
  require(c.batches.supervised_batch_size >= 2 && c.batches.unsupervised_batch_size >= 2 &&
              c.batches.cluster_batch_size >= 2,
          ErrorKind::invalid_spec, "batch sizes must be at least 2");
  if (!(c.tau > 0.0)) fail(ErrorKind::invalid_temperature, "temperature must be positive");
  require(c.sinkhorn.epsilon > 0.0 && c.sinkhorn.iterations >= 1, ErrorKind::invalid_spec,
          "sinkhorn epsilon must be positive and iterations >= 1");
}

// Per-epoch mean of every loss term that was evaluated at least once.
using LossHistory = std::map<std::string, std::vector<double>>;

struct TrainState {
  EncoderParams encoder;
  EncoderMoments encoder_moments;
  // Warm-up classifier (K x D). Emptied once the cluster head exists; from
  // then on the classifier is rows [0, K) of the head.
  Matrix warmup_classifier;
  AdamSlot classifier_moments;
  std::optional<PrototypeBank> head;
  AdamSlot head_moments;
  int known_intents = 0;
  int num_intents = 0;
  int warmup_epochs_done = 0;
  int cluster_epochs_done = 0;
  long steps = 0;
  LossHistory history;
  std::size_t warnings = 0;

  Eigen::Ref<Matrix> classifier_weights() {
    if (head) return head->prototypes.topRows(head->known_count);
    return warmup_classifier;
  }
  Matrix classifier_snapshot() const {
    return head ? Matrix(head->prototypes.topRows(head->known_count)) : warmup_classifier;
  }
};

inline TrainState init_state(const EncoderConfig& encoder, int known_intents, int num_intents, std::uint64_t seed) {
  TrainState s;
  s.encoder = init_encoder(encoder, derive_seed(seed, "encoder"));
  s.known_intents = known_intents;
  s.num_intents = num_intents;
  s.warmup_classifier.resize(known_intents, static_cast<Eigen::Index>(encoder.output_dim));
  Rng rng(derive_seed(seed, "classifier"));
  const double a = std::sqrt(6.0 / static_cast<double>(known_intents + static_cast<int>(encoder.output_dim)));
  for (Eigen::Index i = 0; i < s.warmup_classifier.size(); ++i) s.warmup_classifier.data()[i] = rng.uniform(-a, a);
  return s;
}

// Mean-pooled input rows for a list of samples.
template <typename Get>
Matrix pooled_matrix(std::size_t count, std::size_t dim, Get&& features_of) {
  Matrix x(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < count; ++i) {
    const auto v = pool(features_of(i));
    require(v.size() == dim, ErrorKind::shape_mismatch, "sample dimension does not match the encoder input");
    for (std::size_t k = 0; k < dim; ++k) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v[k];
  }
  return x;
}

struct PooledTraining {
  Matrix full;     // full pool, labeled rows first
  Labels labels;   // labels of the first labeled.size() rows of `full`
};

inline PooledTraining pool_training(const TrainingData& data, std::size_t dim) {
  PooledTraining p;
  p.full = pooled_matrix(data.full_size(), dim, [&](std::size_t i) -> const Features& { return data.full(i).features; });
  for (const auto& l : data.labeled) p.labels.push_back(l.label);
  return p;
}

inline Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

namespace detail {

class EpochLog {
 public:
  void add(const std::string& term, double v) {
    auto& [sum, count] = acc_[term];
    sum += v;
    ++count;
  }
  void flush(LossHistory& history) {
    for (const auto& [term, sc] : acc_) history[term].push_back(sc.first / static_cast<double>(sc.second));
    acc_.clear();
  }

 private:
  std::map<std::string, std::pair<double, long>> acc_;
};

inline void check_finite(double value, const std::string& term, const TrainState& s, int epoch) {
  if (!std::isfinite(value)) {
    std::ostringstream os;
    os << term << " became non-finite at epoch " << epoch << ", step " << s.steps;
    fail(ErrorKind::divergence, os.str());
  }
}

inline TwoViewForward two_views(const TrainState& s, const Matrix& x, std::uint64_t seed) {
  const std::uint64_t stream = derive_seed(seed, "dropout");
  return forward_two_views(s.encoder, x, derive_seed(stream, static_cast<std::uint64_t>(2 * s.steps)),
                           derive_seed(stream, static_cast<std::uint64_t>(2 * s.steps + 1)));
}

inline void renormalize_head(TrainState& s) {
  if (s.encoder.config.normalize_output) normalize_rows(s.head->prototypes);
}

}  // namespace detail

// Supervised step on labeled rows; asserts the classifier in use is the
// shared head during the clustering stage.
inline void supervised_step(TrainState& s, const TrainConfig& c, const Matrix& x, const Labels& y,
                            detail::EpochLog& log, const char* prefix, int epoch) {
  const auto fwd = detail::two_views(s, x, c.seed);
  const Matrix weights = s.classifier_snapshot();
  const auto ce = cross_entropy(fwd.views, y, weights);
  const auto sc = supervised_contrastive(fwd.views, duplicate_labels(y), c.tau);
  const auto total = compose(ce, sc);
  detail::check_finite(total.value, std::string(prefix) + ".ce+sc", s, epoch);
  log.add(std::string(prefix) + ".ce", ce.value);
  log.add(std::string(prefix) + ".sc", sc.value);

  const auto grads = backward_two_views(s.encoder, fwd, total.grad_z, total.grad_z_prime);
  adamw_update(c.optimizer, s.encoder, grads, s.encoder_moments);
  if (s.head) {
    Matrix g = Matrix::Zero(s.head->prototypes.rows(), s.head->prototypes.cols());
    g.topRows(s.head->known_count) = *total.grad_weights;
    adamw_update(c.optimizer, s.head->prototypes, g, s.head_moments);
    detail::renormalize_head(s);
  } else {
    adamw_update(c.optimizer, s.warmup_classifier, *total.grad_weights, s.classifier_moments);
  }
  ++s.steps;
}

inline void standardize_inputs(TrainState& s, const TrainingData& data) {
  fit_input_standardization(s.encoder, pool_training(data, s.encoder.input_dim()).full);
}

inline void warmup_stage(TrainState& s, const TrainConfig& c, const TrainingData& data) {
  validate(c);
  if (c.warmup_epochs == 0) return;
  require(!data.labeled.empty(), ErrorKind::insufficient_data, "warm-up stage needs at least one labeled sample");
  require(!s.head, ErrorKind::usage, "warm-up stage after the cluster head was initialized");
  const auto pooled = pool_training(data, s.encoder.input_dim());
  BatchScheduler sched(data.labeled.size(), data.full_size(), Phase::warmup, c.batches,
                       derive_seed(derive_seed(c.seed, "schedule"), "warmup"));
  detail::EpochLog log;
  for (int epoch = 0; epoch < c.warmup_epochs; ++epoch) {
    for (std::size_t call = 0; call < sched.calls_per_epoch(); ++call) {
      const auto batch = sched.next_batch();
      if (batch.mode == BatchMode::supervised) {
        Labels y;
        for (auto i : batch.indices) y.push_back(pooled.labels[i]);
        supervised_step(s, c, gather_rows(pooled.full, batch.indices), y, log, "warmup", epoch);
      } else {
        const auto fwd = detail::two_views(s, gather_rows(pooled.full, batch.indices), c.seed);
        const auto un = unsupervised_contrastive(fwd.views, c.tau);
        detail::check_finite(un.value, "warmup.unsup", s, epoch);
        log.add("warmup.unsup", un.value);
        adamw_update(c.optimizer, s.encoder, backward_two_views(s.encoder, fwd, un.grad_z, un.grad_z_prime),
                     s.encoder_moments);
        ++s.steps;
      }
    }
    log.flush(s.history);
    ++s.warmup_epochs_done;
  }
}

// Single-view, dropout-free representations of the full training pool.
inline Matrix encode_training(const TrainState& s, const TrainingData& data) {
  return encode(s.encoder, pool_training(data, s.encoder.input_dim()).full);
}

struct HeadInit {
  KMeansResult kmeans;
  Alignment alignment;
};

inline HeadInit init_cluster_head(TrainState& s, const TrainingData& data, int num_intents, std::uint64_t seed,
                                  int kmeans_max_iters = 300) {
  require(!s.head, ErrorKind::usage, "cluster head already initialized");
  require(data.full_size() >= static_cast<std::size_t>(num_intents), ErrorKind::insufficient_data,
          "fewer training samples than intents");
  const Matrix reps = encode_training(s, data);
  HeadInit out;
  out.kmeans = kmeans_pp(reps, num_intents, derive_seed(seed, "kmeans-head"), kmeans_max_iters);
  out.alignment = align_and_extract(s.warmup_classifier, out.kmeans.centers);
  s.head = out.alignment.bank;
  detail::renormalize_head(s);
  s.num_intents = num_intents;
  s.warmup_classifier.resize(0, 0);
  s.classifier_moments = AdamSlot{};
  return out;
}

inline void cluster_step(TrainState& s, const TrainConfig& c, const Matrix& x, detail::EpochLog& log, int epoch) {
  const auto fwd = detail::two_views(s, x, c.seed);
  const auto& protos = s.head->prototypes;
  const auto logits = cluster_logits(fwd.views, protos);
  // Targets are constants: no gradient flows through the assignment.
  const auto soft = sinkhorn_assign(logits.q, c.sinkhorn);
  const auto soft_prime = sinkhorn_assign(logits.q_prime, c.sinkhorn);
  if (soft.underfilled) ++s.warnings;
  const auto swapped = sinkhorn_swapped_loss(fwd.views, protos, soft.a, soft_prime.a);
  log.add("cluster.sinkhorn", swapped.value);
  LossOutput total = swapped;
  if (x.rows() >= 2) {
    Labels pseudo = harden(soft).b;
    const auto b_prime = harden(soft_prime).b;
    pseudo.insert(pseudo.end(), b_prime.begin(), b_prime.end());
    const auto ps = pseudo_supervised_contrastive(fwd.views, pseudo, c.tau);
    log.add("cluster.pseudo", ps.value);
    total = compose(swapped, ps);
  } else {
    ++s.warnings;
  }
  detail::check_finite(total.value, "cluster.sinkhorn+pseudo", s, epoch);
  adamw_update(c.optimizer, s.encoder, backward_two_views(s.encoder, fwd, total.grad_z, total.grad_z_prime),
               s.encoder_moments);
  adamw_update(c.optimizer, s.head->prototypes, *total.grad_weights, s.head_moments);
  detail::renormalize_head(s);
  ++s.steps;
}

inline void clustering_stage(TrainState& s, const TrainConfig& c, const TrainingData& data) {
  validate(c);
  require(s.head.has_value(), ErrorKind::usage, "clustering stage needs an initialized cluster head");
  if (c.cluster_epochs == 0) return;
  const auto pooled = pool_training(data, s.encoder.input_dim());
  const std::size_t labeled = c.ablation_no_sup_cluster ? 0 : data.labeled.size();
  BatchScheduler sched(labeled, data.full_size(), Phase::cluster, c.batches,
                       derive_seed(derive_seed(c.seed, "schedule"), "cluster"));
  detail::EpochLog log;
  for (int epoch = 0; epoch < c.cluster_epochs; ++epoch) {
    for (std::size_t call = 0; call < sched.calls_per_epoch(); ++call) {
      const auto batch = sched.next_batch();
      if (batch.mode == BatchMode::supervised) {
        Labels y;
        for (auto i : batch.indices) y.push_back(pooled.labels[i]);
        supervised_step(s, c, gather_rows(pooled.full, batch.indices), y, log, "cluster", epoch);
      } else {
        cluster_step(s, c, gather_rows(pooled.full, batch.indices), log, epoch);
      }
    }
    log.flush(s.history);
    ++s.cluster_epochs_done;
  }
}

// Fraction of labeled samples whose classifier argmax equals their label.
inline double labeled_accuracy(const TrainState& s, const TrainingData& data) {
  if (data.labeled.empty()) return 0.0;
  const Matrix x = pooled_matrix(data.labeled.size(), s.encoder.input_dim(),
                                 [&](std::size_t i) -> const Features& { return data.labeled[i].sample.features; });
  const Matrix logits = encode(s.encoder, x) * s.classifier_snapshot().transpose();
  const auto pred = harden(logits).b;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == data.labeled[i].label;
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

struct Evaluation {
  MetricReport kmeans;
  std::optional<MetricReport> head_argmax;
  Labels predictions;
  Labels truth;
};

// Test samples without a label are not scored.
inline Evaluation evaluate_representations(const Matrix& reps, const Labels& truth, int num_intents,
                                           std::uint64_t seed, int kmeans_max_iters = 300) {
  require(reps.rows() >= num_intents, ErrorKind::insufficient_data, "test set smaller than the number of intents");
  Evaluation e;
  e.predictions = kmeans_pp(reps, num_intents, derive_seed(seed, "kmeans-eval"), kmeans_max_iters).labels;
  e.truth = truth;
  e.kmeans = score(e.predictions, truth);
  return e;
}

struct LabeledMatrix {
  Matrix x;
  Labels truth;
};

inline LabeledMatrix pool_labeled(const Corpus& c, std::size_t dim) {
  std::vector<const Sample*> kept;
  for (const auto& s : c.samples) {
    if (s.label) kept.push_back(&s);
  }
  LabeledMatrix out;
  out.x = pooled_matrix(kept.size(), dim, [&](std::size_t i) -> const Features& { return kept[i]->features; });
  for (const auto* s : kept) out.truth.push_back(*s->label);
  return out;
}

inline Evaluation evaluate(const TrainState& s, const Corpus& test, int num_intents, std::uint64_t seed,
                           int kmeans_max_iters = 300) {
  const auto pooled = pool_labeled(test, s.encoder.input_dim());
  require(pooled.x.rows() >= num_intents, ErrorKind::insufficient_data, "test set smaller than the number of intents");
  const Matrix reps = encode(s.encoder, pooled.x);
  auto e = evaluate_representations(reps, pooled.truth, num_intents, seed, kmeans_max_iters);
  if (s.head) e.head_argmax = score(harden(Matrix(reps * s.head->prototypes.transpose())).b, pooled.truth);
  return e;
}

}  // namespace dcsc
