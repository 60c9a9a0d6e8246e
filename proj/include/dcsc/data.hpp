#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dcsc/error.hpp"
#include "dcsc/random.hpp"

namespace dcsc {

using FeatureVector = std::vector<double>;
using TokenSequence = std::vector<FeatureVector>;
using Features = std::variant<FeatureVector, TokenSequence>;

struct Sample {
  std::string id;
  Features features;
  std::optional<int> label;
};

struct Corpus {
  std::vector<Sample> samples;
  int num_intents = 0;
};

inline bool is_sequence(const Features& f) { return std::holds_alternative<TokenSequence>(f); }

inline std::size_t feature_dim(const Features& f) {
  if (const auto* v = std::get_if<FeatureVector>(&f)) return v->size();
  const auto& seq = std::get<TokenSequence>(f);
  return seq.empty() ? 0 : seq.front().size();
}

// Checks per-sample invariants and returns the common input dimension
// (0 for an empty corpus).
inline std::size_t validate(const Corpus& corpus) {
  require(corpus.num_intents >= 1, ErrorKind::malformed_corpus, "num_intents must be positive");
  std::size_t dim = 0;
  for (const auto& s : corpus.samples) {
    auto check_row = [&](const FeatureVector& row) {
      if (row.empty()) fail(ErrorKind::malformed_sample, "sample '" + s.id + "' has an empty feature vector");
      if (dim == 0) dim = row.size();
      if (row.size() != dim) {
        fail(ErrorKind::malformed_sample, "sample '" + s.id + "' has dimension " +
                                              std::to_string(row.size()) + ", expected " +
                                              std::to_string(dim));
      }
      for (double x : row) {
        if (!std::isfinite(x)) fail(ErrorKind::malformed_sample, "sample '" + s.id + "' has a non-finite feature");
      }
    };
    if (const auto* v = std::get_if<FeatureVector>(&s.features)) {
      check_row(*v);
    } else {
      const auto& seq = std::get<TokenSequence>(s.features);
      if (seq.empty()) fail(ErrorKind::malformed_sample, "sample '" + s.id + "' has an empty token sequence");
      for (const auto& tok : seq) check_row(tok);
    }
    if (s.label && (*s.label < 0 || *s.label >= corpus.num_intents)) {
      fail(ErrorKind::malformed_corpus, "sample '" + s.id + "' has label " + std::to_string(*s.label) +
                                            " outside [0, " + std::to_string(corpus.num_intents) + ")");
    }
  }
  return dim;
}

// ---------------------------------------------------------------------------
// Split protocol

struct SplitSpec {
  double known_fraction = 0.75;
  double labeled_ratio = 0.1;
  std::uint64_t seed = 0;
};

// What the trainer is allowed to see. Unlabeled samples carry no label field
// at all; their ground truth lives in SplitResult::unlabeled_truth.
struct TrainingSample {
  std::string id;
  Features features;
};

struct LabeledSample {
  TrainingSample sample;
  int label = 0;  // relabeled id in [0, K)
};

struct TrainingData {
  std::vector<LabeledSample> labeled;
  std::vector<TrainingSample> unlabeled;
  int known_intents = 0;
  int num_intents = 0;

  std::size_t full_size() const { return labeled.size() + unlabeled.size(); }

  // Full training pool index: labeled samples first, then unlabeled.
  const TrainingSample& full(std::size_t i) const {
    return i < labeled.size() ? labeled[i].sample : unlabeled[i - labeled.size()];
  }
};

struct SplitResult {
  TrainingData train;
  // Relabeled ground truth for train.unlabeled (-1 for samples that came in
  // without a label). Only evaluation code reads this.
  std::vector<int> unlabeled_truth;
  // intent_relabeling[original id] = contiguous id; known intents occupy [0, K).
  std::vector<int> intent_relabeling;
  std::vector<int> known_original_intents;

  int known_intents() const { return train.known_intents; }
};

inline int known_intent_count(double known_fraction, int num_intents) {
  // The 1e-9 guard keeps products like 0.29 * 100 from flooring to 28.
  return static_cast<int>(std::floor(known_fraction * num_intents + 1e-9));
}

inline SplitResult split_corpus(const Corpus& corpus, const SplitSpec& spec) {
  validate(corpus);
  const int G = corpus.num_intents;
  require(G >= 2, ErrorKind::malformed_corpus, "corpus needs at least 2 intents");
  require(spec.known_fraction > 0.0 && spec.known_fraction <= 1.0, ErrorKind::invalid_spec,
          "known_fraction must lie in (0, 1]");
  require(spec.labeled_ratio > 0.0 && spec.labeled_ratio <= 1.0, ErrorKind::invalid_spec,
          "labeled_ratio must lie in (0, 1]");
  const int K = known_intent_count(spec.known_fraction, G);
  require(K >= 1, ErrorKind::invalid_spec,
          "known_fraction * num_intents < 1 yields no known intents");

  std::vector<std::vector<std::size_t>> members(G);
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    if (const auto& l = corpus.samples[i].label) members[*l].push_back(i);
  }
  for (int g = 0; g < G; ++g) {
    if (members[g].empty()) fail(ErrorKind::malformed_corpus, "intent " + std::to_string(g) + " has no samples");
    if (members[g].size() < 2) fail(ErrorKind::malformed_corpus, "intent " + std::to_string(g) + " has fewer than 2 samples");
  }

  std::vector<int> intents(G);
  for (int g = 0; g < G; ++g) intents[g] = g;
  Rng intent_rng(derive_seed(spec.seed, "known-intents"));
  intent_rng.shuffle(intents);
  std::vector<int> known(intents.begin(), intents.begin() + K);
  std::vector<int> unknown(intents.begin() + K, intents.end());
  std::sort(known.begin(), known.end());
  std::sort(unknown.begin(), unknown.end());

  SplitResult out;
  out.intent_relabeling.assign(G, -1);
  out.known_original_intents = known;
  for (int i = 0; i < K; ++i) out.intent_relabeling[known[i]] = i;
  for (int i = 0; i < G - K; ++i) out.intent_relabeling[unknown[i]] = K + i;

  std::vector<char> is_labeled(corpus.samples.size(), 0);
  Rng pick_rng(derive_seed(spec.seed, "labeled-subset"));
  for (int g : known) {
    auto pool = members[g];
    pick_rng.shuffle(pool);
    const auto want = std::max<long>(1, std::lround(spec.labeled_ratio * static_cast<double>(pool.size())));
    for (long j = 0; j < want; ++j) is_labeled[pool[j]] = 1;
  }

  out.train.known_intents = K;
  out.train.num_intents = G;
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    const auto& s = corpus.samples[i];
    TrainingSample ts{s.id, s.features};
    if (is_labeled[i]) {
      out.train.labeled.push_back({std::move(ts), out.intent_relabeling[*s.label]});
    } else {
      out.train.unlabeled.push_back(std::move(ts));
      out.unlabeled_truth.push_back(s.label ? out.intent_relabeling[*s.label] : -1);
    }
  }
  return out;
}

struct HoldoutSplit {
  Corpus train;
  Corpus test;
};

// Stratified train/test partition: round(test_fraction * count) samples of
// every intent go to the test side. Unlabeled input samples stay in train.
inline HoldoutSplit holdout_split(const Corpus& corpus, double test_fraction, std::uint64_t seed) {
  validate(corpus);
  require(test_fraction > 0.0 && test_fraction < 1.0, ErrorKind::invalid_spec,
          "test_fraction must lie in (0, 1)");
  std::vector<std::vector<std::size_t>> members(corpus.num_intents);
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    if (const auto& l = corpus.samples[i].label) members[*l].push_back(i);
  }
  std::vector<char> to_test(corpus.samples.size(), 0);
  Rng rng(derive_seed(seed, "holdout"));
  for (auto& pool : members) {
    rng.shuffle(pool);
    const auto n = std::lround(test_fraction * static_cast<double>(pool.size()));
    for (long j = 0; j < n; ++j) to_test[pool[j]] = 1;
  }
  HoldoutSplit out;
  out.train.num_intents = out.test.num_intents = corpus.num_intents;
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    (to_test[i] ? out.test : out.train).samples.push_back(corpus.samples[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Batch scheduling

enum class Phase { warmup, cluster };
enum class BatchMode { supervised, unsupervised };

inline const char* to_string(BatchMode m) {
  return m == BatchMode::supervised ? "supervised" : "unsupervised";
}

struct BatchScheduleConfig {
  std::size_t supervised_batch_size = 128;
  std::size_t unsupervised_batch_size = 128;
  std::size_t cluster_batch_size = 512;
};

struct Batch {
  BatchMode mode = BatchMode::unsupervised;
  // Supervised: indices into TrainingData::labeled. Unsupervised: full-pool
  // indices (see TrainingData::full).
  std::vector<std::size_t> indices;
};

inline std::size_t batches_per_pass(std::size_t pool, std::size_t batch) {
  return pool == 0 ? 0 : (pool + batch - 1) / batch;
}

// Cycles one pool without replacement; reshuffles at every pass boundary and
// emits the short tail batch instead of dropping it.
class PoolSampler {
 public:
  PoolSampler() = default;
  PoolSampler(std::size_t size, std::size_t batch, std::uint64_t seed)
      : order_(size), batch_(batch), rng_(seed) {
    for (std::size_t i = 0; i < size; ++i) order_[i] = i;
    cursor_ = size;  // force a shuffle on first draw
  }

  std::vector<std::size_t> draw() {
    if (order_.empty()) return {};
    if (cursor_ >= order_.size()) {
      rng_.shuffle(order_);
      cursor_ = 0;
      ++passes_;
    }
    const std::size_t end = std::min(order_.size(), cursor_ + batch_);
    std::vector<std::size_t> out(order_.begin() + static_cast<long>(cursor_), order_.begin() + static_cast<long>(end));
    cursor_ = end;
    return out;
  }

  std::size_t size() const { return order_.size(); }
  std::size_t passes() const { return passes_; }

 private:
  std::vector<std::size_t> order_;
  std::size_t batch_ = 1;
  std::size_t cursor_ = 0;
  std::size_t passes_ = 0;
  Rng rng_;
};

// Strict supervised/unsupervised alternation over a labeled pool and the full
// training pool. One epoch is one pass over whichever pool needs more batches;
// the other pool is cycled.
class BatchScheduler {
 public:
  BatchScheduler(std::size_t labeled_size, std::size_t full_size, Phase phase,
                 const BatchScheduleConfig& config, std::uint64_t seed)
      : phase_(phase) {
    require(config.supervised_batch_size >= 1 && config.unsupervised_batch_size >= 1 &&
                config.cluster_batch_size >= 1,
            ErrorKind::invalid_spec, "batch sizes must be positive");
    const std::size_t unsup_batch =
        phase == Phase::warmup ? config.unsupervised_batch_size : config.cluster_batch_size;
    labeled_ = PoolSampler(labeled_size, config.supervised_batch_size, derive_seed(seed, "labeled-pool"));
    full_ = PoolSampler(full_size, unsup_batch, derive_seed(seed, "full-pool"));
    degenerate_ = labeled_size == 0;
    units_per_epoch_ = std::max(batches_per_pass(labeled_size, config.supervised_batch_size),
                                batches_per_pass(full_size, unsup_batch));
  }

  Batch next_batch() {
    Batch b;
    if (!degenerate_ && next_is_supervised_) {
      b.mode = BatchMode::supervised;
      b.indices = labeled_.draw();
    } else {
      b.mode = BatchMode::unsupervised;
      b.indices = full_.draw();
    }
    if (!degenerate_) next_is_supervised_ = !next_is_supervised_;
    return b;
  }

  // Calls to next_batch() that make up one epoch.
  std::size_t calls_per_epoch() const { return degenerate_ ? units_per_epoch_ : 2 * units_per_epoch_; }
  std::size_t units_per_epoch() const { return units_per_epoch_; }
  bool supervised_disabled() const { return degenerate_; }
  Phase phase() const { return phase_; }

 private:
  Phase phase_;
  PoolSampler labeled_;
  PoolSampler full_;
  bool degenerate_ = false;
  bool next_is_supervised_ = true;
  std::size_t units_per_epoch_ = 0;
};

}  // namespace dcsc
