#include <gtest/gtest.h>

#include "dcsc/synth.hpp"
#include "dcsc/trainer.hpp"

using namespace dcsc;

namespace {

SplitResult blob_split(int clusters, double sigma, double known_fraction, double ratio, std::uint64_t seed) {
  BlobSpec b;
  b.num_clusters = clusters;
  b.samples_per_cluster = 40;
  b.input_dim = 6;
  b.noise_sigma = sigma;
  b.seed = seed;
  return split_corpus(generate(b), {known_fraction, ratio, seed});
}

EncoderConfig small_encoder() {
  EncoderConfig e;
  e.input_dim = 6;
  e.hidden_dims = {16};
  e.output_dim = 8;
  return e;
}

TrainConfig quick(int warmup, int cluster) {
  TrainConfig t;
  t.warmup_epochs = warmup;
  t.cluster_epochs = cluster;
  t.optimizer.learning_rate = 1e-2;
  t.batches.supervised_batch_size = 16;
  t.batches.unsupervised_batch_size = 32;
  t.batches.cluster_batch_size = 32;
  t.seed = 3;
  return t;
}

}  // namespace

TEST(Trainer, ZeroEpochsChangeNothing) {
  const auto split = blob_split(3, 0.3, 1.0, 0.2, 1);
  auto s = init_state(small_encoder(), split.known_intents(), 3, 5);
  const auto before = s.encoder.layers[0].weight;
  warmup_stage(s, quick(0, 0), split.train);
  EXPECT_EQ(s.encoder.layers[0].weight, before);
  EXPECT_EQ(s.steps, 0);
  init_cluster_head(s, split.train, 3, 1);
  const Matrix protos = s.head->prototypes;
  clustering_stage(s, quick(0, 0), split.train);
  EXPECT_EQ(s.head->prototypes, protos);
  EXPECT_TRUE(s.history.empty());
}

TEST(Trainer, WarmupFitsTwoSeparatedBlobs) {
  const auto split = blob_split(2, 0.3, 1.0, 0.5, 2);
  auto s = init_state(small_encoder(), 2, 2, 7);
  standardize_inputs(s, split.train);
  warmup_stage(s, quick(20, 0), split.train);
  EXPECT_GT(labeled_accuracy(s, split.train), 0.95);
  EXPECT_EQ(s.history.at("warmup.ce").size(), 20u);
  EXPECT_EQ(s.history.at("warmup.unsup").size(), 20u);
}

TEST(Trainer, SameSeedIsReproducible) {
  const auto split = blob_split(3, 0.5, 0.67, 0.3, 4);
  auto run = [&] {
    auto s = init_state(small_encoder(), split.known_intents(), 3, 9);
    warmup_stage(s, quick(2, 0), split.train);
    init_cluster_head(s, split.train, 3, 9);
    clustering_stage(s, quick(0, 2), split.train);
    return s.head->prototypes;
  };
  EXPECT_EQ(run(), run());
}

TEST(Trainer, ClassifierRowsAliasTheHeadDuringClustering) {
  const auto split = blob_split(4, 0.5, 0.5, 0.3, 5);
  auto s = init_state(small_encoder(), 2, 4, 1);
  warmup_stage(s, quick(1, 0), split.train);
  EXPECT_NE(s.classifier_weights().data(), nullptr);
  init_cluster_head(s, split.train, 4, 1);
  ASSERT_TRUE(s.head);
  EXPECT_EQ(s.warmup_classifier.size(), 0);

  // A write through either name is visible through the other.
  auto w = s.classifier_weights();
  EXPECT_EQ(w.data(), s.head->prototypes.data());
  w(1, 2) = 42.0;
  EXPECT_EQ(s.head->prototypes(1, 2), 42.0);
  s.head->prototypes(0, 0) = -7.0;
  EXPECT_EQ(s.classifier_weights()(0, 0), -7.0);
  EXPECT_EQ(s.classifier_weights().rows(), 2);
}

TEST(Trainer, SupervisedStepsInClusteringTouchOnlyKnownRows) {
  const auto split = blob_split(4, 0.5, 0.5, 0.3, 6);
  auto s = init_state(small_encoder(), 2, 4, 2);
  warmup_stage(s, quick(1, 0), split.train);
  init_cluster_head(s, split.train, 4, 2);
  const Matrix before = s.head->prototypes;
  detail::EpochLog log;
  Matrix x = Matrix::Zero(4, 6);
  for (Eigen::Index i = 0; i < 4; ++i) x.row(i).setConstant(static_cast<double>(i));
  supervised_step(s, quick(0, 1), x, {0, 1, 0, 1}, log, "cluster", 0);
  EXPECT_NE(s.head->prototypes.topRows(2), before.topRows(2));
  // Unknown rows only see decay from the update and renormalization.
  for (Eigen::Index r = 2; r < 4; ++r) {
    EXPECT_LT((s.head->prototypes.row(r).normalized() - before.row(r).normalized()).norm(), 1e-12);
  }
}

TEST(Trainer, AblationDropsSupervisedTermsFromClustering) {
  const auto split = blob_split(3, 0.5, 0.67, 0.3, 7);
  auto s = init_state(small_encoder(), split.known_intents(), 3, 3);
  warmup_stage(s, quick(1, 0), split.train);
  init_cluster_head(s, split.train, 3, 3);
  auto cfg = quick(0, 2);
  cfg.ablation_no_sup_cluster = true;
  clustering_stage(s, cfg, split.train);
  EXPECT_EQ(s.history.count("cluster.ce"), 0u);
  EXPECT_EQ(s.history.count("cluster.sc"), 0u);
  EXPECT_EQ(s.history.at("cluster.sinkhorn").size(), 2u);
  EXPECT_EQ(s.history.at("cluster.pseudo").size(), 2u);

  auto full = init_state(small_encoder(), split.known_intents(), 3, 3);
  warmup_stage(full, quick(1, 0), split.train);
  init_cluster_head(full, split.train, 3, 3);
  clustering_stage(full, quick(0, 2), split.train);
  EXPECT_EQ(full.history.at("cluster.ce").size(), 2u);
}

TEST(Trainer, StageOrderIsEnforced) {
  const auto split = blob_split(3, 0.5, 0.67, 0.3, 8);
  auto s = init_state(small_encoder(), split.known_intents(), 3, 3);
  EXPECT_THROW(clustering_stage(s, quick(0, 1), split.train), Error);
  init_cluster_head(s, split.train, 3, 3);
  EXPECT_THROW(init_cluster_head(s, split.train, 3, 3), Error);
  EXPECT_THROW(warmup_stage(s, quick(1, 0), split.train), Error);
}

TEST(Trainer, NonFiniteLossIsReportedAsDivergence) {
  const auto split = blob_split(2, 0.5, 1.0, 0.5, 9);
  auto s = init_state(small_encoder(), 2, 2, 3);
  s.warmup_classifier.setConstant(std::numeric_limits<double>::infinity());
  try {
    warmup_stage(s, quick(1, 0), split.train);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::divergence);
    EXPECT_NE(std::string(e.what()).find("warmup"), std::string::npos);
  }
}

TEST(Trainer, InvalidConfigsAreRejected) {
  auto c = quick(1, 1);
  c.tau = 0.0;
  try {
    validate(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_temperature);
  }
  c = quick(1, 1);
  c.sinkhorn.iterations = 0;
  EXPECT_THROW(validate(c), Error);
}
