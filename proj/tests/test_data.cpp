#include <algorithm>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "dcsc/data.hpp"
#include "dcsc/random.hpp"

using namespace dcsc;

namespace {

Corpus make_corpus(int intents, int per_intent, std::size_t dim = 3) {
  Corpus c;
  c.num_intents = intents;
  for (int g = 0; g < intents; ++g) {
    for (int i = 0; i < per_intent; ++i) {
      FeatureVector v(dim, static_cast<double>(g));
      v[0] += 0.01 * i;
      c.samples.push_back({"s" + std::to_string(g) + "_" + std::to_string(i), v, g});
    }
  }
  return c;
}

Corpus random_corpus(Rng& rng) {
  Corpus c;
  c.num_intents = 2 + static_cast<int>(rng.below(9));
  for (int g = 0; g < c.num_intents; ++g) {
    const int count = 2 + static_cast<int>(rng.below(30));
    for (int i = 0; i < count; ++i) {
      c.samples.push_back({std::to_string(g) + ":" + std::to_string(i), FeatureVector{rng.normal(), rng.normal()}, g});
    }
  }
  rng.shuffle(c.samples);
  return c;
}

}  // namespace

TEST(KnownIntentCount, FloorsTheProduct) {
  EXPECT_EQ(known_intent_count(0.25, 77), 19);
  EXPECT_EQ(known_intent_count(0.50, 150), 75);
  EXPECT_EQ(known_intent_count(0.75, 150), 112);
  EXPECT_EQ(known_intent_count(1.0, 10), 10);
  EXPECT_EQ(known_intent_count(0.29, 100), 29);
}

TEST(SplitCorpus, BankingSizedSplitHasNineteenKnownIntents) {
  const auto c = make_corpus(77, 4);
  const auto s = split_corpus(c, {0.25, 0.1, 3});
  EXPECT_EQ(s.known_intents(), 19);
  EXPECT_EQ(s.train.num_intents, 77);
}

TEST(SplitCorpus, FullSupervisionLabelsEverything) {
  const auto c = make_corpus(5, 6);
  const auto s = split_corpus(c, {1.0, 1.0, 0});
  EXPECT_EQ(s.known_intents(), 5);
  EXPECT_EQ(s.train.labeled.size(), c.samples.size());
  EXPECT_TRUE(s.train.unlabeled.empty());
}

TEST(SplitCorpus, KnownIntentsGetContiguousIds) {
  const auto c = make_corpus(10, 20);
  const auto s = split_corpus(c, {0.5, 0.1, 11});
  ASSERT_EQ(s.known_original_intents.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(s.intent_relabeling[s.known_original_intents[i]], i);
  std::set<int> relabeled(s.intent_relabeling.begin(), s.intent_relabeling.end());
  EXPECT_EQ(relabeled.size(), 10u);
  EXPECT_EQ(*relabeled.begin(), 0);
  EXPECT_EQ(*relabeled.rbegin(), 9);
  for (const auto& l : s.train.labeled) EXPECT_LT(l.label, 5);
}

TEST(SplitCorpus, LabeledCountPerIntentIsRoundedWithFloorOfOne) {
  const auto c = make_corpus(4, 25);
  const auto s = split_corpus(c, {1.0, 0.1, 5});
  std::map<int, int> per;
  for (const auto& l : s.train.labeled) ++per[l.label];
  for (int k = 0; k < 4; ++k) EXPECT_EQ(per[k], 3);  // round(2.5) = 3

  const auto tiny = split_corpus(make_corpus(3, 4), {1.0, 0.01, 5});
  std::map<int, int> tiny_per;
  for (const auto& l : tiny.train.labeled) ++tiny_per[l.label];
  for (int k = 0; k < 3; ++k) EXPECT_EQ(tiny_per[k], 1);
}

TEST(SplitCorpus, UnknownIntentsAreNeverLabeled) {
  const auto c = make_corpus(8, 10);
  const auto s = split_corpus(c, {0.5, 1.0, 2});
  EXPECT_EQ(s.train.labeled.size(), 40u);
  for (int t : s.unlabeled_truth) EXPECT_GE(t, 4);
}

TEST(SplitCorpus, SameSeedIsIdenticalAndSeedsVary) {
  const auto c = make_corpus(20, 6);
  const auto a = split_corpus(c, {0.5, 0.3, 9});
  const auto b = split_corpus(c, {0.5, 0.3, 9});
  EXPECT_EQ(a.known_original_intents, b.known_original_intents);
  ASSERT_EQ(a.train.labeled.size(), b.train.labeled.size());
  for (std::size_t i = 0; i < a.train.labeled.size(); ++i) {
    EXPECT_EQ(a.train.labeled[i].sample.id, b.train.labeled[i].sample.id);
  }
  std::set<std::vector<int>> choices;
  for (std::uint64_t seed = 0; seed < 8; ++seed) choices.insert(split_corpus(c, {0.5, 0.3, seed}).known_original_intents);
  EXPECT_GT(choices.size(), 1u);
}

TEST(SplitCorpus, PartitionPropertyOverRandomCorpora) {
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = random_corpus(rng);
    const double kf = 0.2 + 0.8 * rng.uniform();
    const double ratio = 0.05 + 0.95 * rng.uniform();
    if (known_intent_count(kf, c.num_intents) < 1) continue;
    const auto s = split_corpus(c, {kf, ratio, rng.next_u64()});
    std::multiset<std::string> ids;
    for (const auto& l : s.train.labeled) ids.insert(l.sample.id);
    for (const auto& u : s.train.unlabeled) ids.insert(u.id);
    std::multiset<std::string> expected;
    for (const auto& x : c.samples) expected.insert(x.id);
    EXPECT_EQ(ids, expected);
    std::set<int> labeled_intents;
    for (const auto& l : s.train.labeled) labeled_intents.insert(l.label);
    EXPECT_EQ(static_cast<int>(labeled_intents.size()), s.known_intents());
    EXPECT_EQ(s.unlabeled_truth.size(), s.train.unlabeled.size());
  }
}

TEST(SplitCorpus, Errors) {
  auto c = make_corpus(4, 5);
  try {
    split_corpus(c, {0.2, 0.1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_spec);
  }
  auto empty_intent = make_corpus(4, 5);
  empty_intent.num_intents = 5;
  try {
    split_corpus(empty_intent, {0.5, 0.1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::malformed_corpus);
  }
  auto singleton = make_corpus(3, 1);
  EXPECT_THROW(split_corpus(singleton, {0.5, 0.1, 0}), Error);
}

TEST(Validate, RejectsBadCorpora) {
  auto c = make_corpus(2, 2);
  EXPECT_EQ(validate(c), 3u);
  auto bad_label = c;
  bad_label.samples[0].label = 7;
  EXPECT_THROW(validate(bad_label), Error);
  auto bad_dim = c;
  bad_dim.samples[1].features = FeatureVector{1.0};
  try {
    validate(bad_dim);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::malformed_sample);
  }
  auto nan = c;
  std::get<FeatureVector>(nan.samples[2].features)[1] = std::nan("");
  EXPECT_THROW(validate(nan), Error);
}

TEST(HoldoutSplit, IsStratified) {
  const auto c = make_corpus(5, 20);
  const auto h = holdout_split(c, 0.2, 1);
  std::map<int, int> per;
  for (const auto& s : h.test.samples) ++per[*s.label];
  for (int g = 0; g < 5; ++g) EXPECT_EQ(per[g], 4);
  EXPECT_EQ(h.train.samples.size(), 80u);
}

TEST(BatchScheduler, AlternatesSupervisedFirst) {
  BatchScheduler s(40, 400, Phase::warmup, {}, 0);
  EXPECT_EQ(s.next_batch().mode, BatchMode::supervised);
  EXPECT_EQ(s.next_batch().mode, BatchMode::unsupervised);
  EXPECT_EQ(s.next_batch().mode, BatchMode::supervised);
  EXPECT_EQ(s.next_batch().mode, BatchMode::unsupervised);
}

TEST(BatchScheduler, EmptyLabeledPoolIsUnsupervisedOnly) {
  BatchScheduler s(0, 300, Phase::cluster, {}, 0);
  EXPECT_TRUE(s.supervised_disabled());
  for (int i = 0; i < 10; ++i) EXPECT_EQ(s.next_batch().mode, BatchMode::unsupervised);
}

TEST(BatchScheduler, KeepsTheShortTail) {
  BatchScheduleConfig cfg;
  cfg.unsupervised_batch_size = 128;
  BatchScheduler s(0, 300, Phase::warmup, cfg, 3);
  ASSERT_EQ(s.calls_per_epoch(), 3u);
  std::vector<std::size_t> sizes;
  std::set<std::size_t> seen;
  for (std::size_t i = 0; i < s.calls_per_epoch(); ++i) {
    const auto b = s.next_batch();
    sizes.push_back(b.indices.size());
    seen.insert(b.indices.begin(), b.indices.end());
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{128, 128, 44}));
  EXPECT_EQ(seen.size(), 300u);
}

TEST(BatchScheduler, EpochCoversTheLargerPoolAndCyclesTheSmaller) {
  BatchScheduleConfig cfg;
  cfg.supervised_batch_size = 4;
  cfg.cluster_batch_size = 10;
  BatchScheduler s(6, 50, Phase::cluster, cfg, 8);
  EXPECT_EQ(s.units_per_epoch(), 5u);
  EXPECT_EQ(s.calls_per_epoch(), 10u);
  std::multiset<std::size_t> labeled, full;
  for (std::size_t i = 0; i < s.calls_per_epoch(); ++i) {
    const auto b = s.next_batch();
    (b.mode == BatchMode::supervised ? labeled : full).insert(b.indices.begin(), b.indices.end());
  }
  EXPECT_EQ(full.size(), 50u);
  EXPECT_EQ(std::set<std::size_t>(full.begin(), full.end()).size(), 50u);
  // 5 supervised draws of a 6-pool in batches of 4: 4, 2, 4, 2, 4
  EXPECT_EQ(labeled.size(), 16u);
}
