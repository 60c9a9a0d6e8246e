#include <gtest/gtest.h>

#include "dcsc/kmeans.hpp"
#include "oracles.hpp"

using namespace dcsc;

TEST(KMeans, OnePointPerCluster) {
  Matrix x(3, 2);
  x << 0, 0, 5, 5, -3, 4;
  const auto r = kmeans_pp(x, 3, 1);
  EXPECT_EQ(r.inertia, 0.0);
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_EQ(r.centers.row(r.labels[i]), x.row(i));
  }
}

TEST(KMeans, IdenticalPointsReseedTheEmptyCluster) {
  const Matrix x = Matrix::Constant(6, 2, 1.5);
  const auto r = kmeans_pp(x, 2, 3);
  EXPECT_GE(r.reseeds, 1);
  EXPECT_EQ(r.centers.row(0), x.row(0));
  EXPECT_EQ(r.centers.row(1), x.row(0));
  EXPECT_EQ(r.inertia, 0.0);
}

TEST(KMeans, RecoversTwoBlobs) {
  Rng rng(4);
  Matrix x(200, 2);
  for (int i = 0; i < 200; ++i) {
    const double c = i < 100 ? 0.0 : 10.0;
    x(i, 0) = c + 0.01 * rng.normal();
    x(i, 1) = c + 0.01 * rng.normal();
  }
  const auto r = kmeans_pp(x, 2, 5);
  EXPECT_TRUE(r.converged);
  const int a = r.labels[0];
  Eigen::RowVector2d m0(0, 0), m1(10, 10);
  EXPECT_LT((r.centers.row(a) - m0).norm(), 0.1);
  EXPECT_LT((r.centers.row(1 - a) - m1).norm(), 0.1);
}

TEST(KMeans, InertiaNeverIncreases) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = kmeans_pp(oracle::random_matrix(rng, 60, 3), 5, rng.next_u64());
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i) {
      EXPECT_LE(r.inertia_history[i], r.inertia_history[i - 1] * (1 + 1e-12));
    }
  }
}

TEST(KMeans, SameSeedSameResult) {
  Rng rng(7);
  const Matrix x = oracle::random_matrix(rng, 50, 4);
  EXPECT_EQ(kmeans_pp(x, 4, 9).labels, kmeans_pp(x, 4, 9).labels);
}

TEST(KMeans, TooFewPoints) {
  try {
    kmeans_pp(Matrix::Zero(2, 2), 3, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::insufficient_data);
  }
}
