#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "dcsc/error.hpp"
#include "dcsc/matrix.hpp"
#include "dcsc/random.hpp"

namespace dcsc {

struct KMeansResult {
  Matrix centers;  // G x D
  Labels labels;
  double inertia = 0.0;
  // Inertia after every assignment step; non-increasing.
  std::vector<double> inertia_history;
  int iterations = 0;
  bool converged = false;
  int reseeds = 0;
};

namespace detail {

inline double squared_distance(const Matrix& x, Eigen::Index i, const Matrix& c, Eigen::Index j) {
  return (x.row(i) - c.row(j)).squaredNorm();
}

// D^2-weighted seeding.
inline Matrix kmeans_pp_seed(const Matrix& x, int k, Rng& rng) {
  const auto m = x.rows();
  Matrix centers(k, x.cols());
  auto first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(m)));
  centers.row(0) = x.row(first);
  std::vector<double> d2(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) d2[i] = squared_distance(x, i, centers, 0);
  for (int c = 1; c < k; ++c) {
    std::size_t pick = rng.weighted_index(d2);
    if (pick >= d2.size()) pick = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(m)));
    centers.row(c) = x.row(static_cast<Eigen::Index>(pick));
    for (Eigen::Index i = 0; i < m; ++i) d2[i] = std::min(d2[i], squared_distance(x, i, centers, c));
  }
  return centers;
}

}  // namespace detail

// K-Means++ seeding followed by Lloyd iterations until the assignment stops
// changing or max_iters is reached. An empty cluster is re-seeded with the
// point farthest from its current center.
inline KMeansResult kmeans_pp(const Matrix& x, int k, std::uint64_t seed, int max_iters = 300) {
  require(k >= 1, ErrorKind::invalid_spec, "kmeans_pp: cluster count must be positive");
  require(x.rows() >= k, ErrorKind::insufficient_data,
          "kmeans_pp: " + std::to_string(x.rows()) + " points for " + std::to_string(k) + " clusters");
  require(x.allFinite(), ErrorKind::numeric_overflow, "kmeans_pp: non-finite input");
  const auto m = x.rows();
  Rng rng(seed);

  KMeansResult r;
  r.centers = detail::kmeans_pp_seed(x, k, rng);
  r.labels.assign(static_cast<std::size_t>(m), -1);
  std::vector<double> dist(static_cast<std::size_t>(m), 0.0);

  for (int iter = 0; iter < std::max(1, max_iters); ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      int best = 0;
      double best_d = detail::squared_distance(x, i, r.centers, 0);
      for (int c = 1; c < k; ++c) {
        const double d = detail::squared_distance(x, i, r.centers, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (r.labels[i] != best) changed = true;
      r.labels[i] = best;
      dist[i] = best_d;
      inertia += best_d;
    }
    r.inertia = inertia;
    r.inertia_history.push_back(inertia);
    r.iterations = iter + 1;
    if (!changed && iter > 0) {
      r.converged = true;
      break;
    }

    std::vector<int> counts(k, 0);
    for (int l : r.labels) ++counts[l];
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (counts[r.labels[i]] <= 1) continue;
        if (far < 0 || dist[i] > dist[far]) far = i;
      }
      if (far < 0) break;
      --counts[r.labels[far]];
      r.labels[far] = c;
      counts[c] = 1;
      dist[far] = 0.0;
      ++r.reseeds;
    }

    Matrix sums = Matrix::Zero(k, x.cols());
    for (Eigen::Index i = 0; i < m; ++i) sums.row(r.labels[i]) += x.row(i);
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) r.centers.row(c) = sums.row(c) / static_cast<double>(counts[c]);
    }
  }
  return r;
}

}  // namespace dcsc
