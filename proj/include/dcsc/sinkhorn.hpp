#pragma once

#include <cmath>
#include <vector>

#include "dcsc/error.hpp"
#include "dcsc/matrix.hpp"

namespace dcsc {

inline constexpr double kDefaultSinkhornEpsilon = 0.05;
inline constexpr int kDefaultSinkhornIters = 3;

struct SinkhornOptions {
  double epsilon = kDefaultSinkhornEpsilon;
  int iterations = kDefaultSinkhornIters;
  // Stop early once the column marginal total variation drops below this
  // (0 disables the check and runs exactly `iterations` rounds).
  double tolerance = 0.0;
  bool record_marginals = false;
};

struct SoftAssignment {
  Matrix a;  // N x G, rows are distributions
  int iterations_used = 0;
  double epsilon = kDefaultSinkhornEpsilon;
  // The batch has fewer rows than clusters, so a balanced fill is impossible.
  bool underfilled = false;
  // Column-marginal total variation from uniform after each round.
  std::vector<double> column_tv;
};

namespace detail {

inline void normalize_rows_log(Matrix& log_m, double log_target) {
  for (Eigen::Index i = 0; i < log_m.rows(); ++i) {
    log_m.row(i).array() -= log_sum_exp(log_m.row(i)) - log_target;
  }
}

inline void normalize_cols_log(Matrix& log_m, double log_target) {
  for (Eigen::Index j = 0; j < log_m.cols(); ++j) {
    const auto col = log_m.col(j);
    const double m = col.maxCoeff();
    const double lse = m + std::log((col.array() - m).exp().sum());
    log_m.col(j).array() -= lse - log_target;
  }
}

inline double column_tv(const Matrix& log_m) {
  const double target = 1.0 / static_cast<double>(log_m.cols());
  double tv = 0.0;
  for (Eigen::Index j = 0; j < log_m.cols(); ++j) tv += std::abs(log_m.col(j).array().exp().sum() - target);
  return tv / 2.0;
}

}  // namespace detail

// Balanced soft assignment of N rows to G clusters from logits Q. Works on
// log(exp(Q / epsilon)) so no stage can overflow. Rows are normalized to
// mass 1/N once before alternating column (1/G) and row (1/N) scaling; that
// first pass makes the result independent of per-row logit offsets. The
// final rescale turns each row into a distribution.
inline SoftAssignment sinkhorn_assign(const Matrix& q, const SinkhornOptions& opt = {}) {
  require(q.rows() >= 1 && q.cols() >= 1, ErrorKind::shape_mismatch, "sinkhorn_assign: empty logits");
  require(q.allFinite(), ErrorKind::numeric_overflow, "sinkhorn_assign: non-finite logits");
  require(opt.epsilon > 0.0, ErrorKind::invalid_spec, "sinkhorn epsilon must be positive");
  require(opt.iterations >= 1, ErrorKind::invalid_spec, "sinkhorn needs at least one iteration");
  const auto n = static_cast<double>(q.rows());
  const auto g = static_cast<double>(q.cols());

  Matrix log_m = q / opt.epsilon;
  require(log_m.allFinite(), ErrorKind::numeric_overflow, "sinkhorn_assign: logits / epsilon overflow");

  SoftAssignment out;
  out.epsilon = opt.epsilon;
  out.underfilled = q.rows() < q.cols();
  detail::normalize_rows_log(log_m, -std::log(n));
  for (int it = 0; it < opt.iterations; ++it) {
    detail::normalize_cols_log(log_m, -std::log(g));
    detail::normalize_rows_log(log_m, -std::log(n));
    ++out.iterations_used;
    if (opt.record_marginals || opt.tolerance > 0.0) {
      const double tv = detail::column_tv(log_m);
      if (opt.record_marginals) out.column_tv.push_back(tv);
      if (opt.tolerance > 0.0 && tv < opt.tolerance) break;
    }
  }
  out.a = row_softmax(log_m);
  require(out.a.allFinite(), ErrorKind::numeric_overflow, "sinkhorn_assign: non-finite assignment");
  return out;
}

struct HardAssignment {
  Labels b;
};

// Row-wise argmax, first index on exact ties.
inline HardAssignment harden(const Matrix& soft) {
  HardAssignment out;
  out.b.resize(static_cast<std::size_t>(soft.rows()));
  for (Eigen::Index i = 0; i < soft.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < soft.cols(); ++j) {
      if (soft(i, j) > soft(i, best)) best = j;
    }
    out.b[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

inline HardAssignment harden(const SoftAssignment& soft) { return harden(soft.a); }

}  // namespace dcsc
