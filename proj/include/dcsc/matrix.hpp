#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "dcsc/error.hpp"

namespace dcsc {

// Rows are samples throughout: an N x D matrix holds N representations.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Labels = std::vector<int>;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                          const std::string& what) {
  if (m.rows() != rows || m.cols() != cols) {
    fail(ErrorKind::shape_mismatch, what + ": expected " + std::to_string(rows) + "x" +
                                        std::to_string(cols) + ", got " +
                                        std::to_string(m.rows()) + "x" +
                                        std::to_string(m.cols()));
  }
}

// log(sum(exp(row))) with max subtraction.
inline double log_sum_exp(const Eigen::Ref<const RowVector>& row) {
  const double m = row.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((row.array() - m).exp().sum());
}

inline Matrix row_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

inline Matrix stack_rows(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace dcsc
