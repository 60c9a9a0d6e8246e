#pragma once

#include <vector>

#include "dcsc/error.hpp"
#include "dcsc/hungarian.hpp"
#include "dcsc/matrix.hpp"

namespace dcsc {

// G cluster centers. Rows [0, K) are the known-intent centers and double as
// the classifier weights; classifier() hands out a view into the same storage.
struct PrototypeBank {
  Matrix prototypes;
  int known_count = 0;

  int num_clusters() const { return static_cast<int>(prototypes.rows()); }
  auto classifier() { return prototypes.topRows(known_count); }
  auto classifier() const { return prototypes.topRows(known_count); }
};

struct Alignment {
  PrototypeBank bank;
  // bank.prototypes.row(r) == raw_centers.row(source_of_row[r])
  std::vector<int> source_of_row;
  double total_cost = 0.0;
};

inline void normalize_rows(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (n > 0.0) m.row(i) /= n;
  }
}

// Matches each classifier row to a distinct center under cosine distance and
// re-sorts the centers: matched ones first in classifier order, the rest in
// their original order.
inline Alignment align_and_extract(const Matrix& classifier, const Matrix& raw_centers) {
  const auto k = classifier.rows();
  const auto g = raw_centers.rows();
  require(k <= g, ErrorKind::shape_mismatch, "align_and_extract: more classifier rows than centers");
  require(classifier.cols() == raw_centers.cols(), ErrorKind::shape_mismatch, "align_and_extract: dimension mismatch");
  Vector wn = classifier.rowwise().norm();
  Vector cn = raw_centers.rowwise().norm();
  for (Eigen::Index i = 0; i < k; ++i) {
    require(wn(i) > 0.0, ErrorKind::degenerate_vector, "align_and_extract: zero classifier row " + std::to_string(i));
  }
  for (Eigen::Index j = 0; j < g; ++j) {
    require(cn(j) > 0.0, ErrorKind::degenerate_vector, "align_and_extract: zero center row " + std::to_string(j));
  }
  Matrix cost(k, g);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < g; ++j) {
      cost(i, j) = 1.0 - classifier.row(i).dot(raw_centers.row(j)) / (wn(i) * cn(j));
    }
  }
  const auto match = hungarian(cost);

  Alignment out;
  out.total_cost = match.total_cost;
  out.bank.known_count = static_cast<int>(k);
  out.bank.prototypes.resize(g, raw_centers.cols());
  std::vector<char> taken(static_cast<std::size_t>(g), 0);
  for (Eigen::Index i = 0; i < k; ++i) {
    const int c = match.column_of_row[i];
    out.bank.prototypes.row(i) = raw_centers.row(c);
    out.source_of_row.push_back(c);
    taken[c] = 1;
  }
  Eigen::Index next = k;
  for (Eigen::Index j = 0; j < g; ++j) {
    if (taken[j]) continue;
    out.bank.prototypes.row(next++) = raw_centers.row(j);
    out.source_of_row.push_back(static_cast<int>(j));
  }
  return out;
}

}  // namespace dcsc
