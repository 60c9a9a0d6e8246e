#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "dcsc/error.hpp"
#include "dcsc/hungarian.hpp"
#include "dcsc/matrix.hpp"

namespace dcsc {

// Predicted clusters x true classes. Ids are compacted in ascending order.
struct ContingencyTable {
  std::vector<std::vector<long>> counts;
  long n = 0;

  std::size_t pred_count() const { return counts.size(); }
  std::size_t true_count() const { return counts.empty() ? 0 : counts.front().size(); }
};

inline ContingencyTable contingency(const Labels& pred, const Labels& truth) {
  require(pred.size() == truth.size(), ErrorKind::shape_mismatch,
          "metrics: " + std::to_string(pred.size()) + " predictions vs " + std::to_string(truth.size()) + " labels");
  std::map<int, std::size_t> p_ids, t_ids;
  for (int p : pred) p_ids.emplace(p, 0);
  for (int t : truth) t_ids.emplace(t, 0);
  std::size_t next = 0;
  for (auto& [id, idx] : p_ids) idx = next++;
  next = 0;
  for (auto& [id, idx] : t_ids) idx = next++;
  ContingencyTable ct;
  ct.counts.assign(p_ids.size(), std::vector<long>(t_ids.size(), 0));
  for (std::size_t i = 0; i < pred.size(); ++i) ++ct.counts[p_ids[pred[i]]][t_ids[truth[i]]];
  ct.n = static_cast<long>(pred.size());
  return ct;
}

// Best one-to-one cluster -> class matching over the zero-padded square
// contingency table.
inline double clustering_accuracy(const Labels& pred, const Labels& truth) {
  require(!pred.empty(), ErrorKind::shape_mismatch, "clustering_accuracy: empty labeling");
  const auto ct = contingency(pred, truth);
  const auto size = static_cast<Eigen::Index>(std::max(ct.pred_count(), ct.true_count()));
  Matrix cost = Matrix::Zero(size, size);
  for (std::size_t i = 0; i < ct.pred_count(); ++i) {
    for (std::size_t j = 0; j < ct.true_count(); ++j) cost(i, j) = -static_cast<double>(ct.counts[i][j]);
  }
  const auto match = hungarian(cost);
  return -match.total_cost / static_cast<double>(ct.n);
}

// Pair-count form evaluated in exact integer arithmetic; only the final
// ratio is rounded.
inline double adjusted_rand_index(const Labels& pred, const Labels& truth) {
  require(pred.size() >= 2, ErrorKind::shape_mismatch, "ari: needs at least two samples");
  using wide = __int128;
  auto pairs = [](long x) { return static_cast<wide>(x) * (x - 1) / 2; };
  const auto ct = contingency(pred, truth);
  wide index = 0;
  std::vector<long> rows(ct.pred_count(), 0), cols(ct.true_count(), 0);
  for (std::size_t i = 0; i < ct.pred_count(); ++i) {
    for (std::size_t j = 0; j < ct.true_count(); ++j) {
      index += pairs(ct.counts[i][j]);
      rows[i] += ct.counts[i][j];
      cols[j] += ct.counts[i][j];
    }
  }
  wide sum_rows = 0, sum_cols = 0;
  for (long r : rows) sum_rows += pairs(r);
  for (long c : cols) sum_cols += pairs(c);
  const wide total = pairs(ct.n);
  const wide num = 2 * (total * index - sum_rows * sum_cols);
  const wide den = total * (sum_rows + sum_cols) - 2 * sum_rows * sum_cols;
  // Zero denominator only when both labelings are the same trivial partition.
  if (den == 0) return 1.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

inline double entropy_of_counts(const std::vector<long>& counts, long n) {
  double h = 0.0;
  for (long c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(n);
    h -= p * std::log(p);
  }
  return h;
}

// Mutual information normalized by the arithmetic mean of both entropies.
inline double normalized_mutual_information(const Labels& pred, const Labels& truth) {
  require(!pred.empty(), ErrorKind::shape_mismatch, "nmi: empty labeling");
  const auto ct = contingency(pred, truth);
  std::vector<long> rows(ct.pred_count(), 0), cols(ct.true_count(), 0);
  for (std::size_t i = 0; i < ct.pred_count(); ++i) {
    for (std::size_t j = 0; j < ct.true_count(); ++j) {
      rows[i] += ct.counts[i][j];
      cols[j] += ct.counts[i][j];
    }
  }
  const double h_pred = entropy_of_counts(rows, ct.n);
  const double h_true = entropy_of_counts(cols, ct.n);
  if (h_pred == 0.0 && h_true == 0.0) return 1.0;
  const auto n = static_cast<double>(ct.n);
  double mi = 0.0;
  for (std::size_t i = 0; i < ct.pred_count(); ++i) {
    for (std::size_t j = 0; j < ct.true_count(); ++j) {
      const long c = ct.counts[i][j];
      if (c == 0) continue;
      const double pij = static_cast<double>(c) / n;
      mi += pij * std::log(pij / ((static_cast<double>(rows[i]) / n) * (static_cast<double>(cols[j]) / n)));
    }
  }
  const double denom = (h_pred + h_true) / 2.0;
  return std::clamp(mi / denom, 0.0, 1.0);
}

struct MetricReport {
  double acc = 0.0;
  double ari = 0.0;
  double nmi = 0.0;
};

inline MetricReport score(const Labels& pred, const Labels& truth) {
  return {clustering_accuracy(pred, truth), adjusted_rand_index(pred, truth), normalized_mutual_information(pred, truth)};
}

}  // namespace dcsc
