#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "dcsc/encoder.hpp"
#include "dcsc/error.hpp"
#include "dcsc/matrix.hpp"
#include "dcsc/random.hpp"

namespace dcsc {

inline constexpr double kDefaultTemperature = 0.07;

// Identifies the batch a loss was computed on (hash of the first view).
inline std::uint64_t batch_fingerprint(const Matrix& z) {
  std::string_view bytes(reinterpret_cast<const char*>(z.data()), static_cast<std::size_t>(z.size()) * sizeof(double));
  return fnv1a64(bytes, fnv1a64(std::to_string(z.rows()) + "x" + std::to_string(z.cols())));
}

struct LossOutput {
  double value = 0.0;
  Matrix grad_z;
  Matrix grad_z_prime;
  // Classifier weights (K x D) or prototypes (G x D), when the loss reads them.
  std::optional<Matrix> grad_weights;
  std::uint64_t batch_tag = 0;
  // Number of contrastive anchors that had no positive and were skipped.
  std::size_t skipped_anchors = 0;
};

inline LossOutput zero_loss(const ViewPair& v) {
  LossOutput out;
  out.grad_z = Matrix::Zero(v.z.rows(), v.z.cols());
  out.grad_z_prime = Matrix::Zero(v.z_prime.rows(), v.z_prime.cols());
  out.batch_tag = batch_fingerprint(v.z);
  return out;
}

inline Labels duplicate_labels(const Labels& y) {
  Labels out(y);
  out.insert(out.end(), y.begin(), y.end());
  return out;
}

// Mean over the batch of -log softmax(W z_i)[y_i]. The second view is not
// read; its gradient is zero.
inline LossOutput cross_entropy(const ViewPair& views, const Labels& labels, const Matrix& weights) {
  const Matrix& z = views.z;
  const auto n = z.rows();
  const auto k = weights.rows();
  require(static_cast<Eigen::Index>(labels.size()) == n, ErrorKind::shape_mismatch, "cross_entropy: label count");
  require(weights.cols() == z.cols(), ErrorKind::shape_mismatch, "cross_entropy: weight dimension");
  require(n >= 1 && k >= 1, ErrorKind::shape_mismatch, "cross_entropy: empty batch or classifier");
  for (int y : labels) {
    if (y < 0 || y >= k) fail(ErrorKind::invalid_label, "label " + std::to_string(y) + " outside [0, " + std::to_string(k) + ")");
  }
  const Matrix logits = z * weights.transpose();
  Matrix dlogits = row_softmax(logits);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    total += log_sum_exp(logits.row(i)) - logits(i, labels[i]);
    dlogits(i, labels[i]) -= 1.0;
  }
  dlogits /= static_cast<double>(n);

  LossOutput out;
  out.value = total / static_cast<double>(n);
  out.grad_z = dlogits * weights;
  out.grad_z_prime = Matrix::Zero(views.z_prime.rows(), views.z_prime.cols());
  out.grad_weights = dlogits.transpose() * z;
  out.batch_tag = batch_fingerprint(z);
  return out;
}

namespace detail {

// Shared machinery for every contrastive term. Rows of the stacked 2N x D
// matrix are anchors; positives of anchor i are the other rows with the same
// group id. The value is summed over anchors, each anchor contributing the
// mean over its positives of -log(exp(s_ip) / sum_{j != i} exp(s_ij)).
inline LossOutput contrastive(const ViewPair& views, const Labels& groups, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) fail(ErrorKind::invalid_temperature, "temperature must be positive");
  const auto n = views.z.rows();
  require(views.z_prime.rows() == n && views.z_prime.cols() == views.z.cols(), ErrorKind::shape_mismatch,
          "contrastive: views differ in shape");
  const auto m = 2 * n;
  require(static_cast<Eigen::Index>(groups.size()) == m, ErrorKind::shape_mismatch,
          "contrastive: expected " + std::to_string(m) + " row labels");

  const Matrix all = views.stacked();
  const Matrix sim = (all * all.transpose()) / tau;
  Matrix coeff = Matrix::Zero(m, m);
  double total = 0.0;
  std::size_t skipped = 0;
  RowVector probs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    std::size_t positives = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j != i && groups[j] == groups[i]) ++positives;
    }
    if (positives == 0) {
      ++skipped;
      continue;
    }
    double row_max = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j != i) row_max = std::max(row_max, sim(i, j));
    }
    double denom = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      probs(j) = j == i ? 0.0 : std::exp(sim(i, j) - row_max);
      denom += probs(j);
    }
    const double lse = row_max + std::log(denom);
    const double inv_pos = 1.0 / static_cast<double>(positives);
    double term = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j == i) continue;
      coeff(i, j) = probs(j) / denom;
      if (groups[j] == groups[i]) {
        term += lse - sim(i, j);
        coeff(i, j) -= inv_pos;
      }
    }
    total += term * inv_pos;
  }

  const Matrix grad_all = ((coeff + coeff.transpose()) * all) / tau;
  LossOutput out;
  out.value = total;
  out.grad_z = grad_all.topRows(n);
  out.grad_z_prime = grad_all.bottomRows(n);
  out.batch_tag = batch_fingerprint(views.z);
  out.skipped_anchors = skipped;
  return out;
}

}  // namespace detail

// `labels` holds one label per stacked row (2N); see duplicate_labels().
inline LossOutput supervised_contrastive(const ViewPair& views, const Labels& labels, double tau = kDefaultTemperature) {
  return detail::contrastive(views, labels, tau);
}

// Each anchor's only positive is the other view of the same sample.
inline LossOutput unsupervised_contrastive(const ViewPair& views, double tau = kDefaultTemperature) {
  const auto n = static_cast<int>(views.z.rows());
  Labels instance(2 * static_cast<std::size_t>(n));
  for (int i = 0; i < 2 * n; ++i) instance[i] = i % n;
  return detail::contrastive(views, instance, tau);
}

// Positives come from hard pseudo labels B || B'. Anchors without positives
// contribute nothing.
inline LossOutput pseudo_supervised_contrastive(const ViewPair& views, const Labels& pseudo_labels,
                                                double tau = kDefaultTemperature) {
  return detail::contrastive(views, pseudo_labels, tau);
}

struct ClusterLogits {
  Matrix q;
  Matrix q_prime;
};

inline ClusterLogits cluster_logits(const ViewPair& views, const Matrix& prototypes) {
  require(prototypes.cols() == views.z.cols(), ErrorKind::shape_mismatch,
          "cluster_logits: prototype dimension " + std::to_string(prototypes.cols()) + " vs representation dimension " +
              std::to_string(views.z.cols()));
  return {views.z * prototypes.transpose(), views.z_prime * prototypes.transpose()};
}

struct SwappedOutput {
  double value = 0.0;
  double left = 0.0;
  double right = 0.0;
  Matrix grad_q;
  Matrix grad_q_prime;
};

inline void require_distribution_rows(const Matrix& a, const char* name) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double s = a.row(i).sum();
    if (!(std::abs(s - 1.0) <= 1e-6)) {
      fail(ErrorKind::invalid_assignment, std::string(name) + " row " + std::to_string(i) + " sums to " + std::to_string(s));
    }
  }
}

// Each view predicts the soft assignment computed from the other view; the
// result is the mean of both directions. Targets are constants.
inline SwappedOutput swapped_cross_entropy(const Matrix& q, const Matrix& q_prime, const Matrix& a,
                                           const Matrix& a_prime) {
  const auto n = q.rows();
  const auto g = q.cols();
  require(n >= 1, ErrorKind::shape_mismatch, "swapped_cross_entropy: empty batch");
  require_shape(q_prime, n, g, "Q'");
  require_shape(a, n, g, "A");
  require_shape(a_prime, n, g, "A'");
  require_distribution_rows(a, "A");
  require_distribution_rows(a_prime, "A'");

  auto one_side = [n](const Matrix& logits, const Matrix& target, Matrix& grad) {
    const Matrix p = row_softmax(logits);
    double total = 0.0;
    grad.resize(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      const double lse = log_sum_exp(logits.row(i));
      const double mass = target.row(i).sum();
      for (Eigen::Index j = 0; j < logits.cols(); ++j) total -= target(i, j) * (logits(i, j) - lse);
      grad.row(i) = mass * p.row(i) - target.row(i);
    }
    return total / static_cast<double>(n);
  };

  SwappedOutput out;
  out.left = one_side(q, a_prime, out.grad_q);
  out.right = one_side(q_prime, a, out.grad_q_prime);
  out.value = (out.left + out.right) / 2.0;
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  out.grad_q *= scale;
  out.grad_q_prime *= scale;
  return out;
}

// Logits from the prototypes, swapped prediction against fixed soft targets,
// gradients chained back to both views and to the prototypes.
inline LossOutput sinkhorn_swapped_loss(const ViewPair& views, const Matrix& prototypes, const Matrix& a,
                                        const Matrix& a_prime) {
  const auto logits = cluster_logits(views, prototypes);
  const auto s = swapped_cross_entropy(logits.q, logits.q_prime, a, a_prime);
  LossOutput out;
  out.value = s.value;
  out.grad_z = s.grad_q * prototypes;
  out.grad_z_prime = s.grad_q_prime * prototypes;
  out.grad_weights = s.grad_q.transpose() * views.z + s.grad_q_prime.transpose() * views.z_prime;
  out.batch_tag = batch_fingerprint(views.z);
  return out;
}

// Unweighted sum of two loss terms computed on the same batch.
inline LossOutput compose(const LossOutput& first, const LossOutput& second) {
  require(first.batch_tag == second.batch_tag, ErrorKind::usage, "compose: loss terms come from different batches");
  LossOutput out = first;
  out.value += second.value;
  out.grad_z += second.grad_z;
  out.grad_z_prime += second.grad_z_prime;
  if (second.grad_weights) {
    if (out.grad_weights) {
      require(out.grad_weights->rows() == second.grad_weights->rows() &&
                  out.grad_weights->cols() == second.grad_weights->cols(),
              ErrorKind::shape_mismatch, "compose: weight gradients differ in shape");
      *out.grad_weights += *second.grad_weights;
    } else {
      out.grad_weights = second.grad_weights;
    }
  }
  out.skipped_anchors += second.skipped_anchors;
  return out;
}

// Supervised objective of either stage: cross entropy + supervised contrastive.
inline LossOutput supervised_objective(const ViewPair& views, const Labels& labels, const Matrix& classifier,
                                       double tau) {
  return compose(cross_entropy(views, labels, classifier), supervised_contrastive(views, duplicate_labels(labels), tau));
}

}  // namespace dcsc
