#pragma once

#include <cmath>

#include "dcsc/encoder.hpp"
#include "dcsc/matrix.hpp"

namespace dcsc {

struct AdamWConfig {
  double learning_rate = 5e-5;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamSlot {
  Matrix m;
  Matrix v;
  long step = 0;
};

// Adam with decoupled weight decay: param *= 1 - lr * wd, then the
// bias-corrected moment step.
inline void adamw_update(const AdamWConfig& c, Matrix& param, const Matrix& grad, AdamSlot& slot) {
  if (slot.m.size() == 0) {
    slot.m = Matrix::Zero(param.rows(), param.cols());
    slot.v = Matrix::Zero(param.rows(), param.cols());
  }
  ++slot.step;
  slot.m = c.beta1 * slot.m + (1.0 - c.beta1) * grad;
  slot.v = c.beta2 * slot.v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(slot.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(slot.step));
  param *= 1.0 - c.learning_rate * c.weight_decay;
  param.array() -= c.learning_rate * (slot.m.array() / bc1) / ((slot.v.array() / bc2).sqrt() + c.epsilon);
}

struct EncoderMoments {
  std::vector<AdamSlot> weights;
  std::vector<AdamSlot> biases;
};

inline void adamw_update(const AdamWConfig& c, EncoderParams& p, const EncoderGrads& g, EncoderMoments& moments) {
  moments.weights.resize(p.layers.size());
  moments.biases.resize(p.layers.size());
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    adamw_update(c, p.layers[l].weight, g.layers[l].weight, moments.weights[l]);
    adamw_update(c, p.layers[l].bias, g.layers[l].bias, moments.biases[l]);
  }
}

}  // namespace dcsc
