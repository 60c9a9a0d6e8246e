#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dcsc/data.hpp"
#include "dcsc/error.hpp"
#include "dcsc/matrix.hpp"
#include "dcsc/random.hpp"

namespace dcsc {

inline FeatureVector mean_pool(const TokenSequence& tokens) {
  require(!tokens.empty(), ErrorKind::malformed_sample, "mean_pool of an empty token sequence");
  FeatureVector out(tokens.front().size(), 0.0);
  for (const auto& t : tokens) {
    require(t.size() == out.size(), ErrorKind::malformed_sample, "ragged token sequence");
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += t[k];
  }
  const auto n = static_cast<double>(tokens.size());
  for (double& x : out) x /= n;
  return out;
}

inline FeatureVector pool(const Features& f) {
  if (const auto* v = std::get_if<FeatureVector>(&f)) return *v;
  return mean_pool(std::get<TokenSequence>(f));
}

enum class Activation { identity, tanh, relu };

// glorot: uniform Glorot weights. near_identity: identity on the leading
// min(in, out) block plus small Glorot noise, so an untrained encoder starts
// close to an isometric embedding of its (standardized) input.
enum class WeightInit { glorot, near_identity };

inline const char* to_string(WeightInit w) { return w == WeightInit::glorot ? "glorot" : "near_identity"; }

inline WeightInit weight_init_from_string(const std::string& s) {
  if (s == "glorot") return WeightInit::glorot;
  if (s == "near_identity") return WeightInit::near_identity;
  fail(ErrorKind::invalid_spec, "unknown weight init '" + s + "'");
}

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
  }
  return "identity";
}

inline Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "relu") return Activation::relu;
  if (s == "identity" || s == "none") return Activation::identity;
  fail(ErrorKind::invalid_spec, "unknown activation '" + s + "'");
}

struct EncoderConfig {
  std::size_t input_dim = 16;
  std::vector<std::size_t> hidden_dims{64};
  std::size_t output_dim = 32;
  Activation hidden_activation = Activation::tanh;
  Activation head_activation = Activation::identity;
  double dropout = 0.1;
  bool normalize_output = true;
  WeightInit init = WeightInit::glorot;
  double init_noise = 0.05;  // near_identity: scale of the Glorot perturbation
};

struct DenseLayer {
  Matrix weight;  // out x in
  Matrix bias;    // 1 x out
};

struct EncoderParams {
  EncoderConfig config;
  std::vector<DenseLayer> layers;  // hidden layers, then the representation head
  // Fixed input standardization (x - mean) / scale; not trained. Empty means
  // identity.
  RowVector input_mean;
  RowVector input_scale;

  std::size_t input_dim() const { return config.input_dim; }
  std::size_t output_dim() const { return config.output_dim; }
};

inline void validate(const EncoderConfig& c) {
  require(c.input_dim >= 1 && c.output_dim >= 1, ErrorKind::invalid_spec, "encoder dimensions must be positive");
  for (auto h : c.hidden_dims) require(h >= 1, ErrorKind::invalid_spec, "hidden widths must be positive");
  require(c.dropout >= 0.0 && c.dropout < 1.0, ErrorKind::invalid_spec, "dropout must lie in [0, 1)");
}

// Glorot-uniform weights, zero biases.
inline EncoderParams init_encoder(const EncoderConfig& config, std::uint64_t seed) {
  validate(config);
  EncoderParams p;
  p.config = config;
  Rng rng(seed);
  std::size_t in = config.input_dim;
  auto widths = config.hidden_dims;
  widths.push_back(config.output_dim);
  for (auto out : widths) {
    DenseLayer layer;
    const double a = std::sqrt(6.0 / static_cast<double>(in + out));
    layer.weight.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = rng.uniform(-a, a);
    if (config.init == WeightInit::near_identity) {
      layer.weight *= config.init_noise;
      for (Eigen::Index k = 0; k < std::min(layer.weight.rows(), layer.weight.cols()); ++k) layer.weight(k, k) += 1.0;
    }
    layer.bias = Matrix::Zero(1, static_cast<Eigen::Index>(out));
    p.layers.push_back(std::move(layer));
    in = out;
  }
  return p;
}

struct EncoderGrads {
  std::vector<DenseLayer> layers;

  static EncoderGrads zeros_like(const EncoderParams& p) {
    EncoderGrads g;
    for (const auto& l : p.layers) {
      g.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Matrix::Zero(1, l.bias.cols())});
    }
    return g;
  }

  EncoderGrads& operator+=(const EncoderGrads& o) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      layers[i].weight += o.layers[i].weight;
      layers[i].bias += o.layers[i].bias;
    }
    return *this;
  }
};

// Everything backward() needs from one forward pass. Owned by the caller.
struct ForwardCache {
  std::vector<Matrix> inputs;       // input to each layer (after dropout for hidden outputs)
  std::vector<Matrix> preacts;      // per layer pre-activation
  std::vector<Matrix> masks;        // per hidden layer, scaled keep mask (empty when no dropout)
  Matrix head_out;                  // head output before normalization
  Vector row_norms;                 // norms of head_out rows (normalize mode)
  Matrix output;
  bool valid = false;
};

inline double activate(Activation a, double x) {
  switch (a) {
    case Activation::tanh: return std::tanh(x);
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::identity: return x;
  }
  return x;
}

// Derivative expressed through pre-activation x and activation y.
inline double activate_grad(Activation a, double x, double y) {
  switch (a) {
    case Activation::tanh: return 1.0 - y * y;
    case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::identity: return 1.0;
  }
  return 1.0;
}

inline constexpr double kMinNorm = 1e-12;

// One pass. With train = true, inverted-dropout masks are drawn from
// dropout_seed after every hidden layer.
inline Matrix forward(const EncoderParams& p, const Matrix& x, std::uint64_t dropout_seed, bool train,
                      ForwardCache* cache = nullptr) {
  require(x.cols() == static_cast<Eigen::Index>(p.input_dim()), ErrorKind::shape_mismatch,
          "encoder input has " + std::to_string(x.cols()) + " columns, expected " + std::to_string(p.input_dim()));
  require(x.allFinite(), ErrorKind::numeric_overflow, "encoder input is not finite");
  const double rate = p.config.dropout;
  const bool use_dropout = train && rate > 0.0;
  const double keep_scale = 1.0 / (1.0 - rate);
  Rng rng(dropout_seed);
  if (cache) *cache = ForwardCache{};

  Matrix h = x;
  if (p.input_mean.size() == x.cols()) {
    h.rowwise() -= p.input_mean;
    h.array().rowwise() /= p.input_scale.array();
  }
  const std::size_t hidden = p.layers.size() - 1;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& layer = p.layers[l];
    if (cache) cache->inputs.push_back(h);
    Matrix a = h * layer.weight.transpose();
    a.rowwise() += layer.bias.row(0);
    const Activation act = l < hidden ? p.config.hidden_activation : p.config.head_activation;
    Matrix y = a.unaryExpr([act](double v) { return activate(act, v); });
    if (!y.allFinite()) {
      fail(ErrorKind::numeric_overflow,
           "non-finite activation in " + (l < hidden ? "hidden layer " + std::to_string(l) : std::string("head layer")));
    }
    if (cache) cache->preacts.push_back(a);
    if (l < hidden) {
      if (use_dropout) {
        Matrix mask(y.rows(), y.cols());
        for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng.bernoulli(rate) ? 0.0 : keep_scale;
        y = y.cwiseProduct(mask);
        if (cache) cache->masks.push_back(std::move(mask));
      } else if (cache) {
        cache->masks.emplace_back();
      }
    }
    h = std::move(y);
  }

  Matrix out = h;
  if (cache) cache->head_out = h;
  if (p.config.normalize_output) {
    Vector norms = h.rowwise().norm();
    for (Eigen::Index i = 0; i < h.rows(); ++i) out.row(i) /= std::max(norms(i), kMinNorm);
    if (cache) cache->row_norms = std::move(norms);
  }
  if (cache) {
    cache->output = out;
    cache->valid = true;
  }
  return out;
}

// Per-feature mean and standard deviation of x become the encoder's input
// transform. Constant features get scale 1.
inline void fit_input_standardization(EncoderParams& p, const Matrix& x) {
  require(x.cols() == static_cast<Eigen::Index>(p.input_dim()), ErrorKind::shape_mismatch,
          "standardization data dimension");
  require(x.rows() >= 1, ErrorKind::insufficient_data, "standardization needs at least one row");
  p.input_mean = x.colwise().mean();
  p.input_scale.resize(x.cols());
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const double var = (x.col(k).array() - p.input_mean(k)).square().mean();
    p.input_scale(k) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
}

inline Matrix encode(const EncoderParams& p, const Matrix& x) { return forward(p, x, 0, false); }

struct ViewPair {
  Matrix z;
  Matrix z_prime;
  std::pair<std::uint64_t, std::uint64_t> dropout_mask_seeds{0, 0};

  Eigen::Index size() const { return z.rows(); }
  Matrix stacked() const { return stack_rows(z, z_prime); }
};

struct TwoViewForward {
  ViewPair views;
  ForwardCache cache;
  ForwardCache cache_prime;
};

inline TwoViewForward forward_two_views(const EncoderParams& p, const Matrix& x, std::uint64_t seed,
                                        std::uint64_t seed_prime) {
  TwoViewForward out;
  out.views.z = forward(p, x, seed, true, &out.cache);
  out.views.z_prime = forward(p, x, seed_prime, true, &out.cache_prime);
  out.views.dropout_mask_seeds = {seed, seed_prime};
  return out;
}

inline EncoderGrads backward(const EncoderParams& p, const ForwardCache& cache, const Matrix& upstream) {
  require(cache.valid, ErrorKind::usage, "backward called without a forward cache");
  require_shape(upstream, cache.output.rows(), cache.output.cols(), "upstream gradient");
  EncoderGrads g = EncoderGrads::zeros_like(p);

  Matrix d = upstream;
  if (p.config.normalize_output) {
    // d(y/|y|) = (I - z z^T) / |y|
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      const double n = std::max(cache.row_norms(i), kMinNorm);
      if (cache.row_norms(i) < kMinNorm) {
        d.row(i) /= n;
      } else {
        const auto z = cache.output.row(i);
        d.row(i) = (d.row(i) - d.row(i).dot(z) * z) / n;
      }
    }
  }

  const std::size_t hidden = p.layers.size() - 1;
  for (std::size_t l = p.layers.size(); l-- > 0;) {
    const auto& layer = p.layers[l];
    const Activation act = l < hidden ? p.config.hidden_activation : p.config.head_activation;
    const Matrix& a = cache.preacts[l];
    if (l < hidden && cache.masks[l].size() != 0) d = d.cwiseProduct(cache.masks[l]);
    if (act != Activation::identity) {
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        const double x = a.data()[i];
        d.data()[i] *= activate_grad(act, x, activate(act, x));
      }
    }
    g.layers[l].weight = d.transpose() * cache.inputs[l];
    g.layers[l].bias = d.colwise().sum();
    if (l > 0) d = d * layer.weight;
  }
  return g;
}

inline EncoderGrads backward_two_views(const EncoderParams& p, const TwoViewForward& fwd, const Matrix& grad_z,
                                       const Matrix& grad_z_prime) {
  EncoderGrads g = backward(p, fwd.cache, grad_z);
  g += backward(p, fwd.cache_prime, grad_z_prime);
  return g;
}

}  // namespace dcsc
