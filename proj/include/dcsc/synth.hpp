#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "dcsc/data.hpp"
#include "dcsc/error.hpp"
#include "dcsc/random.hpp"

namespace dcsc {

struct TokenMode {
  int min_length = 2;
  int max_length = 6;
};

struct BlobSpec {
  int num_clusters = 10;
  int samples_per_cluster = 200;
  int input_dim = 16;
  double center_scale = 10.0;
  double noise_sigma = 0.5;
  std::uint64_t seed = 0;
  std::optional<TokenMode> tokens;
  // Anisotropic per-axis spread and centers squeezed together; for stress
  // runs only.
  bool hard_mode = false;
};

// Gaussian blobs around centers drawn uniformly from [-scale/2, scale/2]^D.
// Labels are cluster ids; samples are emitted cluster by cluster.
inline Corpus generate(const BlobSpec& spec) {
  require(spec.num_clusters >= 1 && spec.samples_per_cluster >= 1 && spec.input_dim >= 1, ErrorKind::invalid_spec,
          "blob counts and dimension must be positive");
  require(spec.noise_sigma >= 0.0 && spec.center_scale > 0.0, ErrorKind::invalid_spec,
          "noise sigma must be non-negative and center scale positive");
  if (spec.tokens) {
    require(spec.tokens->min_length >= 1 && spec.tokens->max_length >= spec.tokens->min_length, ErrorKind::invalid_spec,
            "token sequence length range is invalid");
  }
  Rng rng(spec.seed);
  const auto d = static_cast<std::size_t>(spec.input_dim);
  const double half = spec.hard_mode ? spec.center_scale / 4.0 : spec.center_scale / 2.0;

  std::vector<FeatureVector> centers(static_cast<std::size_t>(spec.num_clusters), FeatureVector(d));
  std::vector<FeatureVector> spread(static_cast<std::size_t>(spec.num_clusters), FeatureVector(d, spec.noise_sigma));
  for (int g = 0; g < spec.num_clusters; ++g) {
    for (std::size_t k = 0; k < d; ++k) centers[g][k] = rng.uniform(-half, half);
    if (spec.hard_mode) {
      for (std::size_t k = 0; k < d; ++k) spread[g][k] = spec.noise_sigma * rng.uniform(0.25, 2.0);
    }
  }

  Corpus c;
  c.num_intents = spec.num_clusters;
  for (int g = 0; g < spec.num_clusters; ++g) {
    for (int i = 0; i < spec.samples_per_cluster; ++i) {
      FeatureVector x(d);
      for (std::size_t k = 0; k < d; ++k) x[k] = centers[g][k] + spread[g][k] * rng.normal();
      Sample s;
      s.id = "c" + std::to_string(g) + "_" + std::to_string(i);
      s.label = g;
      if (spec.tokens) {
        const int span = spec.tokens->max_length - spec.tokens->min_length + 1;
        const int len = spec.tokens->min_length + static_cast<int>(rng.below(static_cast<std::uint64_t>(span)));
        TokenSequence seq(static_cast<std::size_t>(len), FeatureVector(d));
        for (auto& tok : seq) {
          for (std::size_t k = 0; k < d; ++k) tok[k] = x[k] + spread[g][k] * rng.normal();
        }
        s.features = std::move(seq);
      } else {
        s.features = std::move(x);
      }
      c.samples.push_back(std::move(s));
    }
  }
  return c;
}

}  // namespace dcsc
