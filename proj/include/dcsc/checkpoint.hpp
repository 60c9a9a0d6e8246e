#pragma once

#include <fstream>
#include <string>

#include "json.hpp"

#include "dcsc/encoder.hpp"
#include "dcsc/error.hpp"
#include "dcsc/prototypes.hpp"
#include "dcsc/trainer.hpp"

namespace dcsc {

inline constexpr const char* kCheckpointFormat = "dcsc-checkpoint";
inline constexpr int kCheckpointVersion = 1;

using json = nlohmann::json;

// Tensors are {"shape": [rows, cols], "data": [row-major values]}.
template <typename Derived>
json tensor_to_json(const Eigen::MatrixBase<Derived>& m) {
  json j;
  j["shape"] = {m.rows(), m.cols()};
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) data.push_back(m(i, k));
  }
  j["data"] = std::move(data);
  return j;
}

inline Matrix tensor_from_json(const json& j, const std::string& what) {
  try {
    const auto shape = j.at("shape").get<std::vector<long>>();
    const auto data = j.at("data").get<std::vector<double>>();
    require(shape.size() == 2 && shape[0] >= 0 && shape[1] >= 0, ErrorKind::malformed_corpus, what + ": bad shape");
    require(static_cast<long>(data.size()) == shape[0] * shape[1], ErrorKind::shape_mismatch,
            what + ": data length does not match shape");
    Matrix m(shape[0], shape[1]);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = data[static_cast<std::size_t>(i)];
    return m;
  } catch (const json::exception& e) {
    fail(ErrorKind::malformed_corpus, what + ": " + e.what());
  }
}

inline json encoder_config_to_json(const EncoderConfig& c) {
  return {{"input_dim", c.input_dim},
          {"hidden_dims", c.hidden_dims},
          {"output_dim", c.output_dim},
          {"hidden_activation", to_string(c.hidden_activation)},
          {"head_activation", to_string(c.head_activation)},
          {"dropout", c.dropout},
          {"normalize_output", c.normalize_output},
          {"init", to_string(c.init)},
          {"init_noise", c.init_noise}};
}

inline EncoderConfig encoder_config_from_json(const json& j, EncoderConfig c = {}) {
  c.input_dim = j.value("input_dim", c.input_dim);
  c.hidden_dims = j.value("hidden_dims", c.hidden_dims);
  c.output_dim = j.value("output_dim", c.output_dim);
  c.hidden_activation = activation_from_string(j.value("hidden_activation", std::string(to_string(c.hidden_activation))));
  c.head_activation = activation_from_string(j.value("head_activation", std::string(to_string(c.head_activation))));
  c.dropout = j.value("dropout", c.dropout);
  c.normalize_output = j.value("normalize_output", c.normalize_output);
  c.init = weight_init_from_string(j.value("init", std::string(to_string(c.init))));
  c.init_noise = j.value("init_noise", c.init_noise);
  validate(c);
  return c;
}

inline json encoder_to_json(const EncoderParams& p) {
  json j;
  j["config"] = encoder_config_to_json(p.config);
  j["layers"] = json::array();
  for (const auto& l : p.layers) j["layers"].push_back({{"weight", tensor_to_json(l.weight)}, {"bias", tensor_to_json(l.bias)}});
  if (p.input_mean.size() > 0) {
    j["input_mean"] = tensor_to_json(p.input_mean);
    j["input_scale"] = tensor_to_json(p.input_scale);
  }
  return j;
}

inline EncoderParams encoder_from_json(const json& j) {
  EncoderParams p;
  p.config = encoder_config_from_json(j.at("config"));
  std::size_t in = p.config.input_dim;
  auto widths = p.config.hidden_dims;
  widths.push_back(p.config.output_dim);
  const auto& layers = j.at("layers");
  require(layers.size() == widths.size(), ErrorKind::shape_mismatch, "checkpoint layer count does not match config");
  for (std::size_t l = 0; l < widths.size(); ++l) {
    DenseLayer d{tensor_from_json(layers[l].at("weight"), "layer weight"), tensor_from_json(layers[l].at("bias"), "layer bias")};
    require_shape(d.weight, static_cast<Eigen::Index>(widths[l]), static_cast<Eigen::Index>(in), "layer weight");
    require_shape(d.bias, 1, static_cast<Eigen::Index>(widths[l]), "layer bias");
    p.layers.push_back(std::move(d));
    in = widths[l];
  }
  if (j.contains("input_mean")) {
    p.input_mean = tensor_from_json(j["input_mean"], "input_mean");
    p.input_scale = tensor_from_json(j["input_scale"], "input_scale");
    require(p.input_mean.size() == static_cast<Eigen::Index>(p.config.input_dim) &&
                p.input_scale.size() == p.input_mean.size(),
            ErrorKind::shape_mismatch, "input standardization shape");
  }
  return p;
}

struct Checkpoint {
  std::string stage;  // "warmup" or "cluster"
  EncoderParams encoder;
  Matrix classifier;  // warm-up stage only
  std::optional<PrototypeBank> head;
  int known_intents = 0;
  int num_intents = 0;
};

inline Checkpoint checkpoint_of(const TrainState& s, const std::string& stage) {
  return {stage, s.encoder, s.head ? Matrix() : s.warmup_classifier, s.head, s.known_intents, s.num_intents};
}

inline json checkpoint_to_json(const Checkpoint& c) {
  json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["stage"] = c.stage;
  j["known_intents"] = c.known_intents;
  j["num_intents"] = c.num_intents;
  j["encoder"] = encoder_to_json(c.encoder);
  if (c.head) {
    j["head"] = {{"known_count", c.head->known_count}, {"prototypes", tensor_to_json(c.head->prototypes)}};
  } else {
    j["classifier"] = tensor_to_json(c.classifier);
  }
  return j;
}

inline Checkpoint checkpoint_from_json(const json& j) {
  require(j.value("format", std::string()) == kCheckpointFormat, ErrorKind::malformed_corpus, "not a checkpoint file");
  require(j.value("version", 0) == kCheckpointVersion, ErrorKind::malformed_corpus, "unsupported checkpoint version");
  Checkpoint c;
  c.stage = j.value("stage", std::string());
  c.known_intents = j.at("known_intents").get<int>();
  c.num_intents = j.at("num_intents").get<int>();
  c.encoder = encoder_from_json(j.at("encoder"));
  if (j.contains("head")) {
    PrototypeBank bank{tensor_from_json(j["head"].at("prototypes"), "prototypes"), j["head"].at("known_count").get<int>()};
    require(bank.prototypes.cols() == static_cast<Eigen::Index>(c.encoder.output_dim()), ErrorKind::shape_mismatch,
            "prototype dimension does not match encoder output");
    c.head = std::move(bank);
  } else if (j.contains("classifier")) {
    c.classifier = tensor_from_json(j["classifier"], "classifier");
  }
  return c;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& c) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write checkpoint '" + path + "'");
  out << checkpoint_to_json(c).dump() << '\n';
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open checkpoint '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::malformed_corpus, "checkpoint '" + path + "': " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace dcsc
