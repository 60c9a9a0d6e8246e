#pragma once

#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"

#include "dcsc/data.hpp"
#include "dcsc/error.hpp"

namespace dcsc {

using json = nlohmann::json;

inline json features_to_json(const Features& f) {
  if (const auto* v = std::get_if<FeatureVector>(&f)) return json(*v);
  return json(std::get<TokenSequence>(f));
}

inline json sample_to_json(const Sample& s) {
  json j;
  j["id"] = s.id;
  j["features"] = features_to_json(s.features);
  j["label"] = s.label ? json(*s.label) : json(nullptr);
  return j;
}

inline Sample sample_from_json(const json& j, std::size_t line_no) {
  const auto where = "line " + std::to_string(line_no);
  require(j.is_object(), ErrorKind::malformed_corpus, where + ": expected an object");
  require(j.contains("id") && j.contains("features"), ErrorKind::malformed_corpus,
          where + ": missing id or features");
  Sample s;
  s.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
  const auto& f = j["features"];
  require(f.is_array() && !f.empty(), ErrorKind::malformed_sample, where + ": features must be a non-empty array");
  try {
    if (f.front().is_array()) {
      s.features = f.get<TokenSequence>();
    } else {
      s.features = f.get<FeatureVector>();
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::malformed_sample, where + ": " + e.what());
  }
  if (j.contains("label") && !j["label"].is_null()) {
    require(j["label"].is_number_integer(), ErrorKind::malformed_corpus, where + ": label must be an integer or null");
    s.label = j["label"].get<int>();
  }
  return s;
}

inline void finish_corpus(Corpus& c, std::optional<int> num_intents) {
  if (num_intents) {
    c.num_intents = *num_intents;
  } else {
    int max_label = -1;
    for (const auto& s : c.samples) {
      if (s.label) max_label = std::max(max_label, *s.label);
    }
    c.num_intents = max_label + 1;
  }
  validate(c);
}

// When num_intents is not given it is inferred as max label + 1.
inline Corpus read_jsonl_stream(std::istream& in, std::optional<int> num_intents = {}) {
  Corpus c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ErrorKind::malformed_corpus, "line " + std::to_string(line_no) + ": " + e.what());
    }
    c.samples.push_back(sample_from_json(j, line_no));
  }
  finish_corpus(c, num_intents);
  return c;
}

inline void write_jsonl_stream(std::ostream& out, const Corpus& c) {
  for (const auto& s : c.samples) out << sample_to_json(s).dump() << '\n';
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

// Columns: id, label, f0..fD. An empty label cell marks an unlabeled sample.
// A first row starting with "id" is treated as a header.
inline Corpus read_csv_stream(std::istream& in, std::optional<int> num_intents = {}) {
  Corpus c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    if (line_no == 1 && !cells.empty() && cells[0] == "id") continue;
    const auto where = "line " + std::to_string(line_no);
    require(cells.size() >= 3, ErrorKind::malformed_corpus, where + ": expected id, label and features");
    Sample s;
    s.id = cells[0];
    try {
      if (!cells[1].empty()) s.label = std::stoi(cells[1]);
      FeatureVector v;
      for (std::size_t k = 2; k < cells.size(); ++k) v.push_back(std::stod(cells[k]));
      s.features = std::move(v);
    } catch (const std::logic_error&) {
      fail(ErrorKind::malformed_corpus, where + ": unparseable number");
    }
    c.samples.push_back(std::move(s));
  }
  finish_corpus(c, num_intents);
  return c;
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline Corpus read_corpus(const std::string& path, std::optional<int> num_intents = {}) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open corpus '" + path + "'");
  return ends_with(path, ".csv") ? read_csv_stream(in, num_intents) : read_jsonl_stream(in, num_intents);
}

inline void write_jsonl(const std::string& path, const Corpus& c) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write '" + path + "'");
  write_jsonl_stream(out, c);
}

// FNV-1a over the canonical JSONL serialization.
inline std::string corpus_fingerprint(const Corpus& c) {
  std::ostringstream ss;
  write_jsonl_stream(ss, c);
  std::ostringstream hex;
  hex << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(ss.str());
  return hex.str();
}

}  // namespace dcsc
