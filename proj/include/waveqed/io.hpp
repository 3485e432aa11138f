#pragma once

// Result serialization and experiment configuration files.
//
// CSV: UTF-8, header row, doubles at 17 significant digits (round-trip
// exact). Files are written to a temporary name and renamed into place, so
// a failed run never leaves a partial table behind.
//
// Config: flat key=value text, '#' comments; unknown keys are hard errors.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "waveqed/ensemble.hpp"

namespace waveqed {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Column-oriented CSV table; all columns must end up the same length.
class CsvTable {
public:
  void add_column(std::string name) {
    header_.push_back(std::move(name));
    columns_.emplace_back();
  }

  void push(std::size_t col, double v) {
    columns_.at(col).push_back(format_double(v));
  }

  void push(std::size_t col, const std::string& v) {
    columns_.at(col).push_back(v);
  }

  std::string to_string() const {
    std::ostringstream os;
    for (std::size_t c = 0; c < header_.size(); ++c)
      os << header_[c] << (c + 1 < header_.size() ? ',' : '\n');
    const std::size_t rows = columns_.empty() ? 0 : columns_.front().size();
    for (const auto& col : columns_)
      if (col.size() != rows)
        throw std::logic_error("CsvTable: ragged columns");
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < columns_.size(); ++c)
        os << columns_[c][r] << (c + 1 < columns_.size() ? ',' : '\n');
    return os.str();
  }

  std::size_t rows() const {
    return columns_.empty() ? 0 : columns_.front().size();
  }

private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> columns_;
};

inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string file_digest_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
  char out[32];
  std::snprintf(out, sizeof(out), "fnv1a64:%016llx",
                static_cast<unsigned long long>(h));
  return out;
}

// ---- flat key=value configuration files ----

inline std::map<std::string, std::string> parse_key_values(
    std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    if (strip(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    const std::string key = strip(line.substr(0, eq));
    const std::string val = strip(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    if (kv.count(key))
      throw std::invalid_argument("config: duplicate key '" + key + "'");
    kv[key] = val;
  }
  return kv;
}

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': bad number '" + v + "'");
  }
  if (used != v.size())
    throw std::invalid_argument("config key '" + key + "': bad number '" + v + "'");
  return out;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': bad integer '" + v + "'");
  }
  if (used != v.size())
    throw std::invalid_argument("config key '" + key + "': bad integer '" + v + "'");
  return out;
}

} // namespace detail

// Applies key=value pairs onto a config. Keys mirror the struct: profile.kind,
// profile.size_k, mean_n, atom_number_mode, realizations, time.tmax_tau,
// time.points, master_seed, which, alphas.
inline void apply_config_keys(ExperimentConfig& cfg,
                              const std::map<std::string, std::string>& kv) {
  for (const auto& [key, val] : kv) {
    if (key == "profile.kind") {
      if (val == "gaussian") cfg.profile.kind = ProfileKind::gaussian;
      else if (val == "uniform_box") cfg.profile.kind = ProfileKind::uniform_box;
      else if (val == "custom_piecewise")
        cfg.profile.kind = ProfileKind::custom_piecewise;
      else throw std::invalid_argument("config key 'profile.kind': unknown '" +
                                       val + "'");
    } else if (key == "profile.size_k") {
      cfg.profile.size_k = detail::parse_double(key, val);
    } else if (key == "mean_n") {
      cfg.mean_n = detail::parse_double(key, val);
    } else if (key == "atom_number_mode") {
      if (val == "fixed") cfg.atom_number_mode = AtomNumberMode::fixed;
      else if (val == "poisson") cfg.atom_number_mode = AtomNumberMode::poisson;
      else throw std::invalid_argument(
          "config key 'atom_number_mode': unknown '" + val + "'");
    } else if (key == "realizations") {
      cfg.realizations = static_cast<int>(detail::parse_int(key, val));
    } else if (key == "time.tmax_tau") {
      cfg.time.tmax_tau = detail::parse_double(key, val);
    } else if (key == "time.points") {
      cfg.time.points = static_cast<int>(detail::parse_int(key, val));
    } else if (key == "master_seed") {
      cfg.master_seed = static_cast<std::uint64_t>(detail::parse_int(key, val));
    } else if (key == "which") {
      if (val == "Hs" || val == "hs") cfg.which = Evolution::hs;
      else if (val == "HF" || val == "hf") cfg.which = Evolution::hf;
      else if (val == "Heff" || val == "heff") cfg.which = Evolution::heff;
      else throw std::invalid_argument("config key 'which': unknown '" + val + "'");
    } else if (key == "alphas") {
      cfg.alphas.clear();
      std::stringstream ss(val);
      std::string tok;
      while (std::getline(ss, tok, ','))
        cfg.alphas.push_back(static_cast<int>(detail::parse_int(key, tok)));
      if (cfg.alphas.empty())
        throw std::invalid_argument("config key 'alphas': empty list");
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
}

inline ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  ExperimentConfig cfg;
  apply_config_keys(cfg, parse_key_values(in));
  return cfg;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["profile.kind"] = to_string(cfg.profile.kind);
  j["profile.size_k"] = cfg.profile.size_k;
  if (!cfg.profile.pieces.empty()) {
    nlohmann::json pieces = nlohmann::json::array();
    for (const auto& p : cfg.profile.pieces)
      pieces.push_back({{"lo", p.lo}, {"hi", p.hi}, {"weight", p.weight}});
    j["profile.pieces"] = pieces;
  }
  j["mean_n"] = cfg.mean_n;
  j["atom_number_mode"] = to_string(cfg.atom_number_mode);
  j["realizations"] = cfg.realizations;
  j["time.tmax_tau"] = cfg.time.tmax_tau;
  j["time.points"] = cfg.time.points;
  j["master_seed"] = cfg.master_seed;
  j["which"] = cfg.which == Evolution::hs
                   ? "Hs"
                   : (cfg.which == Evolution::hf ? "HF" : "Heff");
  j["alphas"] = cfg.alphas;
  return j;
}

// Run manifest: config echo, timings, warning counters, and a digest of
// every output file. Written atomically after all outputs exist, so a
// manifest on disk certifies a complete run.
class RunManifest {
public:
  explicit RunManifest(std::string command) {
    j_["command"] = std::move(command);
    j_["version"] = "0.1.0";
    j_["counters"] = nlohmann::json::object();
    j_["timings_s"] = nlohmann::json::object();
    j_["outputs"] = nlohmann::json::array();
  }

  void set_config(const ExperimentConfig& cfg) {
    j_["config"] = config_to_json(cfg);
    j_["config_hash"] = cfg.hash();
  }

  void set(const std::string& key, const nlohmann::json& v) { j_[key] = v; }
  void set_counter(const std::string& key, long long v) {
    j_["counters"][key] = v;
  }
  void set_timing(const std::string& stage, double seconds) {
    j_["timings_s"][stage] = seconds;
  }

  void add_output(const std::filesystem::path& path, std::size_t rows) {
    j_["outputs"].push_back({{"path", path.string()},
                             {"rows", rows},
                             {"digest", file_digest_hex(path)}});
  }

  void set_wall_time(double seconds) { j_["wall_time_s"] = seconds; }

  void write(const std::filesystem::path& path) const {
    write_file_atomic(path, j_.dump(2) + "\n");
  }

  const nlohmann::json& json() const { return j_; }

private:
  nlohmann::json j_;
};

} // namespace waveqed
