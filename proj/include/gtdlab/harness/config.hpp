#pragma once

#include "gtdlab/analysis.hpp"
#include "gtdlab/buffers.hpp"
#include "gtdlab/envs.hpp"
#include "gtdlab/learners.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gtdlab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AlgorithmSpec {
  std::string label;
  Algorithm algorithm = Algorithm::Td;
  Hyperparams hp;

  bool operator==(const AlgorithmSpec&) const = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string benchmark;
  std::vector<AlgorithmSpec> algorithms;
  std::size_t n_runs = 100;
  std::size_t n_steps = 1000;
  std::size_t record_every = 10;
  std::vector<Metric> metrics{Metric::Rmsve};
  std::optional<std::size_t> warmup;
  std::uint64_t base_seed = 0;
  std::string output_dir = "out";
  Routing routing = Routing::EpisodeParity;
  std::size_t window = 10000;

  bool operator==(const ExperimentConfig&) const = default;

  // Effective hyperparameters: the experiment-wide warmup fills in for any
  // learner without its own.
  Hyperparams hyperparams(std::size_t i) const {
    Hyperparams hp = algorithms.at(i).hp;
    if (!hp.warmup && warmup) hp.warmup = warmup;
    return hp;
  }

  void validate() const {
    if (n_runs < 1) throw ConfigError("runs must be at least 1");
    if (record_every < 1) throw ConfigError("record_every must be at least 1");
    if (algorithms.empty()) throw ConfigError("algorithms: at least one entry is required");
    if (metrics.empty()) throw ConfigError("metrics: at least one entry is required");
    if (window < 1) throw ConfigError("window must be at least 1");
    const auto& names = benchmark_names();
    if (std::find(names.begin(), names.end(), benchmark) == names.end()) {
      throw ConfigError("benchmark: unknown benchmark '" + benchmark + "'");
    }
    std::set<std::string> labels;
    for (std::size_t i = 0; i < algorithms.size(); ++i) {
      if (!labels.insert(algorithms[i].label).second) {
        throw ConfigError("algorithms[" + std::to_string(i) + "].label: duplicate label '" +
                          algorithms[i].label + "'");
      }
      try {
        algorithms[i].hp.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError("algorithms[" + std::to_string(i) + "]: " + e.what());
      }
    }
  }
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                           const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(where + key + ": unknown key");
    }
  }
}

template <class T>
T read(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + key + ": " + e.what());
  }
}

inline std::size_t read_count(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ConfigError(where + key + ": expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

inline double read_number(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + key + ": expected a number");
  return v.get<double>();
}

inline AlgorithmSpec parse_algorithm_entry(const json& entry, const std::string& where) {
  if (!entry.is_object()) throw ConfigError(where + ": expected an object");
  reject_unknown(entry,
                 {"name", "label", "alpha", "beta", "eta", "reg", "m", "m1", "m2", "clip",
                  "warmup", "symmetric"},
                 where + ".");
  if (!entry.contains("name")) throw ConfigError(where + ".name: missing");
  const auto name = read<std::string>(entry, "name", where + ".");
  const auto algo = parse_algorithm(name);
  if (!algo) throw ConfigError(where + ".name: unknown algorithm '" + name + "'");
  AlgorithmSpec spec;
  spec.algorithm = *algo;
  spec.label = entry.contains("label") ? read<std::string>(entry, "label", where + ".") : name;
  const std::string w = where + ".";
  Hyperparams& hp = spec.hp;
  if (entry.contains("alpha")) hp.alpha = read_number(entry, "alpha", w);
  if (entry.contains("beta")) hp.beta = read_number(entry, "beta", w);
  if (entry.contains("eta")) hp.eta = read_number(entry, "eta", w);
  if (entry.contains("reg")) hp.reg = read_number(entry, "reg", w);
  if (entry.contains("clip")) hp.clip = read_number(entry, "clip", w);
  if (entry.contains("m")) hp.m1 = hp.m2 = read_count(entry, "m", w);
  if (entry.contains("m1")) hp.m1 = read_count(entry, "m1", w);
  if (entry.contains("m2")) hp.m2 = read_count(entry, "m2", w);
  if (entry.contains("warmup")) hp.warmup = read_count(entry, "warmup", w);
  if (entry.contains("symmetric")) hp.symmetric = read<bool>(entry, "symmetric", w);
  return spec;
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& doc) {
  using detail::read;
  using detail::read_count;
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  detail::reject_unknown(doc,
                         {"name", "benchmark", "algorithms", "runs", "steps", "record_every",
                          "metrics", "warmup", "seed", "output", "routing", "window"},
                         "");
  ExperimentConfig cfg;
  if (!doc.contains("benchmark")) throw ConfigError("benchmark: missing");
  if (!doc.contains("algorithms")) throw ConfigError("algorithms: missing");
  if (!doc.contains("steps")) throw ConfigError("steps: missing");
  cfg.benchmark = read<std::string>(doc, "benchmark", "");
  if (doc.contains("name")) cfg.name = read<std::string>(doc, "name", "");
  cfg.n_steps = read_count(doc, "steps", "");
  if (doc.contains("runs")) cfg.n_runs = read_count(doc, "runs", "");
  if (doc.contains("record_every")) cfg.record_every = read_count(doc, "record_every", "");
  if (doc.contains("warmup")) cfg.warmup = read_count(doc, "warmup", "");
  if (doc.contains("seed")) cfg.base_seed = read<std::uint64_t>(doc, "seed", "");
  if (doc.contains("output")) cfg.output_dir = read<std::string>(doc, "output", "");
  if (doc.contains("window")) cfg.window = read_count(doc, "window", "");
  if (doc.contains("routing")) {
    const auto r = read<std::string>(doc, "routing", "");
    if (r == "episode-parity") {
      cfg.routing = Routing::EpisodeParity;
    } else if (r == "time-window") {
      cfg.routing = Routing::TimeWindow;
    } else {
      throw ConfigError("routing: unknown rule '" + r + "'");
    }
  }
  if (doc.contains("metrics")) {
    cfg.metrics.clear();
    const auto& ms = doc.at("metrics");
    if (!ms.is_array()) throw ConfigError("metrics: expected an array");
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const auto where = "metrics[" + std::to_string(i) + "]";
      if (!ms[i].is_string()) throw ConfigError(where + ": expected a string");
      const auto m = parse_metric(ms[i].get<std::string>());
      if (!m) throw ConfigError(where + ": unknown metric '" + ms[i].get<std::string>() + "'");
      cfg.metrics.push_back(*m);
    }
  }
  const auto& algos = doc.at("algorithms");
  if (!algos.is_array()) throw ConfigError("algorithms: expected an array");
  for (std::size_t i = 0; i < algos.size(); ++i) {
    cfg.algorithms.push_back(
        detail::parse_algorithm_entry(algos[i], "algorithms[" + std::to_string(i) + "]"));
  }
  cfg.validate();
  return cfg;
}

// Only non-default keys are written so the output stays readable.
inline nlohmann::json algorithm_to_json(const AlgorithmSpec& spec) {
  const Hyperparams def;
  const auto& hp = spec.hp;
  nlohmann::json j;
  j["name"] = std::string(to_string(spec.algorithm));
  if (spec.label != to_string(spec.algorithm)) j["label"] = spec.label;
  j["alpha"] = hp.alpha;
  if (hp.beta != def.beta) j["beta"] = hp.beta;
  if (hp.eta != def.eta) j["eta"] = hp.eta;
  if (hp.reg != def.reg) j["reg"] = hp.reg;
  if (hp.m1 == hp.m2) {
    if (hp.m1 != def.m1) j["m"] = hp.m1;
  } else {
    j["m1"] = hp.m1;
    j["m2"] = hp.m2;
  }
  if (hp.clip != def.clip) j["clip"] = hp.clip;
  if (hp.warmup) j["warmup"] = *hp.warmup;
  if (hp.symmetric) j["symmetric"] = true;
  return j;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["name"] = cfg.name;
  j["benchmark"] = cfg.benchmark;
  j["runs"] = cfg.n_runs;
  j["steps"] = cfg.n_steps;
  j["record_every"] = cfg.record_every;
  j["metrics"] = nlohmann::json::array();
  for (Metric m : cfg.metrics) j["metrics"].push_back(std::string(to_string(m)));
  if (cfg.warmup) j["warmup"] = *cfg.warmup;
  j["seed"] = cfg.base_seed;
  j["output"] = cfg.output_dir;
  if (cfg.routing == Routing::TimeWindow) {
    j["routing"] = "time-window";
    j["window"] = cfg.window;
  }
  j["algorithms"] = nlohmann::json::array();
  for (const auto& a : cfg.algorithms) j["algorithms"].push_back(algorithm_to_json(a));
  return j;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config(doc);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace gtdlab
