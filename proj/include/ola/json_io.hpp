#pragma once

// JSON schema for configs, manifests and optimizer results. Field names match
// the C++ struct members. Parsing is strict: unknown keys are rejected and
// missing keys keep their defaults.

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ola/continuum.hpp"
#include "ola/discretesim.hpp"
#include "ola/units.hpp"
#include "ola/varthresh.hpp"

namespace ola::io {

using nlohmann::json;

// Bad value or shape; `key` is the offending field name (last path component).
class config_error : public std::runtime_error {
 public:
  config_error(std::string path, std::string key, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)), key_(std::move(key)) {}
  const std::string& path() const noexcept { return path_; }
  const std::string& key() const noexcept { return key_; }

 private:
  std::string path_;
  std::string key_;
};

namespace detail {

inline std::string join(std::string_view parent, std::string_view key) {
  return parent.empty() ? std::string(key) : std::string(parent) + "." + std::string(key);
}

inline void require_object(const json& j, std::string_view path) {
  if (!j.is_object()) throw config_error(std::string(path), std::string(path), "expected a JSON object");
}

inline void check_keys(const json& j, std::string_view path, std::initializer_list<std::string_view> allowed) {
  require_object(j, path);
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || a == key;
    if (!known) throw config_error(join(path, key), key, "unknown field");
  }
}

inline double get_double(const json& j, std::string_view path, std::string_view key, double fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) throw config_error(join(path, key), std::string(key), "expected a number");
  return it->get<double>();
}

template <typename Int>
Int get_int(const json& j, std::string_view path, std::string_view key, Int fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer()) throw config_error(join(path, key), std::string(key), "expected an integer");
  if constexpr (std::is_unsigned_v<Int>) {
    if (it->is_number_unsigned()) return it->get<Int>();
    if (it->get<std::int64_t>() < 0) throw config_error(join(path, key), std::string(key), "must be >= 0");
  }
  return it->get<Int>();
}

inline std::string get_string(const json& j, std::string_view path, std::string_view key, std::string fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_string()) throw config_error(join(path, key), std::string(key), "expected a string");
  return it->get<std::string>();
}

inline std::vector<double> get_doubles(const json& j, std::string_view path, std::string_view key,
                                       std::vector<double> fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_array()) throw config_error(join(path, key), std::string(key), "expected an array of numbers");
  std::vector<double> out;
  for (const json& v : *it) {
    if (!v.is_number()) throw config_error(join(path, key), std::string(key), "expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace detail

// Epsilon: a non-negative number or the string "inf".
inline Epsilon parse_epsilon(const json& j, const std::string& path, const std::string& key) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity" || s == "Infinity") return Epsilon::unbounded();
    throw config_error(path, key, "expected a number or \"inf\", got \"" + s + "\"");
  }
  if (!j.is_number()) throw config_error(path, key, "expected a number or \"inf\"");
  const double v = j.get<double>();
  if (!(v >= 0.0)) throw config_error(path, key, "epsilon must be >= 0");
  return Epsilon(v);
}

inline std::vector<Epsilon> parse_epsilon_schedule(const json& j, const std::string& path, const std::string& key) {
  if (!j.is_array()) return {parse_epsilon(j, path, key)};
  if (j.empty()) throw config_error(path, key, "epsilon schedule is empty");
  std::vector<Epsilon> out;
  for (const json& v : j) out.push_back(parse_epsilon(v, path, key));
  return out;
}

inline json to_json(Epsilon e) {
  if (e.is_unbounded()) return "inf";
  return e.value();
}

inline json to_json(const std::vector<Epsilon>& schedule) {
  json arr = json::array();
  for (Epsilon e : schedule) arr.push_back(to_json(e));
  return arr;
}

inline ContinuumParams parse_continuum_params(const json& j, std::string_view path, ContinuumParams p = {}) {
  detail::check_keys(j, path, {"relay_power_density", "decode_threshold", "source_power", "epsilon"});
  p.relay_power_density = detail::get_double(j, path, "relay_power_density", p.relay_power_density);
  p.decode_threshold = detail::get_double(j, path, "decode_threshold", p.decode_threshold);
  p.source_power = detail::get_double(j, path, "source_power", p.source_power);
  if (j.contains("epsilon")) p.epsilon = parse_epsilon_schedule(j["epsilon"], detail::join(path, "epsilon"), "epsilon");
  try {
    p.validate();
  } catch (const std::exception& e) {
    throw config_error(std::string(path), std::string(path), e.what());
  }
  return p;
}

inline json to_json(const ContinuumParams& p) {
  return json{{"relay_power_density", p.relay_power_density},
              {"decode_threshold", p.decode_threshold},
              {"source_power", p.source_power},
              {"epsilon", to_json(p.epsilon)}};
}

inline varthresh::ConstraintSpec parse_constraint(const json& j, std::string_view path) {
  detail::check_keys(j, path, {"kind", "levels", "network_radius"});
  varthresh::ConstraintSpec c;
  const std::string kind = detail::get_string(j, path, "kind", "type1");
  if (kind == "type1") {
    c.kind = varthresh::ConstraintKind::type1;
  } else if (kind == "type2") {
    c.kind = varthresh::ConstraintKind::type2;
  } else {
    throw config_error(detail::join(path, "kind"), "kind", "expected \"type1\" or \"type2\"");
  }
  c.levels = detail::get_int<int>(j, path, "levels", c.levels);
  if (j.contains("network_radius")) c.network_radius = detail::get_double(j, path, "network_radius", 0.0);
  try {
    c.validate();
  } catch (const std::exception& e) {
    throw config_error(std::string(path), std::string(path), e.what());
  }
  return c;
}

inline json to_json(const varthresh::ConstraintSpec& c) {
  json j{{"kind", c.kind == varthresh::ConstraintKind::type1 ? "type1" : "type2"}, {"levels", c.levels}};
  if (c.network_radius) j["network_radius"] = *c.network_radius;
  return j;
}

// `threads` is an execution setting, not part of the schema: it never changes results.
inline varthresh::OptimizerConfig parse_optimizer_config(const json& j, std::string_view path) {
  detail::check_keys(j, path,
                     {"population_size", "generations", "crossover_rate", "mutation_rate", "mutation_scale",
                      "elitism_count", "penalty_weight", "rng_seed", "epsilon_floor", "epsilon_cap",
                      "baseline_margin", "tournament_size"});
  varthresh::OptimizerConfig c;
  c.population_size = detail::get_int<int>(j, path, "population_size", c.population_size);
  c.generations = detail::get_int<int>(j, path, "generations", c.generations);
  c.crossover_rate = detail::get_double(j, path, "crossover_rate", c.crossover_rate);
  c.mutation_rate = detail::get_double(j, path, "mutation_rate", c.mutation_rate);
  c.mutation_scale = detail::get_double(j, path, "mutation_scale", c.mutation_scale);
  c.elitism_count = detail::get_int<int>(j, path, "elitism_count", c.elitism_count);
  c.penalty_weight = detail::get_double(j, path, "penalty_weight", c.penalty_weight);
  c.rng_seed = detail::get_int<std::uint64_t>(j, path, "rng_seed", c.rng_seed);
  c.epsilon_floor = detail::get_double(j, path, "epsilon_floor", c.epsilon_floor);
  c.epsilon_cap = detail::get_double(j, path, "epsilon_cap", c.epsilon_cap);
  c.baseline_margin = detail::get_double(j, path, "baseline_margin", c.baseline_margin);
  c.tournament_size = detail::get_int<int>(j, path, "tournament_size", c.tournament_size);
  try {
    c.validate();
  } catch (const std::exception& e) {
    throw config_error(std::string(path), std::string(path), e.what());
  }
  return c;
}

inline json to_json(const varthresh::OptimizerConfig& c) {
  return json{{"population_size", c.population_size}, {"generations", c.generations},
              {"crossover_rate", c.crossover_rate},   {"mutation_rate", c.mutation_rate},
              {"mutation_scale", c.mutation_scale},   {"elitism_count", c.elitism_count},
              {"penalty_weight", c.penalty_weight},   {"rng_seed", c.rng_seed},
              {"epsilon_floor", c.epsilon_floor},     {"epsilon_cap", c.epsilon_cap},
              {"baseline_margin", c.baseline_margin}, {"tournament_size", c.tournament_size}};
}

inline json to_json(const RingSequence& seq) {
  json arr = json::array();
  for (const Ring& r : seq.rings) arr.push_back(json::array({r.inner_radius(), r.outer_radius()}));
  return arr;
}

inline json to_json(const varthresh::OptimizationResult& r) {
  json profile = json::array();
  for (const auto& p : r.fes_profile) profile.push_back(json::array({p.radius, p.fes}));
  return json{{"schedule", r.best_schedule.values},
              {"energy", r.best_energy},
              {"rings", to_json(r.rings)},
              {"fes_profile", std::move(profile)},
              {"trace", r.generation_trace}};
}

inline constexpr std::string_view kChannelNames[] = {"deterministic", "rayleigh_rake", "rayleigh_coherent_bins"};

inline sim::ChannelModel parse_channel(const json& j, std::string_view path) {
  detail::check_keys(j, path, {"kind", "diversity_order"});
  sim::ChannelModel c;
  const std::string kind = detail::get_string(j, path, "kind", "deterministic");
  const auto* it = std::find(std::begin(kChannelNames), std::end(kChannelNames), kind);
  if (it == std::end(kChannelNames)) {
    throw config_error(detail::join(path, "kind"), "kind",
                       "expected \"deterministic\", \"rayleigh_rake\" or \"rayleigh_coherent_bins\"");
  }
  c.kind = static_cast<sim::ChannelKind>(it - std::begin(kChannelNames));
  c.diversity_order = detail::get_int<int>(j, path, "diversity_order", c.diversity_order);
  return c;
}

inline json to_json(const sim::ChannelModel& c) {
  return json{{"kind", std::string(kChannelNames[static_cast<int>(c.kind)])}, {"diversity_order", c.diversity_order}};
}

inline sim::TrialConfig parse_trial_config(const json& j, std::string_view path) {
  detail::check_keys(j, path,
                     {"source_power", "decode_threshold", "relay_power_density", "epsilon", "density", "node_count",
                      "area_radius", "channel", "max_levels", "rng_seed", "success_fraction"});
  sim::TrialConfig c;
  c.source_power = detail::get_double(j, path, "source_power", c.source_power);
  c.decode_threshold = detail::get_double(j, path, "decode_threshold", c.decode_threshold);
  c.relay_power_density = detail::get_double(j, path, "relay_power_density", c.relay_power_density);
  if (j.contains("epsilon")) c.epsilon = parse_epsilon_schedule(j["epsilon"], detail::join(path, "epsilon"), "epsilon");
  if (j.contains("density")) {
    if (j["density"].is_null()) {
      c.density.reset();
    } else {
      c.density = detail::get_double(j, path, "density", 0.0);
    }
  }
  if (j.contains("node_count") && !j["node_count"].is_null()) {
    c.node_count = detail::get_int<std::size_t>(j, path, "node_count", 0);
  }
  c.area_radius = detail::get_double(j, path, "area_radius", c.area_radius);
  if (j.contains("channel")) c.channel = parse_channel(j["channel"], detail::join(path, "channel"));
  c.max_levels = detail::get_int<int>(j, path, "max_levels", c.max_levels);
  c.rng_seed = detail::get_int<std::uint64_t>(j, path, "rng_seed", c.rng_seed);
  c.success_fraction = detail::get_double(j, path, "success_fraction", c.success_fraction);
  try {
    c.validate();
  } catch (const std::exception& e) {
    throw config_error(std::string(path), std::string(path), e.what());
  }
  return c;
}

inline json to_json(const sim::TrialConfig& c) {
  json j{{"source_power", c.source_power},
         {"decode_threshold", c.decode_threshold},
         {"relay_power_density", c.relay_power_density},
         {"epsilon", to_json(c.epsilon)},
         {"density", c.density ? json(*c.density) : json(nullptr)},
         {"node_count", c.node_count ? json(*c.node_count) : json(nullptr)},
         {"area_radius", c.area_radius},
         {"channel", to_json(c.channel)},
         {"max_levels", c.max_levels},
         {"rng_seed", c.rng_seed},
         {"success_fraction", c.success_fraction}};
  return j;
}

// {"kind": "density" | "node_count" | "diversity", "values": [...]}
inline std::vector<sim::SweepVariant> parse_variants(const json& j, std::string_view path) {
  detail::check_keys(j, path, {"kind", "values"});
  const std::string kind = detail::get_string(j, path, "kind", "density");
  sim::VariantKind k{};
  if (kind == "density") {
    k = sim::VariantKind::density;
  } else if (kind == "node_count") {
    k = sim::VariantKind::node_count;
  } else if (kind == "diversity") {
    k = sim::VariantKind::diversity;
  } else {
    throw config_error(detail::join(path, "kind"), "kind", "expected \"density\", \"node_count\" or \"diversity\"");
  }
  const std::vector<double> values = detail::get_doubles(j, path, "values", {});
  if (values.empty()) throw config_error(detail::join(path, "values"), "values", "need at least one variant value");
  std::vector<sim::SweepVariant> out;
  for (double v : values) out.push_back({k, v});
  return out;
}

inline json to_json(const std::vector<sim::SweepVariant>& variants) {
  static constexpr const char* names[] = {"density", "node_count", "diversity"};
  json values = json::array();
  for (const auto& v : variants) values.push_back(v.value);
  return json{{"kind", variants.empty() ? "density" : names[static_cast<int>(variants.front().kind)]},
              {"values", std::move(values)}};
}

inline units::RadioParams parse_radio_params(const json& j, std::string_view path) {
  detail::check_keys(j, path,
                     {"tx_power_dbm", "rx_sensitivity_dbm", "antenna_gain_tx", "antenna_gain_rx", "wavelength_m",
                      "reference_distance_m", "node_density_per_m2", "noise_power_mw"});
  units::RadioParams p;
  p.tx_power_dbm = detail::get_double(j, path, "tx_power_dbm", p.tx_power_dbm);
  p.rx_sensitivity_dbm = detail::get_double(j, path, "rx_sensitivity_dbm", p.rx_sensitivity_dbm);
  p.antenna_gain_tx = detail::get_double(j, path, "antenna_gain_tx", p.antenna_gain_tx);
  p.antenna_gain_rx = detail::get_double(j, path, "antenna_gain_rx", p.antenna_gain_rx);
  p.wavelength_m = detail::get_double(j, path, "wavelength_m", p.wavelength_m);
  p.reference_distance_m = detail::get_double(j, path, "reference_distance_m", p.reference_distance_m);
  p.node_density_per_m2 = detail::get_double(j, path, "node_density_per_m2", p.node_density_per_m2);
  p.noise_power_mw = detail::get_double(j, path, "noise_power_mw", p.noise_power_mw);
  try {
    p.validate();
  } catch (const std::exception& e) {
    throw config_error(std::string(path), std::string(path), e.what());
  }
  return p;
}

inline json to_json(const units::RadioParams& p) {
  return json{{"tx_power_dbm", p.tx_power_dbm},
              {"rx_sensitivity_dbm", p.rx_sensitivity_dbm},
              {"antenna_gain_tx", p.antenna_gain_tx},
              {"antenna_gain_rx", p.antenna_gain_rx},
              {"wavelength_m", p.wavelength_m},
              {"reference_distance_m", p.reference_distance_m},
              {"node_density_per_m2", p.node_density_per_m2},
              {"noise_power_mw", p.noise_power_mw}};
}

}  // namespace ola::io
