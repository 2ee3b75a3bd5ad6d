#pragma once

// Monte Carlo OLA-T broadcast over finite random networks, with either the
// deterministic power-sum channel or Rayleigh fading with a delay-diversity
// RAKE receiver.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ola/continuum.hpp"
#include "ola/format.hpp"
#include "ola/parallel.hpp"
#include "ola/rng.hpp"

namespace ola::sim {

struct Position {
  double x = 0.0;
  double y = 0.0;
};

struct NodeField {
  std::vector<Position> positions;
  double area_radius = 0.0;
  double density = 0.0;  // nodes per unit normalized area

  std::size_t size() const { return positions.size(); }
};

inline std::size_t expected_node_count(double density, double area_radius) {
  return static_cast<std::size_t>(std::llround(density * kPi * area_radius * area_radius));
}

// i.i.d. uniform nodes on the disc of radius area_radius. With fixed_count the
// density is derived from the count, otherwise the count is round(rho pi R^2).
inline NodeField generate_network(Engine& rng, double density, double area_radius,
                                  std::optional<std::size_t> fixed_count = std::nullopt) {
  if (!(area_radius > 0.0)) throw std::invalid_argument("area_radius must be > 0");
  NodeField field;
  field.area_radius = area_radius;
  std::size_t count = 0;
  if (fixed_count) {
    if (*fixed_count < 1) throw std::invalid_argument("fixed_count must be >= 1");
    count = *fixed_count;
    field.density = static_cast<double>(count) / (kPi * area_radius * area_radius);
  } else {
    if (!(density > 0.0)) throw std::invalid_argument("density must be > 0");
    count = expected_node_count(density, area_radius);
    field.density = density;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  field.positions.resize(count);
  for (Position& p : field.positions) {
    const double r = area_radius * std::sqrt(unit(rng));
    const double theta = 2.0 * kPi * unit(rng);
    p = {r * std::cos(theta), r * std::sin(theta)};
  }
  return field;
}

// Inverse-square gain clipped to 1 inside the reference distance.
inline double link_gain(double dist_sq) { return dist_sq > 1.0 ? 1.0 / dist_sq : 1.0; }

inline double distance_sq(Position a, Position b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double received_power_deterministic(Position receiver, std::span<const Position> transmitters,
                                           double per_node_power) {
  double sum = 0.0;
  for (const Position& t : transmitters) sum += link_gain(distance_sq(receiver, t));
  return per_node_power * sum;
}

// rayleigh_rake: every link fades independently, delay bins only group the
// paths into fingers. rayleigh_coherent_bins: paths sharing a delay bin add
// coherently, so each finger fades as a whole.
enum class ChannelKind { deterministic, rayleigh_rake, rayleigh_coherent_bins };

inline constexpr int kMaxDiversityOrder = 4;

struct ChannelModel {
  ChannelKind kind = ChannelKind::deterministic;
  int diversity_order = 1;  // RAKE fingers excited; fading channels only

  static ChannelModel deterministic() { return {}; }
  static ChannelModel rayleigh(int m) { return {ChannelKind::rayleigh_rake, m}; }
  static ChannelModel rayleigh_coherent(int m) { return {ChannelKind::rayleigh_coherent_bins, m}; }

  bool fading() const { return kind != ChannelKind::deterministic; }

  void validate() const {
    if (fading() && (diversity_order < 1 || diversity_order > kMaxDiversityOrder)) {
      throw std::invalid_argument("diversity_order must be in [1, 4]");
    }
  }
};

// Each transmitter picks one of m delay bins; finger j sums g_i P_r min(1/d_i^2, 1)
// over its bin with g_i ~ Exp(1) per link, and the fingers are power-combined.
inline double received_power_fading(Position receiver, std::span<const Position> transmitters,
                                    double per_node_power, int m, Engine& rng) {
  if (m < 1 || m > kMaxDiversityOrder) throw std::invalid_argument("diversity order must be in [1, 4]");
  std::uniform_int_distribution<int> bin(0, m - 1);
  std::exponential_distribution<double> fade(1.0);
  double fingers[kMaxDiversityOrder] = {};
  for (const Position& t : transmitters) {
    const int j = bin(rng);
    fingers[j] += fade(rng) * link_gain(distance_sq(receiver, t));
  }
  double total = 0.0;
  for (int j = 0; j < m; ++j) total += fingers[j];
  return per_node_power * total;
}

// Coherent-bin variant: finger power = Exp(1) x (mean power of its bin).
inline double received_power_fading_coherent(Position receiver, std::span<const Position> transmitters,
                                             double per_node_power, int m, Engine& rng) {
  if (m < 1 || m > kMaxDiversityOrder) throw std::invalid_argument("diversity order must be in [1, 4]");
  std::uniform_int_distribution<int> bin(0, m - 1);
  std::exponential_distribution<double> fade(1.0);
  double fingers[kMaxDiversityOrder] = {};
  for (const Position& t : transmitters) fingers[bin(rng)] += link_gain(distance_sq(receiver, t));
  double total = 0.0;
  for (int j = 0; j < m; ++j) total += fingers[j] * fade(rng);
  return per_node_power * total;
}

struct TrialConfig {
  double source_power = 3.0;
  double decode_threshold = 1.0;
  double relay_power_density = 1.25;  // P_r bar; per-node power is P_r bar / rho
  // Level-k relays use epsilon[min(k, size) - 1].
  std::vector<Epsilon> epsilon{Epsilon(2.5), Epsilon::unbounded()};
  std::optional<double> density = 10.0;
  std::optional<std::size_t> node_count;  // overrides density when set
  double area_radius = 17.0;
  ChannelModel channel;
  int max_levels = 500;
  std::uint64_t rng_seed = 1;
  double success_fraction = 0.99;

  Epsilon epsilon_at(int level) const {
    const auto idx = static_cast<std::size_t>(std::max(level, 1) - 1);
    return epsilon[std::min(idx, epsilon.size() - 1)];
  }

  void validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(source_power)) throw std::invalid_argument("source_power must be > 0");
    if (!positive(decode_threshold)) throw std::invalid_argument("decode_threshold must be > 0");
    if (!positive(relay_power_density)) throw std::invalid_argument("relay_power_density must be > 0");
    if (epsilon.empty()) throw std::invalid_argument("epsilon schedule is empty");
    if (!node_count && !(density && positive(*density))) {
      throw std::invalid_argument("need density > 0 or node_count >= 1");
    }
    if (node_count && *node_count < 1) throw std::invalid_argument("node_count must be >= 1");
    if (!positive(area_radius)) throw std::invalid_argument("area_radius must be > 0");
    if (max_levels < 1) throw std::invalid_argument("max_levels must be >= 1");
    if (!(success_fraction > 0.0 && success_fraction <= 1.0)) {
      throw std::invalid_argument("success_fraction must be in (0, 1]");
    }
    channel.validate();
  }
};

struct LevelRecord {
  std::vector<std::size_t> decoders;  // first decoded at this level
  std::vector<std::size_t> relays;    // subset of decoders that transmit
};

struct TrialResult {
  double decoded_fraction = 0.0;
  std::vector<LevelRecord> levels;  // levels[0] decoded from the source
  bool success = false;
  double total_transmit_energy = 0.0;  // P_s + P_r x relays, unit message length
};

namespace detail {

// Relay coordinates in SoA layout and the annulus that contains them.
struct RelayBlock {
  std::vector<double> x, y;
  std::vector<int> bin;
  double min_radius = 0.0;
  double max_radius = 0.0;

  RelayBlock(const NodeField& field, const std::vector<std::size_t>& relays) {
    x.reserve(relays.size());
    y.reserve(relays.size());
    min_radius = std::numeric_limits<double>::infinity();
    for (std::size_t i : relays) {
      const Position p = field.positions[i];
      x.push_back(p.x);
      y.push_back(p.y);
      const double r = std::hypot(p.x, p.y);
      min_radius = std::min(min_radius, r);
      max_radius = std::max(max_radius, r);
    }
  }

  std::size_t size() const { return x.size(); }

  double gain_sum(Position rx) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double dx = rx.x - x[i];
      const double dy = rx.y - y[i];
      sum += link_gain(dx * dx + dy * dy);
    }
    return sum;
  }

  // Upper bound on gain_sum at a receiver `radius` from the origin.
  double gain_bound(double radius) const {
    const double gap = std::max({radius - max_radius, min_radius - radius, 0.0});
    return static_cast<double>(size()) * link_gain(gap * gap);
  }
};

}  // namespace detail

inline TrialResult run_trial(const NodeField& field, const TrialConfig& config, Engine& rng) {
  config.validate();
  const std::size_t n = field.size();
  const double tau_d = config.decode_threshold;
  const double per_node = config.relay_power_density / field.density;
  const bool fading = config.channel.fading();
  const bool coherent = config.channel.kind == ChannelKind::rayleigh_coherent_bins;
  const int m = config.channel.diversity_order;
  std::exponential_distribution<double> fade(1.0);
  std::uniform_int_distribution<int> pick_bin(0, std::max(m, 1) - 1);

  TrialResult result;
  std::vector<char> decoded(n, 0);
  std::size_t decoded_count = 0;
  std::size_t relay_count = 0;
  std::vector<double> power(n, 0.0);

  auto admit = [&](int level, const std::vector<std::size_t>& candidates) {
    const double tau_b = transmit_threshold(tau_d, config.epsilon_at(level));
    LevelRecord rec;
    for (std::size_t i : candidates) {
      if (power[i] < tau_d) continue;
      rec.decoders.push_back(i);
      if (power[i] < tau_b) rec.relays.push_back(i);
    }
    for (std::size_t i : rec.decoders) decoded[i] = 1;
    decoded_count += rec.decoders.size();
    relay_count += rec.relays.size();
    result.levels.push_back(std::move(rec));
  };

  // Level 1: the point source at the origin.
  std::vector<std::size_t> candidates(n);
  for (std::size_t i = 0; i < n; ++i) {
    candidates[i] = i;
    const double g = link_gain(distance_sq(field.positions[i], Position{}));
    power[i] = config.source_power * g * (fading ? fade(rng) : 1.0);
  }
  admit(1, candidates);

  for (int level = 2; level <= config.max_levels; ++level) {
    const LevelRecord& prev = result.levels.back();
    if (prev.relays.empty() || decoded_count == n) break;
    detail::RelayBlock block(field, prev.relays);
    if (coherent) {
      block.bin.resize(block.size());
      for (int& b : block.bin) b = pick_bin(rng);
    }
    candidates.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (decoded[i]) continue;
      const Position rx = field.positions[i];
      if (!fading) {
        if (per_node * block.gain_bound(std::hypot(rx.x, rx.y)) < tau_d) continue;
        power[i] = per_node * block.gain_sum(rx);
      } else if (coherent) {
        double fingers[kMaxDiversityOrder] = {};
        for (std::size_t r = 0; r < block.size(); ++r) {
          const double dx = rx.x - block.x[r];
          const double dy = rx.y - block.y[r];
          fingers[block.bin[r]] += link_gain(dx * dx + dy * dy);
        }
        double total = 0.0;
        for (int j = 0; j < m; ++j) total += fingers[j] * fade(rng);
        power[i] = per_node * total;
      } else {
        // Independent per-link fades; the finger split does not change the sum.
        double total = 0.0;
        for (std::size_t r = 0; r < block.size(); ++r) {
          const double dx = rx.x - block.x[r];
          const double dy = rx.y - block.y[r];
          total += fade(rng) * link_gain(dx * dx + dy * dy);
        }
        power[i] = per_node * total;
      }
      candidates.push_back(i);
    }
    admit(level, candidates);
    if (result.levels.back().decoders.empty()) break;
  }

  result.decoded_fraction = n == 0 ? 0.0 : static_cast<double>(decoded_count) / static_cast<double>(n);
  result.success = result.decoded_fraction >= config.success_fraction;
  result.total_transmit_energy = config.source_power + per_node * static_cast<double>(relay_count);
  return result;
}

inline NodeField generate_network(Engine& rng, const TrialConfig& config) {
  return generate_network(rng, config.density.value_or(0.0), config.area_radius, config.node_count);
}

struct PsbEstimate {
  double psb = 0.0;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double wilson_halfwidth = 0.0;  // 95% score interval
};

inline double wilson_halfwidth(std::size_t successes, std::size_t trials, double z = 1.959963984540054) {
  if (trials == 0) return 0.0;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  return z / (1.0 + z * z / n) * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
}

// Trial i draws its network and fading from the stream derive_seed(master_seed, i).
inline PsbEstimate estimate_psb(const TrialConfig& config, std::size_t num_trials, std::uint64_t master_seed,
                                unsigned threads = 1) {
  config.validate();
  if (num_trials < 1) throw std::invalid_argument("num_trials must be >= 1");
  std::vector<char> ok(num_trials, 0);
  parallel_for(num_trials, threads, [&](std::size_t i) {
    Engine rng = make_engine(master_seed, i);
    const NodeField field = generate_network(rng, config);
    ok[i] = run_trial(field, config, rng).success ? 1 : 0;
  });
  PsbEstimate est;
  est.trials = num_trials;
  est.successes = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
  est.psb = static_cast<double>(est.successes) / static_cast<double>(num_trials);
  est.wilson_halfwidth = wilson_halfwidth(est.successes, num_trials);
  return est;
}

// Continuum counterpart of a trial: 1 if the decoding boundary reaches the
// radius enclosing success_fraction of the area within max_levels, else 0.
inline double continuum_psb(const TrialConfig& config) {
  config.validate();
  const ContinuumParams params{config.relay_power_density, config.decode_threshold, config.source_power,
                               config.epsilon};
  const RingSequence seq = propagate(params, config.max_levels);
  const double target = config.area_radius * std::sqrt(config.success_fraction);
  return seq.rings.back().outer_radius() >= target ? 1.0 : 0.0;
}

enum class VariantKind { density, node_count, diversity };

// One curve of a sweep. A diversity value of 0 is the deterministic channel;
// other diversity values keep the base config's fading kind.
struct SweepVariant {
  VariantKind kind = VariantKind::density;
  double value = 0.0;

  std::string label() const {
    switch (kind) {
      case VariantKind::density:
        return "rho=" + format_double(value);
      case VariantKind::node_count:
        return "n=" + format_int(std::llround(value));
      case VariantKind::diversity:
        return value == 0.0 ? std::string("deterministic") : "m=" + format_int(std::lround(value));
    }
    return {};
  }

  TrialConfig apply(TrialConfig config) const {
    switch (kind) {
      case VariantKind::density:
        config.density = value;
        config.node_count.reset();
        break;
      case VariantKind::node_count:
        config.node_count = static_cast<std::size_t>(std::llround(value));
        break;
      case VariantKind::diversity: {
        const int m = static_cast<int>(std::lround(value));
        if (m == 0) {
          config.channel = ChannelModel::deterministic();
        } else {
          const bool coherent = config.channel.kind == ChannelKind::rayleigh_coherent_bins;
          config.channel = coherent ? ChannelModel::rayleigh_coherent(m) : ChannelModel::rayleigh(m);
        }
        break;
      }
    }
    return config;
  }
};

struct PsbCell {
  double rtt_db = 0.0;
  SweepVariant variant;
  PsbEstimate estimate;
  std::uint64_t seed = 0;
};

// Levels >= 2 use the RTT under test; level 1 keeps the base's first epsilon.
inline TrialConfig with_rtt(TrialConfig config, double rtt_db) {
  const Epsilon first = config.epsilon_at(1);
  config.epsilon = {first, Epsilon(rtt_db_to_epsilon(rtt_db, config.decode_threshold))};
  return config;
}

// Every cell reuses master_seed, so curves share network realizations
// (common random numbers) and differ only in the swept parameter.
inline std::vector<PsbCell> psb_sweep(const TrialConfig& base, std::span<const double> rtt_grid_db,
                                      std::span<const SweepVariant> variants, std::size_t trials,
                                      std::uint64_t master_seed, unsigned threads = 1) {
  if (rtt_grid_db.empty() || variants.empty()) throw std::invalid_argument("psb_sweep: empty grid");
  std::vector<PsbCell> cells;
  cells.reserve(rtt_grid_db.size() * variants.size());
  for (const SweepVariant& v : variants) {
    for (double rtt : rtt_grid_db) {
      const TrialConfig cfg = with_rtt(v.apply(base), rtt);
      cells.push_back({rtt, v, estimate_psb(cfg, trials, master_seed, threads), master_seed});
    }
  }
  return cells;
}

}  // namespace ola::sim
