#pragma once

// OLA-VT: per-level threshold schedules chosen by a real-coded genetic
// algorithm to minimize broadcast energy under a growth-shape constraint
// (Type 1) or a fixed-levels / fixed-radius constraint (Type 2).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ola/continuum.hpp"
#include "ola/error.hpp"
#include "ola/parallel.hpp"
#include "ola/rng.hpp"

namespace ola::varthresh {

struct EpsilonSchedule {
  std::vector<double> values;  // values[k-1] is epsilon_k

  std::size_t size() const { return values.size(); }

  static EpsilonSchedule constant(std::size_t levels, double eps) {
    return EpsilonSchedule{std::vector<double>(levels, eps)};
  }

  std::vector<Epsilon> as_epsilons() const {
    std::vector<Epsilon> out;
    out.reserve(values.size());
    for (double v : values) out.emplace_back(v);
    return out;
  }
};

enum class ConstraintKind { type1, type2 };

struct ConstraintSpec {
  ConstraintKind kind = ConstraintKind::type1;
  int levels = 1;
  std::optional<double> network_radius;  // Type 2 only

  static ConstraintSpec type1(int levels) { return {ConstraintKind::type1, levels, std::nullopt}; }
  static ConstraintSpec type2(int levels, double radius) { return {ConstraintKind::type2, levels, radius}; }

  void validate() const {
    if (levels < 1) throw std::invalid_argument("constraint levels must be >= 1");
    if (kind == ConstraintKind::type2) {
      if (!network_radius || !(*network_radius > 0.0)) {
        throw std::invalid_argument("Type 2 constraint needs network_radius > 0");
      }
    } else if (network_radius) {
      throw std::invalid_argument("Type 1 constraint takes no network_radius");
    }
  }
};

// Defaults are a standard real-coded GA; nothing here is protocol-mandated.
struct OptimizerConfig {
  int population_size = 64;
  int generations = 200;
  double crossover_rate = 0.8;   // uniform crossover
  double mutation_rate = 0.15;   // per gene
  double mutation_scale = 0.1;   // Gaussian sigma as a multiple of eps_min
  int elitism_count = 2;
  double penalty_weight = 1e3;   // multiple of the baseline schedule's energy
  std::uint64_t rng_seed = 1;
  double epsilon_floor = 1e-3;   // gene bounds, multiples of tau_d
  double epsilon_cap = 20.0;
  double baseline_margin = 0.05; // baseline individual is eps_min (1 + margin)
  int tournament_size = 2;
  unsigned threads = 1;

  void validate() const {
    if (population_size < 2) throw std::invalid_argument("population_size must be >= 2");
    if (generations < 1) throw std::invalid_argument("generations must be >= 1");
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit(crossover_rate) || !unit(mutation_rate)) {
      throw std::invalid_argument("crossover_rate and mutation_rate must lie in [0, 1]");
    }
    if (!(mutation_scale > 0.0)) throw std::invalid_argument("mutation_scale must be > 0");
    if (elitism_count < 0 || elitism_count >= population_size) {
      throw std::invalid_argument("elitism_count must be in [0, population_size)");
    }
    if (!(penalty_weight > 0.0)) throw std::invalid_argument("penalty_weight must be > 0");
    if (!(epsilon_floor > 0.0) || !(epsilon_cap > epsilon_floor) || !std::isfinite(epsilon_cap)) {
      throw std::invalid_argument("need 0 < epsilon_floor < epsilon_cap < inf");
    }
    if (!(baseline_margin >= 0.0)) throw std::invalid_argument("baseline_margin must be >= 0");
    if (tournament_size < 1) throw std::invalid_argument("tournament_size must be >= 1");
  }
};

// DD_k = (r_d,k+2 - r_d,k+1) - (r_d,k+1 - r_d,k).
inline double double_difference(const RingSequence& seq, int k) {
  if (k < 1 || static_cast<std::size_t>(k) + 2 > seq.size()) {
    throw std::out_of_range("double_difference: need at least k+2 rings");
  }
  const double r0 = seq.level(k).outer_radius();
  const double r1 = seq.level(k + 1).outer_radius();
  const double r2 = seq.level(k + 2).outer_radius();
  return (r2 - r1) - (r1 - r0);
}

// First level whose double difference is constrained under Type 1.
inline constexpr int kFirstConstrainedLevel = 4;

struct Evaluation {
  double energy = 0.0;      // xi over the levels that were reached
  bool feasible = false;
  double violation = 0.0;   // 0 iff feasible; grows with the shortfall
  RingSequence rings;
};

inline Evaluation evaluate(const EpsilonSchedule& schedule, const ContinuumParams& params,
                           const ConstraintSpec& constraint) {
  constraint.validate();
  if (schedule.size() != static_cast<std::size_t>(constraint.levels)) {
    throw std::invalid_argument("schedule length must equal constraint levels");
  }
  ContinuumParams p = params;
  p.epsilon = schedule.as_epsilons();

  Evaluation ev;
  ev.rings = propagate(p, constraint.levels, {std::numeric_limits<double>::infinity()});
  ev.energy = broadcast_energy(ev.rings, ev.rings.size(), p.relay_power_density);

  const auto levels = static_cast<std::size_t>(constraint.levels);
  const bool survived = ev.rings.size() == levels;
  if (!survived) {
    ev.violation += 1.0 + static_cast<double>(levels - ev.rings.size()) / static_cast<double>(levels);
  }
  if (constraint.kind == ConstraintKind::type1) {
    if (survived) {
      const double scale = ev.rings.level(1).outer_radius();
      for (int k = kFirstConstrainedLevel; k + 2 <= constraint.levels; ++k) {
        const double dd = double_difference(ev.rings, k);
        if (!(dd > 0.0)) ev.violation += 1e-6 + std::abs(dd) / scale;
      }
    }
  } else {
    const double radius = *constraint.network_radius;
    const double reached = ev.rings.rings.back().outer_radius();
    if (!(reached > radius)) ev.violation += 1e-6 + (radius - reached) / radius;
  }
  ev.feasible = ev.violation == 0.0;
  return ev;
}

struct ProfilePoint {
  double radius = 0.0;
  double fes = 0.0;
};

// FES as a step function of radius over r_b,1, r_d,1, r_b,2, r_d,2, ...:
// zero at r_b,1, FES truncated at level k at r_d,k, and that same value
// repeated at r_b,k+1.
inline std::vector<ProfilePoint> fes_profile(const RingSequence& seq, const ContinuumParams& params) {
  if (seq.empty()) throw std::invalid_argument("fes_profile: empty ring sequence");
  const double dr = params.decoding_ratio();
  std::vector<ProfilePoint> out;
  out.reserve(2 * seq.size());
  out.push_back({seq.rings.front().inner_radius(), 0.0});
  for (std::size_t k = 1; k <= seq.size(); ++k) {
    const double value = fraction_energy_saved(seq, k, dr);
    out.push_back({seq.rings[k - 1].outer_radius(), value});
    if (k < seq.size()) out.push_back({seq.rings[k].inner_radius(), value});
  }
  return out;
}

struct OptimizationResult {
  EpsilonSchedule best_schedule;
  double best_energy = 0.0;
  RingSequence rings;
  std::vector<ProfilePoint> fes_profile;
  std::vector<double> generation_trace;  // best fitness so far; equals energy once feasible
};

inline OptimizationResult optimize(const ContinuumParams& params, const ConstraintSpec& constraint,
                                   const OptimizerConfig& config) {
  params.validate();
  constraint.validate();
  config.validate();

  const double tau_d = params.decode_threshold;
  const double eps_min = epsilon_min(tau_d, params.relay_power_density);
  const double lo = config.epsilon_floor * tau_d;
  const double hi = config.epsilon_cap * tau_d;
  const auto genes = static_cast<std::size_t>(constraint.levels);
  const auto pop_size = static_cast<std::size_t>(config.population_size);

  const EpsilonSchedule baseline =
      EpsilonSchedule::constant(genes, std::clamp(eps_min * (1.0 + config.baseline_margin), lo, hi));
  const double baseline_energy = evaluate(baseline, params, constraint).energy;
  const double penalty = config.penalty_weight * std::max(baseline_energy, std::numeric_limits<double>::min());

  struct Individual {
    EpsilonSchedule schedule;
    double fitness = 0.0;
    double energy = 0.0;
    bool feasible = false;
  };

  auto score = [&](std::vector<Individual>& pop) {
    parallel_for(pop.size(), config.threads, [&](std::size_t i) {
      const Evaluation ev = evaluate(pop[i].schedule, params, constraint);
      pop[i].energy = ev.energy;
      pop[i].feasible = ev.feasible;
      pop[i].fitness = ev.energy + penalty * ev.violation;
    });
  };

  Engine rng{config.rng_seed};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, config.mutation_scale * eps_min);

  std::vector<Individual> pop(pop_size);
  pop[0].schedule = baseline;
  const double log_lo = std::log(lo);
  const double log_span = std::log(hi) - log_lo;
  // Odd slots hold constant schedules at a log-uniform level, even slots
  // independent log-uniform genes.
  for (std::size_t i = 1; i < pop_size; ++i) {
    pop[i].schedule.values.resize(genes);
    if (i % 2 == 1) {
      std::fill(pop[i].schedule.values.begin(), pop[i].schedule.values.end(), std::exp(log_lo + log_span * unit(rng)));
    } else {
      for (double& g : pop[i].schedule.values) g = std::exp(log_lo + log_span * unit(rng));
    }
  }
  score(pop);

  std::optional<Individual> best_feasible;
  double best_fitness = std::numeric_limits<double>::infinity();
  OptimizationResult result;
  result.generation_trace.reserve(static_cast<std::size_t>(config.generations) + 1);

  auto record = [&] {
    for (const Individual& ind : pop) {
      best_fitness = std::min(best_fitness, ind.fitness);
      if (ind.feasible && (!best_feasible || ind.energy < best_feasible->energy)) best_feasible = ind;
    }
    result.generation_trace.push_back(best_fitness);
  };
  record();

  std::vector<std::size_t> order(pop_size);
  std::uniform_int_distribution<std::size_t> pick(0, pop_size - 1);
  auto tournament = [&]() -> const Individual& {
    std::size_t winner = pick(rng);
    for (int t = 1; t < config.tournament_size; ++t) {
      const std::size_t challenger = pick(rng);
      if (pop[challenger].fitness < pop[winner].fitness) winner = challenger;
    }
    return pop[winner];
  };

  for (int gen = 1; gen <= config.generations; ++gen) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pop[a].fitness < pop[b].fitness; });

    std::vector<Individual> next;
    next.reserve(pop_size);
    for (int e = 0; e < config.elitism_count; ++e) next.push_back(pop[order[static_cast<std::size_t>(e)]]);
    while (next.size() < pop_size) {
      const Individual& mother = tournament();
      const Individual& father = tournament();
      Individual child{mother.schedule};
      if (unit(rng) < config.crossover_rate) {
        for (std::size_t j = 0; j < genes; ++j) {
          if (unit(rng) < 0.5) child.schedule.values[j] = father.schedule.values[j];
        }
      }
      for (double& g : child.schedule.values) {
        if (unit(rng) < config.mutation_rate) g = std::clamp(g + gauss(rng), lo, hi);
      }
      next.push_back(std::move(child));
    }
    pop = std::move(next);
    score(pop);
    record();
  }

  if (!best_feasible) {
    throw no_feasible_solution("optimize: no feasible schedule after " + std::to_string(config.generations) +
                               " generations");
  }
  Evaluation final_eval = evaluate(best_feasible->schedule, params, constraint);
  ContinuumParams best_params = params;
  best_params.epsilon = best_feasible->schedule.as_epsilons();
  result.best_schedule = best_feasible->schedule;
  result.best_energy = final_eval.energy;
  result.rings = std::move(final_eval.rings);
  result.fes_profile = fes_profile(result.rings, best_params);
  return result;
}

}  // namespace ola::varthresh
