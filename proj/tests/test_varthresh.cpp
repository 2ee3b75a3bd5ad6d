#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ola/continuum.hpp"
#include "ola/error.hpp"
#include "ola/varthresh.hpp"

using namespace ola;
using namespace ola::varthresh;

namespace {

ContinuumParams fig5_params() { return ContinuumParams::fixed(1.0 / 0.9, 1.0, 3.0, Epsilon::unbounded()); }

ContinuumParams params_at(double dr) { return ContinuumParams::fixed(1.0 / dr, 1.0, 3.0, Epsilon::unbounded()); }

OptimizerConfig small_config(std::uint64_t seed = 1) {
  OptimizerConfig c;
  c.population_size = 24;
  c.generations = 40;
  c.rng_seed = seed;
  return c;
}

}  // namespace

TEST(DoubleDifference, Arithmetic) {
  RingSequence seq;
  for (double r : {1.0, 2.0, 4.0, 7.0}) seq.rings.push_back(Ring{0.0, r * r});
  EXPECT_NEAR(double_difference(seq, 1), 1.0, 1e-12);
  EXPECT_NEAR(double_difference(seq, 2), 1.0, 1e-12);
  EXPECT_THROW(double_difference(seq, 3), std::out_of_range);
}

TEST(Evaluate, Type1ConstantNearMinimumIsConcave) {
  // Just above eps_min the radii still grow sub-linearly over 20 levels.
  const auto p = fig5_params();
  const double e = epsilon_min(1.0, p.relay_power_density);
  const auto ev = evaluate(EpsilonSchedule::constant(20, e * 1.05), p, ConstraintSpec::type1(20));
  EXPECT_FALSE(ev.feasible);
  EXPECT_GT(ev.violation, 0.0);
  EXPECT_EQ(ev.rings.size(), 20u);
}

TEST(Evaluate, Type1ConstantWellAboveMinimumIsFeasible) {
  for (double dr : {0.9, 0.5, 0.1}) {
    const auto p = params_at(dr);
    const double e = epsilon_min(1.0, p.relay_power_density);
    const auto ev = evaluate(EpsilonSchedule::constant(20, e * 2.0), p, ConstraintSpec::type1(20));
    EXPECT_TRUE(ev.feasible) << dr;
    EXPECT_DOUBLE_EQ(ev.violation, 0.0);
  }
  for (double dr : {0.5, 0.1}) {
    const auto p = params_at(dr);
    const double e = epsilon_min(1.0, p.relay_power_density);
    EXPECT_TRUE(evaluate(EpsilonSchedule::constant(20, e * 1.2), p, ConstraintSpec::type1(20)).feasible) << dr;
  }
}

TEST(Evaluate, DeadScheduleIsInfeasible) {
  const auto ev = evaluate(EpsilonSchedule::constant(10, 0.0), fig5_params(), ConstraintSpec::type2(10, 5.0));
  EXPECT_FALSE(ev.feasible);
  EXPECT_GT(ev.violation, 1.0);
  EXPECT_LT(ev.rings.size(), 10u);
}

TEST(Evaluate, Type2RadiusBoundary) {
  const auto p = fig5_params();
  const auto sched = EpsilonSchedule::constant(10, 1.0);
  const auto free_run = evaluate(sched, p, ConstraintSpec::type2(10, 1.0));
  const double reached = free_run.rings.rings.back().outer_radius();
  EXPECT_TRUE(evaluate(sched, p, ConstraintSpec::type2(10, reached * 0.999)).feasible);
  EXPECT_FALSE(evaluate(sched, p, ConstraintSpec::type2(10, reached * 1.001)).feasible);
}

TEST(Evaluate, EnergyMatchesBandAreas) {
  const auto p = fig5_params();
  const auto ev = evaluate(EpsilonSchedule::constant(5, 0.8), p, ConstraintSpec::type2(5, 1.0));
  double sum = 0.0;
  for (const Ring& r : ev.rings.rings) sum += r.band_area_over_pi();
  EXPECT_NEAR(ev.energy, p.relay_power_density * kPi * sum, 1e-9);
}

TEST(Evaluate, RejectsLengthMismatch) {
  EXPECT_THROW(evaluate(EpsilonSchedule::constant(4, 1.0), fig5_params(), ConstraintSpec::type1(5)),
               std::invalid_argument);
}

TEST(Constraint, Validation) {
  EXPECT_THROW(ConstraintSpec::type1(0).validate(), std::invalid_argument);
  EXPECT_THROW(ConstraintSpec::type2(5, -1.0).validate(), std::invalid_argument);
  ConstraintSpec c = ConstraintSpec::type1(5);
  c.network_radius = 3.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(OptimizerConfig, Validation) {
  OptimizerConfig c;
  c.population_size = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.elitism_count = c.population_size;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.mutation_rate = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.epsilon_cap = c.epsilon_floor;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(FesProfile, StepShape) {
  const auto p = ContinuumParams::fixed(1.0 / 0.9, 1.0, 3.0, Epsilon(0.6));
  const auto seq = propagate(p, 6);
  const auto prof = fes_profile(seq, p);
  ASSERT_EQ(prof.size(), 2 * seq.size());
  EXPECT_DOUBLE_EQ(prof.front().radius, seq.rings.front().inner_radius());
  EXPECT_DOUBLE_EQ(prof.front().fes, 0.0);
  for (std::size_t i = 1; i < prof.size(); ++i) EXPECT_GE(prof[i].radius, prof[i - 1].radius);
  for (std::size_t k = 1; k < seq.size(); ++k) EXPECT_DOUBLE_EQ(prof[2 * k - 1].fes, prof[2 * k].fes);
  EXPECT_NEAR(prof.back().fes, fraction_energy_saved(seq, seq.size(), p.decoding_ratio()), 1e-15);
}

TEST(Optimize, SingleLevelPicksFloor) {
  // Level-1 energy falls monotonically as eps shrinks; R below r_d,1 is always met.
  const auto p = fig5_params();
  OptimizerConfig c = small_config();
  const auto res = optimize(p, ConstraintSpec::type2(1, 1.0), c);
  ASSERT_EQ(res.best_schedule.size(), 1u);
  const double floor_energy = evaluate(EpsilonSchedule::constant(1, c.epsilon_floor), p, ConstraintSpec::type2(1, 1.0)).energy;
  EXPECT_NEAR(res.best_energy, floor_energy, floor_energy * 0.05);
}

TEST(Optimize, DeterministicForSeedAndThreads) {
  const auto p = fig5_params();
  const auto spec = ConstraintSpec::type2(8, 8.0);
  OptimizerConfig a = small_config(42);
  OptimizerConfig b = a;
  b.threads = 4;
  const auto ra = optimize(p, spec, a);
  const auto rb = optimize(p, spec, b);
  EXPECT_EQ(ra.best_schedule.values, rb.best_schedule.values);
  EXPECT_EQ(ra.generation_trace, rb.generation_trace);
  EXPECT_EQ(ra.best_energy, rb.best_energy);
}

TEST(Optimize, DifferentSeedsExploreDifferently) {
  const auto p = fig5_params();
  const auto spec = ConstraintSpec::type2(8, 8.0);
  const auto ra = optimize(p, spec, small_config(1));
  const auto rb = optimize(p, spec, small_config(2));
  EXPECT_NE(ra.best_schedule.values, rb.best_schedule.values);
}

TEST(Optimize, ResultIsSelfConsistent) {
  const auto p = fig5_params();
  const auto spec = ConstraintSpec::type2(10, 10.0);
  const auto res = optimize(p, spec, small_config(3));
  const auto ev = evaluate(res.best_schedule, p, spec);
  EXPECT_TRUE(ev.feasible);
  EXPECT_DOUBLE_EQ(ev.energy, res.best_energy);
  ASSERT_EQ(res.rings.size(), 10u);
  EXPECT_GT(res.rings.rings.back().outer_radius(), 10.0);
  for (std::size_t i = 1; i < res.generation_trace.size(); ++i) {
    EXPECT_LE(res.generation_trace[i], res.generation_trace[i - 1]);
  }
  EXPECT_EQ(res.generation_trace.size(), static_cast<std::size_t>(small_config().generations) + 1);
  for (double g : res.best_schedule.values) {
    EXPECT_GE(g, small_config().epsilon_floor);
    EXPECT_LE(g, small_config().epsilon_cap);
  }
}

TEST(Optimize, AtLeastMatchesSeededBaseline) {
  const auto p = fig5_params();
  OptimizerConfig c = small_config(5);
  const double e = epsilon_min(1.0, p.relay_power_density) * (1.0 + c.baseline_margin);
  const auto base_seq = propagate(ContinuumParams::fixed(p.relay_power_density, 1.0, 3.0, Epsilon(e)), 20);
  const double radius = base_seq.rings.back().outer_radius() * 0.95;
  const auto spec = ConstraintSpec::type2(20, radius);
  const auto baseline = evaluate(EpsilonSchedule::constant(20, e), p, spec);
  ASSERT_TRUE(baseline.feasible);
  const auto res = optimize(p, spec, c);
  EXPECT_LE(res.best_energy, baseline.energy);
}

TEST(Optimize, ThrowsWhenNothingFeasible) {
  OptimizerConfig c = small_config();
  c.generations = 3;
  EXPECT_THROW(optimize(fig5_params(), ConstraintSpec::type2(2, 1e6), c), no_feasible_solution);
}

TEST(Optimize, BeatsConstantScheduleOnFes) {
  const auto p = fig5_params();
  const auto spec = ConstraintSpec::type2(10, 25.0);
  OptimizerConfig c;
  c.generations = 80;
  const auto res = optimize(p, spec, c);
  const double final_fes = res.fes_profile.back().fes;
  EXPECT_GT(final_fes, 0.15);
}
