#pragma once

// Continuum / deterministic-model analytics for OLA, OLA-T and OLA-VT
// broadcast. All radii are in reference-distance units and are carried
// squared internally because the ring recursion is linear in r^2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ola/error.hpp"

namespace ola {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kLn2 = std::numbers::ln2;

// Largest decoding ratio tau_d / P_r for which Basic OLA sustains broadcast.
inline constexpr double kBasicOlaMaxDecodingRatio = kPi * kLn2;

// A ring whose outer radius grows by no more than this has "died".
inline constexpr double kGrowthTolerance = 1e-12;

// propagate() stops once r_d^2 exceeds this; growth is then unbounded for all
// practical purposes.
inline constexpr double kGrowthCapSq = 1e12;

// |A1 - 1| below this makes the closed form ill-conditioned.
inline constexpr double kDegenerateEigenvalueTolerance = 1e-9;

// Offset tau_b - tau_d between transmission and decoding thresholds.
// The unbounded offset removes the upper threshold, i.e. Basic OLA at that
// level; limits involving it are taken analytically, never through exp().
class Epsilon {
 public:
  constexpr Epsilon() = default;

  // +inf is accepted and maps to unbounded().
  explicit Epsilon(double value) : value_(value) {
    if (std::isnan(value) || value < 0.0) {
      throw std::domain_error("epsilon must be >= 0, got " + std::to_string(value));
    }
  }

  static constexpr Epsilon unbounded() {
    Epsilon e;
    e.value_ = std::numeric_limits<double>::infinity();
    return e;
  }

  constexpr bool is_unbounded() const { return value_ == std::numeric_limits<double>::infinity(); }

  // +inf when unbounded.
  constexpr double value() const { return value_; }

  friend constexpr bool operator==(Epsilon, Epsilon) = default;

 private:
  double value_ = 0.0;
};

// Normalized protocol parameters. Level k uses epsilon[min(k, size) - 1], so a
// single entry is the fixed-epsilon protocol and the last entry extends.
struct ContinuumParams {
  double relay_power_density = 1.0;  // P_r bar, relay power per unit area
  double decode_threshold = 1.0;     // tau_d
  double source_power = 3.0;         // P_s
  std::vector<Epsilon> epsilon{Epsilon::unbounded()};

  static ContinuumParams fixed(double relay_power_density, double decode_threshold,
                               double source_power, Epsilon eps) {
    return ContinuumParams{relay_power_density, decode_threshold, source_power, {eps}};
  }

  double decoding_ratio() const { return decode_threshold / relay_power_density; }

  Epsilon epsilon_at(int level) const {
    if (epsilon.empty()) throw std::invalid_argument("epsilon schedule is empty");
    const auto idx = static_cast<std::size_t>(std::max(level, 1) - 1);
    return epsilon[std::min(idx, epsilon.size() - 1)];
  }

  bool constant_epsilon() const {
    return !epsilon.empty() &&
           std::all_of(epsilon.begin(), epsilon.end(), [&](Epsilon e) { return e == epsilon.front(); });
  }

  void validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(relay_power_density)) throw std::domain_error("relay_power_density must be finite and > 0");
    if (!positive(decode_threshold)) throw std::domain_error("decode_threshold must be finite and > 0");
    if (!positive(source_power)) throw std::domain_error("source_power must be finite and > 0");
    if (!std::isfinite(decoding_ratio())) throw std::domain_error("decoding ratio is not finite");
    if (epsilon.empty()) throw std::invalid_argument("epsilon schedule is empty");
  }
};

// One OLA level: squared inner (r_b) and outer (r_d) boundary radii.
struct Ring {
  double inner_sq = 0.0;
  double outer_sq = 0.0;

  double inner_radius() const { return std::sqrt(inner_sq); }
  double outer_radius() const { return std::sqrt(outer_sq); }
  double band_area_over_pi() const { return outer_sq - inner_sq; }
};

struct RingSequence {
  std::vector<Ring> rings;          // rings[k-1] is level k
  std::optional<int> died_at;       // first level that failed to grow
  bool growth_capped = false;       // stopped at kGrowthCapSq

  std::size_t size() const { return rings.size(); }
  bool empty() const { return rings.empty(); }
  const Ring& level(int k) const { return rings.at(static_cast<std::size_t>(k - 1)); }
};

// beta(tau) - 1 = exp(tau / (pi P_r)) - 1.
inline double beta_minus_one(double tau, double relay_power_density) {
  return std::expm1(tau / (kPi * relay_power_density));
}

// alpha(tau) = 1 / (beta(tau) - 1); zero for an unbounded threshold.
inline double alpha(double tau, double relay_power_density) {
  if (std::isinf(tau)) return 0.0;
  return 1.0 / beta_minus_one(tau, relay_power_density);
}

inline double transmit_threshold(double decode_threshold, Epsilon eps) {
  return eps.is_unbounded() ? std::numeric_limits<double>::infinity() : decode_threshold + eps.value();
}

// Aggregate inverse-square path loss at distance p from the centre of a
// uniformly filled disc of radius r0: pi ln(p^2 / |p^2 - r0^2|).
inline double aggregate_path_loss(double disc_radius, double distance) {
  if (!(disc_radius >= 0.0) || !(distance > 0.0)) {
    throw std::domain_error("aggregate_path_loss: need disc_radius >= 0 and distance > 0");
  }
  if (distance == disc_radius) {
    throw singular_input("aggregate_path_loss: distance equals disc radius");
  }
  const double q = (disc_radius / distance) * (disc_radius / distance);
  if (q < 1.0) return -kPi * std::log1p(-q);
  return -kPi * std::log(q - 1.0);
}

// Basic OLA sustains broadcast iff tau_d <= pi ln2 P_r.
inline double basic_ola_max_decode_threshold(double relay_power_density) {
  if (!(relay_power_density > 0.0) || !std::isfinite(relay_power_density)) {
    throw std::domain_error("relay_power_density must be finite and > 0");
  }
  return kBasicOlaMaxDecodingRatio * relay_power_density;
}

struct NextRing {
  Ring ring;
  bool grew = false;  // false: no new decoders, the broadcast died
};

// Boundaries of level k+1 from level k. Written as r'^2 = r_d^2 + alpha (r_d^2 - r_b^2),
// which is (beta r_d^2 - r_b^2) / (beta - 1) without the cancellation.
inline NextRing next_ring(const Ring& prev, double decode_threshold, Epsilon eps,
                          double relay_power_density) {
  if (!(prev.inner_sq >= 0.0) || prev.inner_sq > prev.outer_sq) {
    throw std::domain_error("next_ring: need 0 <= r_b^2 <= r_d^2");
  }
  const double width = prev.outer_sq - prev.inner_sq;
  const double alpha_d = alpha(decode_threshold, relay_power_density);
  const double alpha_b = alpha(transmit_threshold(decode_threshold, eps), relay_power_density);
  NextRing out;
  out.ring.outer_sq = prev.outer_sq + alpha_d * width;
  out.ring.inner_sq = prev.outer_sq + alpha_b * width;
  out.grew = out.ring.outer_radius() > prev.outer_radius() + kGrowthTolerance;
  return out;
}

struct PropagateOptions {
  double growth_cap_sq = kGrowthCapSq;
};

inline Ring first_ring(const ContinuumParams& params) {
  const double tau_b = transmit_threshold(params.decode_threshold, params.epsilon_at(1));
  return Ring{std::isinf(tau_b) ? 0.0 : params.source_power / tau_b,
              params.source_power / params.decode_threshold};
}

// Iterates the ring recursion from the source's initial conditions. A dead
// broadcast truncates the sequence and sets died_at; it never throws for that.
inline RingSequence propagate(const ContinuumParams& params, int levels, PropagateOptions opts = {}) {
  params.validate();
  if (levels < 1) throw std::invalid_argument("propagate: levels must be >= 1");
  RingSequence seq;
  seq.rings.reserve(static_cast<std::size_t>(levels));
  seq.rings.push_back(first_ring(params));
  for (int k = 2; k <= levels; ++k) {
    if (seq.rings.back().outer_sq > opts.growth_cap_sq) {
      seq.growth_capped = true;
      break;
    }
    const NextRing next = next_ring(seq.rings.back(), params.decode_threshold, params.epsilon_at(k),
                                    params.relay_power_density);
    if (!next.grew) {
      seq.died_at = k;
      break;
    }
    seq.rings.push_back(next.ring);
  }
  return seq;
}

// A1 = alpha(tau_d) - alpha(tau_b), the non-trivial eigenvalue of the ring recursion.
inline double eigenvalue_a1(double decode_threshold, Epsilon eps, double relay_power_density) {
  return alpha(decode_threshold, relay_power_density) -
         alpha(transmit_threshold(decode_threshold, eps), relay_power_density);
}

struct ClosedFormCoefficients {
  double a1 = 0.0;
  double a2 = 1.0;
  double eta1 = 0.0, eta2 = 0.0;    // r_d^2 multipliers of A1^(k-1), A2^(k-1)
  double zeta1 = 0.0, zeta2 = 0.0;  // r_b^2 multipliers
  double alpha_d = 0.0, alpha_b = 0.0;
  double beta_d = 0.0, beta_b = 0.0;
};

inline ClosedFormCoefficients closed_form_coefficients(const ContinuumParams& params) {
  params.validate();
  if (!params.constant_epsilon()) {
    throw std::invalid_argument("closed form requires a constant epsilon schedule");
  }
  const double tau_d = params.decode_threshold;
  const double tau_b = transmit_threshold(tau_d, params.epsilon.front());
  const double pr = params.relay_power_density;
  ClosedFormCoefficients c;
  c.alpha_d = alpha(tau_d, pr);
  c.alpha_b = alpha(tau_b, pr);
  c.beta_d = std::exp(tau_d / (kPi * pr));
  c.beta_b = std::isinf(tau_b) ? tau_b : std::exp(tau_b / (kPi * pr));
  c.a1 = c.alpha_d - c.alpha_b;
  c.a2 = 1.0;
  const double outer0 = params.source_power / tau_d;
  const double inner0 = std::isinf(tau_b) ? 0.0 : params.source_power / tau_b;
  auto eta = [&](double a) { return (a + c.alpha_b) * outer0 - c.alpha_d * inner0; };
  auto zeta = [&](double a) { return (1.0 + c.alpha_b) * outer0 + (a - c.alpha_d - 1.0) * inner0; };
  c.eta1 = eta(c.a1);
  c.eta2 = eta(c.a2);
  c.zeta1 = zeta(c.a1);
  c.zeta2 = zeta(c.a2);
  return c;
}

// Closed-form level-k boundaries for constant epsilon:
//   r^2_k = (m1 A1^(k-1) - m2) / (A1 - 1),
// evaluated as m1 (A1^(k-1) - 1)/(A1 - 1) + r^2_1 so the k = 1 term is exact.
inline Ring closed_form_ring(const ContinuumParams& params, int k) {
  if (k < 1) throw std::invalid_argument("closed_form_ring: k must be >= 1");
  const ClosedFormCoefficients c = closed_form_coefficients(params);
  const double gap = c.a1 - c.a2;
  if (std::abs(gap) < kDegenerateEigenvalueTolerance) {
    throw degenerate_eigenvalue("closed_form_ring: A1 is within tolerance of 1");
  }
  const Ring r1 = first_ring(params);
  if (k == 1) return r1;
  const double growth = std::expm1(static_cast<double>(k - 1) * std::log(c.a1)) / gap;
  return Ring{c.zeta1 * growth + r1.inner_sq, c.eta1 * growth + r1.outer_sq};
}

// Level-k ring, using the closed form unless A1 is degenerate.
inline Ring ring_at(const ContinuumParams& params, int k) {
  try {
    return closed_form_ring(params, k);
  } catch (const degenerate_eigenvalue&) {
    Ring r = first_ring(params);
    for (int j = 2; j <= k; ++j) {
      r = next_ring(r, params.decode_threshold, params.epsilon_at(j), params.relay_power_density).ring;
    }
    return r;
  }
}

// Smallest threshold offset that sustains OLA-T broadcast (A1 = 1):
//   eps_min = -(P_r pi ln(2 - exp(tau_d / (P_r pi))) + tau_d).
inline double epsilon_min(double decode_threshold, double relay_power_density) {
  if (!(decode_threshold > 0.0) || !(relay_power_density > 0.0)) {
    throw std::domain_error("epsilon_min: thresholds and power must be > 0");
  }
  const double x = decode_threshold / (relay_power_density * kPi);
  if (!(x < kLn2)) {
    throw infeasible_model("epsilon_min: tau_d >= pi ln2 P_r, no epsilon sustains broadcast");
  }
  return -(relay_power_density * kPi * std::log1p(-std::expm1(x)) + decode_threshold);
}

// Sustained broadcast iff A1 > 1 (strict).
inline bool broadcast_sustains(double decode_threshold, Epsilon eps, double relay_power_density) {
  return eigenvalue_a1(decode_threshold, eps, relay_power_density) > 1.0;
}

// Same condition in threshold form: exp(tau_d/(P_r pi)) + exp(-tau_b/(P_r pi)) < 2.
inline bool sustains_threshold_condition(double decode_threshold, Epsilon eps, double relay_power_density) {
  const double scale = relay_power_density * kPi;
  const double far = eps.is_unbounded() ? 0.0 : std::exp(-(decode_threshold + eps.value()) / scale);
  return std::exp(decode_threshold / scale) + far < 2.0;
}

inline double rtt_db_to_epsilon(double rtt_db, double decode_threshold) {
  return decode_threshold * std::expm1(rtt_db / 10.0 * std::numbers::ln10);
}

inline double epsilon_to_rtt_db(double eps, double decode_threshold) {
  return 10.0 * std::log10(1.0 + eps / decode_threshold);
}

// Minimum relative transmission threshold tau_b,min / tau_d in dB.
inline double mrtt_db(double decoding_ratio) {
  return epsilon_to_rtt_db(epsilon_min(decoding_ratio, 1.0), decoding_ratio);
}

// Sum of r_d^2 - r_b^2 over the first `levels` rings.
inline double band_area_sum(const RingSequence& seq, std::size_t levels) {
  double sum = 0.0;
  for (std::size_t i = 0; i < levels; ++i) sum += seq.rings[i].band_area_over_pi();
  return sum;
}

// xi^L = P_r T_s sum pi (r_d^2 - r_b^2), with T_s = 1.
inline double broadcast_energy(const RingSequence& seq, std::size_t levels, double relay_power_density) {
  return relay_power_density * kPi * band_area_sum(seq, std::min(levels, seq.size()));
}

// FES of the first `levels` rings relative to Basic OLA whose decoding ratio
// is basic_ola_ratio (pi ln2 is Basic OLA in its minimum-energy configuration).
inline double fraction_energy_saved(const RingSequence& seq, std::size_t levels, double decoding_ratio,
                                    double basic_ola_ratio = kBasicOlaMaxDecodingRatio) {
  if (levels < 1 || levels > seq.size()) throw std::out_of_range("fraction_energy_saved: bad level count");
  return 1.0 - basic_ola_ratio * band_area_sum(seq, levels) /
                   (decoding_ratio * seq.rings[levels - 1].outer_sq);
}

inline double fes(const ContinuumParams& params, int levels,
                  double basic_ola_ratio = kBasicOlaMaxDecodingRatio) {
  const RingSequence seq = propagate(params, levels, {std::numeric_limits<double>::infinity()});
  if (seq.size() < static_cast<std::size_t>(levels)) {
    throw propagation_failure("fes: rings died at level " + std::to_string(seq.died_at.value_or(0)),
                              seq.died_at.value_or(0));
  }
  return fraction_energy_saved(seq, static_cast<std::size_t>(levels), params.decoding_ratio(), basic_ola_ratio);
}

struct MrttPoint {
  double decoding_ratio = 0.0;
  double mrtt_db = 0.0;
};

struct MrttCurve {
  std::vector<MrttPoint> points;
  std::vector<double> skipped;  // infeasible decoding ratios
};

inline MrttCurve mrtt_curve(std::span<const double> dr_grid) {
  MrttCurve curve;
  for (double dr : dr_grid) {
    if (!(dr > 0.0) || !(dr < kBasicOlaMaxDecodingRatio)) {
      curve.skipped.push_back(dr);
      continue;
    }
    curve.points.push_back({dr, mrtt_db(dr)});
  }
  return curve;
}

}  // namespace ola
