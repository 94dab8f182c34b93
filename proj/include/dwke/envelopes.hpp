#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dwke/integrator.hpp"
#include "dwke/spectrum.hpp"

namespace dwke {

/// Constants of the two-sided decay envelope anchored at time t0:
///   1 - F_1(t) <= c1 / sqrt(b1 (t - t0) + 3E)
///   F_2(t)     >= reciprocal of an explicit integrating-factor majorant,
/// with alpha = max(1, 3E / (16 F_1(t0))) selecting the power of the
/// lower-bound branch. c2, C2 are the reported constants of the weakened
/// power-law form (computed from the same majorant, tight at the anchor
/// for alpha > 1).
struct DecayEnvelope {
  double t0 = 0.0;
  double E = 0.0;
  double F1_t0 = 0.0;
  double F2_t0 = 0.0;
  double c1 = 0.0;
  double b1 = 0.0;
  double alpha = 1.0;
  double c2 = 0.0;
  double C2 = 0.0;
};

namespace detail {
constexpr double kAlphaBranchEps = 1e-12;
}

inline DecayEnvelope envelope_constants(const Spectrum& s_t0, double t0) {
  if (t0 < 0.0) throw std::invalid_argument("envelope_constants: t0 must be >= 0");
  DecayEnvelope env;
  env.t0 = t0;
  env.E = energy(s_t0);
  env.F1_t0 = s_t0.at(1);
  env.F2_t0 = s_t0.at(2);
  if (!(env.F1_t0 > 0.0))
    throw std::invalid_argument(
        "envelope_constants: F_1(t0) = 0; anchor at a positive time where the "
        "condensate has formed");
  const double deficit = 1.0 - env.F1_t0;
  env.c1 = std::sqrt(3.0 * env.E) * deficit;
  env.b1 = 2.0 * env.F1_t0 * deficit * deficit;
  env.alpha = std::max(1.0, 3.0 * env.E / (16.0 * env.F1_t0));
  if (env.b1 > 0.0 && env.F2_t0 > 0.0) {
    const double a = 3.0 * env.E / env.b1;
    const double H20 = 1.0 / env.F2_t0;
    if (env.alpha > 1.0 + detail::kAlphaBranchEps) {
      const double B = 2.0 / (env.alpha - 1.0);
      const double A = B * std::pow(a, 1.0 - env.alpha) + std::pow(a, -env.alpha) * H20;
      env.c2 = 1.0 / A;
      env.C2 = -a * B / A;  // makes the power-law form exact at the anchor
    } else {
      // logarithmic branch: F_2 >= c2 / ((tau+a) log((tau+a)/a) + C2)
      env.c2 = 0.25;
      const double p = env.c2 * H20 / a;
      const double q = 1.0 - 2.0 * env.c2;
      env.C2 = (p >= q) ? q * a * std::exp(p / q - 1.0) : p * a;
    }
  }
  return env;
}

/// Upper envelope on the condensate deficit 1 - F_1(t).
inline double upper_bound_deficit(const DecayEnvelope& env, double t) {
  if (t < env.t0)
    throw std::invalid_argument("upper_bound_deficit: t must be >= t0");
  if (env.c1 == 0.0) return 0.0;
  return env.c1 / std::sqrt(env.b1 * (t - env.t0) + 3.0 * env.E);
}

/// Lower envelope on F_2(t): the reciprocal of the explicit H_2 majorant
///   H_2(tau) <= (2/(alpha-1)) [ a ((tau+a)/a)^alpha - (tau+a) ]
///               + ((tau+a)/a)^alpha H_2(0),     a = 3E/b1, tau = t - t0,
/// with the closed-form log integral replacing the power branch at
/// alpha = 1 (continuity in alpha covers an underflowing alpha-1).
inline double lower_bound_F2(const DecayEnvelope& env, double t, double H2_t0) {
  if (t < env.t0) throw std::invalid_argument("lower_bound_F2: t must be >= t0");
  if (!(H2_t0 > 0.0) || !std::isfinite(H2_t0))
    throw std::invalid_argument("lower_bound_F2: H2_t0 must be finite and positive");
  if (env.b1 == 0.0) return 0.0;  // degenerate anchor, deficit already zero
  const double a = 3.0 * env.E / env.b1;
  const double tau = t - env.t0;
  double majorant;
  if (std::abs(env.alpha - 1.0) <= detail::kAlphaBranchEps) {
    majorant = 2.0 * (tau + a) * std::log((tau + a) / a) + (tau + a) / a * H2_t0;
  } else {
    const double grow = std::pow((tau + a) / a, env.alpha);
    majorant = 2.0 / (env.alpha - 1.0) * (a * grow - (tau + a)) + grow * H2_t0;
  }
  return 1.0 / majorant;
}

/// gamma_n of the conditional lower-bound hypothesis.
inline double gamma_n(double c, int n) {
  if (n < 2) throw std::invalid_argument("gamma_n: n must be >= 2");
  if (!(c > 0.0)) throw std::invalid_argument("gamma_n: c must be > 0");
  double bracket = 1.0 / std::sqrt(static_cast<double>(n + 2));
  if (n > 2) bracket += 1.0 / std::sqrt(static_cast<double>(n + 1)) + 2.0 / std::sqrt(2.0);
  return 2.0 * c / std::sqrt(static_cast<double>(n)) * bracket;
}

/// Conditional lower bound on F_n(t) (anchor shifted to 0), valid when
/// gamma_n(c, n) < 1.
inline double lower_bound_Fn(double c, double C, int n, double Fn_t0, double t) {
  const double g = gamma_n(c, n);
  if (g >= 1.0)
    throw std::invalid_argument("lower_bound_Fn: gamma_n >= 1, n not large enough");
  if (!(Fn_t0 > 0.0)) throw std::invalid_argument("lower_bound_Fn: Fn_t0 must be > 0");
  if (t < 0.0) throw std::invalid_argument("lower_bound_Fn: t must be >= 0");
  if (!(C > 0.0)) throw std::invalid_argument("lower_bound_Fn: C must be > 0");
  const double tc = t + C;
  const double den = 4.0 / (n * (1.0 - g)) * (tc - std::pow(C, 1.0 - g) * std::pow(tc, g)) +
                     std::pow(tc, g) / (C * Fn_t0);
  return 1.0 / den;
}

/// Least-squares slope of log F_n (log(1 - F_1) for n = 1) against log t
/// over the window.
inline double fit_decay_exponent(const Trajectory& traj, int n, double t_lo,
                                 double t_hi) {
  if (n < 1) throw std::invalid_argument("fit_decay_exponent: n must be >= 1");
  if (!(t_lo < t_hi))
    throw std::invalid_argument("fit_decay_exponent: empty window");
  std::vector<double> xs, ys;
  for (const auto& s : traj.samples) {
    if (s.t < t_lo || s.t > t_hi || s.t <= 0.0) continue;
    double v;
    if (n == 1) {
      v = 1.0 - s.values.at(0);
    } else {
      if (n > traj.cutoff) throw std::invalid_argument("fit_decay_exponent: n beyond cutoff");
      v = s.values.at(static_cast<std::size_t>(n - 1));
    }
    if (!(v > 0.0))
      throw std::invalid_argument("fit_decay_exponent: non-positive value in window");
    xs.push_back(std::log(s.t));
    ys.push_back(std::log(v));
  }
  if (xs.size() < 4)
    throw std::invalid_argument("fit_decay_exponent: fewer than 4 samples in window");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

struct EnvelopeViolation {
  double t;
  std::string kind;  // "upper_deficit" | "lower_F2" | "mass_ordering"
  double lhs;
  double rhs;
};

struct EnvelopeReport {
  DecayEnvelope constants;
  double tolerance = 0.0;
  std::vector<EnvelopeViolation> violations;
  std::size_t samples_checked = 0;

  bool pass() const { return violations.empty(); }
};

/// Per-sample envelope verdicts along a trajectory:
///   (i)  1 - F_1(t) <= upper_bound_deficit(t) + tol
///   (ii) F_2(t) >= lower_bound_F2(t) - tol
///   (iii) F_k(t) <= 1 - F_1(t) for all k >= 2.
/// tol defaults to max(1e-9, 10 x max mass drift).
inline EnvelopeReport check_envelopes(const Trajectory& traj, const DecayEnvelope& env,
                                      double tol_override = -1.0) {
  EnvelopeReport rep;
  rep.constants = env;
  rep.tolerance =
      tol_override >= 0.0 ? tol_override : std::max(1e-9, 10.0 * traj.max_mass_drift);
  // anchor sample must exist and match the envelope constants
  bool anchored = false;
  double H20 = 0.0;
  for (const auto& s : traj.samples) {
    if (std::abs(s.t - env.t0) <= 1e-9 * std::max(1.0, std::abs(env.t0))) {
      if (std::abs(s.values.at(0) - env.F1_t0) > 1e-9)
        throw std::invalid_argument("check_envelopes: anchor F_1 mismatch");
      H20 = s.values.size() > 1 && s.values[1] > 0.0 ? 1.0 / s.values[1] : 0.0;
      anchored = true;
      break;
    }
  }
  if (!anchored)
    throw std::invalid_argument("check_envelopes: no sample at the anchor time t0");

  for (const auto& s : traj.samples) {
    if (s.t < env.t0) continue;
    ++rep.samples_checked;
    const double deficit = 1.0 - s.values.at(0);
    const double ub = upper_bound_deficit(env, s.t);
    if (deficit > ub + rep.tolerance)
      rep.violations.push_back({s.t, "upper_deficit", deficit, ub});
    if (H20 > 0.0) {
      const double lb = lower_bound_F2(env, s.t, H20);
      const double f2 = s.values.size() > 1 ? s.values[1] : 0.0;
      if (f2 < lb - rep.tolerance)
        rep.violations.push_back({s.t, "lower_F2", f2, lb});
    }
    for (std::size_t k = 1; k < s.values.size(); ++k) {
      if (s.values[k] > deficit + rep.tolerance) {
        rep.violations.push_back(
            {s.t, "mass_ordering", s.values[k], deficit});
        break;
      }
    }
  }
  return rep;
}

}  // namespace dwke
