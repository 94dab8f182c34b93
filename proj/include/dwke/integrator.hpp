#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dwke/collision_kernel.hpp"
#include "dwke/spectrum.hpp"

namespace dwke {

struct IntegratorConfig {
  double t_end = 100.0;
  double rtol = 1e-9;
  double atol = 1e-12;
  double dt_init = 1e-4;
  double dt_min = 1e-12;
  double dt_max = 10.0;
  double sample_every = 0.5;
  double positivity_floor = 1e-12;

  void validate() const {
    if (!(t_end > 0.0)) throw std::invalid_argument("IntegratorConfig: t_end must be > 0");
    if (!(rtol > 0.0) || !(atol > 0.0))
      throw std::invalid_argument("IntegratorConfig: tolerances must be > 0");
    if (!(0.0 < dt_min && dt_min <= dt_init && dt_init <= dt_max))
      throw std::invalid_argument("IntegratorConfig: need 0 < dt_min <= dt_init <= dt_max");
    if (!(sample_every > 0.0))
      throw std::invalid_argument("IntegratorConfig: sample_every must be > 0");
    if (positivity_floor < 0.0)
      throw std::invalid_argument("IntegratorConfig: positivity_floor must be >= 0");
  }
};

struct TrajectorySample {
  double t;
  std::vector<double> values;  // F_1..F_K
  double mass;
  double energy;
  double mass_drift;
  double energy_drift;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  IntegratorConfig config;
  int cutoff = 0;
  double initial_energy = 0.0;
  std::string termination_reason;
  long accepted_steps = 0;
  long rejected_steps = 0;
  long positivity_rejections = 0;
  double clamped_mass = 0.0;
  double total_error_estimate = 0.0;  // sum of accepted local error norms (scaled)
  double max_mass_drift = 0.0;
  double max_energy_drift = 0.0;

  Spectrum spectrum_at(std::size_t i) const {
    const auto& s = samples.at(i);
    return Spectrum(cutoff, s.values, s.t);
  }
};

namespace detail {

// Dormand-Prince 5(4) tableau (FSAL).
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - b_hat (error weights, including the k7 = f(y_new) stage)
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600;
  static constexpr double e3 = 500.0 / 1113 - 7571.0 / 16695;
  static constexpr double e4 = 125.0 / 192 - 393.0 / 640;
  static constexpr double e5 = -2187.0 / 6784 + 92097.0 / 339200;
  static constexpr double e6 = 11.0 / 84 - 187.0 / 2100;
  static constexpr double e7 = -1.0 / 40;
};

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace detail

/// Integrates the truncated system with an embedded 4(5) pair, PI step
/// control on the mixed error norm max(|e_n| / (atol + rtol |F_n|)),
/// positivity guarding by step rejection plus a tiny clamp, and dense
/// output by linear interpolation at the sampling cadence.
inline Trajectory integrate(const Spectrum& s0, const IntegratorConfig& cfg,
                            int threads = 1) {
  cfg.validate();
  using T = detail::Dopri5;
  const int K = s0.cutoff();
  const std::size_t n = static_cast<std::size_t>(K);

  Trajectory traj;
  traj.config = cfg;
  traj.cutoff = K;
  traj.initial_energy = energy(s0);

  std::vector<double> y = s0.values();
  double t = s0.time();
  const double t_end = s0.time() + cfg.t_end;

  const RootTable roots(K + 1);
  auto deriv = [&](const std::vector<double>& state, std::vector<double>& out) {
    detail::rhs_into(state.data(), K, roots, out, threads);
  };

  auto emit = [&](double ts, const std::vector<double>& vs) {
    TrajectorySample smp;
    smp.t = ts;
    smp.values = vs;
    for (double& x : smp.values)
      if (x < 0.0) x = 0.0;  // interpolation guard
    CompensatedSum m, e;
    for (int i = 1; i <= K; ++i) {
      m.add(smp.values[static_cast<std::size_t>(i - 1)]);
      e.add(i * smp.values[static_cast<std::size_t>(i - 1)]);
    }
    smp.mass = m.value();
    smp.energy = e.value();
    smp.mass_drift = std::abs(smp.mass - 1.0);
    smp.energy_drift = std::abs(smp.energy - traj.initial_energy);
    traj.max_mass_drift = std::max(traj.max_mass_drift, smp.mass_drift);
    traj.max_energy_drift = std::max(traj.max_energy_drift, smp.energy_drift);
    traj.samples.push_back(std::move(smp));
  };

  emit(t, y);
  double next_sample = t + cfg.sample_every;

  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  deriv(y, k1);
  std::vector<double> ytmp(n), ynew(n);
  double h = cfg.dt_init;
  double err_prev = 1.0;
  const double safety = 0.9, min_factor = 0.2, max_factor = 6.0;
  const double pi_alpha = 0.7 / 5.0, pi_beta = 0.4 / 5.0;

  while (t < t_end) {
    h = std::min(h, cfg.dt_max);
    if (t + h > t_end) h = t_end - t;
    if (h < cfg.dt_min) {
      traj.termination_reason = "step underflow";
      return traj;
    }

    auto stage = [&](std::vector<double>& out, auto... pairs) {
      auto apply = [&](std::size_t i, auto... pk) {
        double acc = y[i];
        ((acc += h * pk.first * (*pk.second)[i]), ...);
        out[i] = acc;
      };
      for (std::size_t i = 0; i < n; ++i) apply(i, pairs...);
    };
    using P = std::pair<double, const std::vector<double>*>;
    stage(ytmp, P{T::a21, &k1});
    deriv(ytmp, k2);
    stage(ytmp, P{T::a31, &k1}, P{T::a32, &k2});
    deriv(ytmp, k3);
    stage(ytmp, P{T::a41, &k1}, P{T::a42, &k2}, P{T::a43, &k3});
    deriv(ytmp, k4);
    stage(ytmp, P{T::a51, &k1}, P{T::a52, &k2}, P{T::a53, &k3}, P{T::a54, &k4});
    deriv(ytmp, k5);
    stage(ytmp, P{T::a61, &k1}, P{T::a62, &k2}, P{T::a63, &k3}, P{T::a64, &k4},
          P{T::a65, &k5});
    deriv(ytmp, k6);
    stage(ynew, P{T::b1, &k1}, P{T::b3, &k3}, P{T::b4, &k4}, P{T::b5, &k5},
          P{T::b6, &k6});
    if (!detail::all_finite(ynew)) {
      traj.termination_reason = "numerical blowup";
      return traj;
    }

    bool positivity_ok = true;
    for (std::size_t i = 0; i < n; ++i)
      if (ynew[i] < -cfg.positivity_floor) positivity_ok = false;
    if (!positivity_ok) {
      ++traj.rejected_steps;
      ++traj.positivity_rejections;
      h *= 0.5;
      continue;
    }

    deriv(ynew, k7);
    if (!detail::all_finite(k7)) {
      traj.termination_reason = "numerical blowup";
      return traj;
    }

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h * (T::e1 * k1[i] + T::e3 * k3[i] + T::e4 * k4[i] +
                            T::e5 * k5[i] + T::e6 * k6[i] + T::e7 * k7[i]);
      const double sc = cfg.atol + cfg.rtol * std::abs(y[i]);
      err = std::max(err, std::abs(e) / sc);
    }
    if (err > 1.0) {
      ++traj.rejected_steps;
      const double fac = std::max(min_factor, safety * std::pow(err, -0.2));
      h *= std::min(0.9, fac);
      continue;
    }

    // accepted
    for (std::size_t i = 0; i < n; ++i) {
      if (ynew[i] < 0.0) {
        traj.clamped_mass += -ynew[i];
        ynew[i] = 0.0;
      }
    }
    const double t_new = t + h;
    while (next_sample <= t_new + 1e-14 && next_sample <= t_end + 1e-14) {
      const double ts = std::min(next_sample, t_end);
      const double w = (ts - t) / h;
      std::vector<double> yi(n);
      for (std::size_t i = 0; i < n; ++i) yi[i] = (1.0 - w) * y[i] + w * ynew[i];
      emit(ts, yi);
      next_sample += cfg.sample_every;
    }
    traj.total_error_estimate += err * cfg.rtol;
    ++traj.accepted_steps;
    y.swap(ynew);
    k1.swap(k7);  // FSAL
    t = t_new;

    const double fac = safety * std::pow(std::max(err, 1e-10), -pi_alpha) *
                       std::pow(std::max(err_prev, 1e-10), pi_beta);
    h *= std::clamp(fac, min_factor, max_factor);
    err_prev = std::max(err, 1e-10);
  }
  if (traj.samples.empty() || traj.samples.back().t < t_end - 1e-12) emit(t_end, y);
  traj.termination_reason = "t_end reached";
  return traj;
}

/// CSV with header "t,F_1,...,F_K,mass,energy,mass_drift,energy_drift".
inline void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  os << "t";
  for (int i = 1; i <= traj.cutoff; ++i) os << ",F_" << i;
  os << ",mass,energy,mass_drift,energy_drift\n";
  os.precision(17);
  for (const auto& s : traj.samples) {
    os << s.t;
    for (double v : s.values) os << ',' << v;
    os << ',' << s.mass << ',' << s.energy << ',' << s.mass_drift << ','
       << s.energy_drift << '\n';
  }
}

inline void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_trajectory_csv(traj, os);
}

/// Reads a trajectory back from its CSV (summary fields other than samples
/// are left at defaults except cutoff and initial energy).
inline Trajectory read_trajectory_csv(std::istream& is) {
  Trajectory traj;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("trajectory CSV: empty file");
  int ncols = 1;
  for (char ch : line) ncols += (ch == ',');
  const int K = ncols - 5;
  if (K < 2 || line.rfind("t,F_1", 0) != 0)
    throw std::runtime_error("trajectory CSV: unexpected header");
  traj.cutoff = K;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    TrajectorySample s;
    char comma;
    ls >> s.t;
    s.values.resize(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) ls >> comma >> s.values[static_cast<std::size_t>(i)];
    ls >> comma >> s.mass >> comma >> s.energy >> comma >> s.mass_drift >> comma >>
        s.energy_drift;
    if (!ls) throw std::runtime_error("trajectory CSV: malformed row");
    traj.max_mass_drift = std::max(traj.max_mass_drift, s.mass_drift);
    traj.max_energy_drift = std::max(traj.max_energy_drift, s.energy_drift);
    traj.samples.push_back(std::move(s));
  }
  if (traj.samples.empty()) throw std::runtime_error("trajectory CSV: no samples");
  traj.initial_energy = traj.samples.front().energy;
  return traj;
}

inline Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_trajectory_csv(is);
}

}  // namespace dwke
