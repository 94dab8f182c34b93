#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dwke/compensated.hpp"

namespace dwke {

/// Truncated discrete spectrum: masses F_1..F_K at integer frequencies,
/// tagged with a simulation time. Values are immutable after construction.
class Spectrum {
 public:
  Spectrum(int cutoff, std::vector<double> values, double time = 0.0,
           double mass_tol = 1e-9)
      : cutoff_(cutoff), time_(time), values_(std::move(values)) {
    if (cutoff_ < 2) throw std::invalid_argument("Spectrum: cutoff must be >= 2");
    if (static_cast<int>(values_.size()) != cutoff_)
      throw std::invalid_argument("Spectrum: values size must equal cutoff");
    if (time_ < 0.0) throw std::invalid_argument("Spectrum: time must be >= 0");
    double total = 0.0;
    for (double v : values_) {
      if (!(v >= 0.0)) throw std::invalid_argument("Spectrum: negative or NaN mass entry");
      total += v;
    }
    if (total > 1.0 + mass_tol)
      throw std::invalid_argument("Spectrum: total mass exceeds unit normalization");
  }

  int cutoff() const { return cutoff_; }
  double time() const { return time_; }
  const std::vector<double>& values() const { return values_; }

  /// F_n with F == 0 outside [1, cutoff].
  double at(int n) const {
    if (n < 1 || n > cutoff_) return 0.0;
    return values_[static_cast<std::size_t>(n - 1)];
  }

 private:
  int cutoff_;
  double time_;
  std::vector<double> values_;
};

/// Dirac initial datum: mass M1 at frequency 1 plus a finite tail.
struct InitialData {
  double M1 = 0.0;
  std::vector<std::pair<int, double>> tail;  // (j >= 2, m_j > 0)
};

struct NormalizedSpectrum {
  Spectrum spectrum;
  double rescale_factor;  // input masses were divided by this to reach mass 1
};

/// Places the Dirac weights onto integer bins and normalizes total mass
/// to 1, recording the rescale factor.
inline NormalizedSpectrum make_spectrum(const InitialData& init, int cutoff) {
  if (cutoff < 2) throw std::invalid_argument("make_spectrum: cutoff must be >= 2");
  if (!(init.M1 >= 0.0)) throw std::invalid_argument("make_spectrum: M1 must be >= 0");
  std::vector<double> v(static_cast<std::size_t>(cutoff), 0.0);
  v[0] = init.M1;
  double total = init.M1;
  for (const auto& [j, m] : init.tail) {
    if (j < 2)
      throw std::invalid_argument("make_spectrum: tail frequency " + std::to_string(j) +
                                  " must be an integer >= 2");
    if (j > cutoff)
      throw std::invalid_argument("make_spectrum: tail frequency " + std::to_string(j) +
                                  " exceeds cutoff " + std::to_string(cutoff));
    if (!(m > 0.0))
      throw std::invalid_argument("make_spectrum: tail mass at frequency " +
                                  std::to_string(j) + " must be positive");
    v[static_cast<std::size_t>(j - 1)] += m;
    total += m;
  }
  if (total <= 0.0)
    throw std::invalid_argument("make_spectrum: zero measure has no dynamics");
  for (double& x : v) x /= total;
  return NormalizedSpectrum{Spectrum(cutoff, std::move(v), 0.0), total};
}

inline double mass(const Spectrum& s) {
  CompensatedSum acc;
  for (double v : s.values()) acc.add(v);
  return acc.value();
}

inline double energy(const Spectrum& s) {
  CompensatedSum acc;
  const auto& v = s.values();
  for (int n = 1; n <= s.cutoff(); ++n)
    acc.add(static_cast<double>(n) * v[static_cast<std::size_t>(n - 1)]);
  return acc.value();
}

/// CSV row "t,F_1,...,F_K" with lossless double formatting.
inline std::string to_csv_row(const Spectrum& s) {
  std::ostringstream os;
  os.precision(17);
  os << s.time();
  for (double v : s.values()) os << ',' << v;
  return os.str();
}

namespace detail {
/// Uniform double in [0,1) from the standardized mt19937_64 stream; avoids
/// std::uniform_real_distribution, whose output is implementation-defined.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
}  // namespace detail

/// Seeded random unit-mass spectrum with support inside {1..max_frequency}.
inline Spectrum random_spectrum(std::uint64_t seed, int max_frequency, int cutoff) {
  if (max_frequency < 2 || cutoff < max_frequency)
    throw std::invalid_argument("random_spectrum: need 2 <= max_frequency <= cutoff");
  std::mt19937_64 rng(seed);
  std::vector<double> v(static_cast<std::size_t>(cutoff), 0.0);
  int support = 0;
  while (support < 2) {
    support = 0;
    for (int n = 1; n <= max_frequency; ++n) {
      const bool present = detail::uniform01(rng) < 0.75;
      const double m = present ? 0.02 + detail::uniform01(rng) : 0.0;
      v[static_cast<std::size_t>(n - 1)] = m;
      if (m > 0.0) ++support;
    }
  }
  double total = 0.0;
  for (double x : v) total += x;
  for (double& x : v) x /= total;
  return Spectrum(cutoff, std::move(v), 0.0);
}

}  // namespace dwke
