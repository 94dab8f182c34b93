#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "dwke/compensated.hpp"
#include "dwke/linalg.hpp"
#include "dwke/spectrum.hpp"

namespace dwke {

/// Self-similar coefficient profile of the quadratic toy model.
///
/// Unknowns are beta_2..beta_N; the coefficients beta_{2N}..beta_{3N-2}
/// act as parameters lambda_1..lambda_{N-1}; everything else is pinned to
/// zero (beta_k = 0 for N+1 <= k < 2N and k >= 3N-1).
struct BetaProfile {
  int N = 0;
  std::vector<double> beta;    // beta[j] = beta_{j+2}, size N-1
  std::vector<double> lambda;  // lambda[j] = beta_{2N+j}, size N-1
  double residual_norm = 0.0;
  std::vector<bool> positivity;  // per beta component, value > 0

  double beta_at(int k) const {  // full coefficient sequence with zero pattern
    if (2 <= k && k <= N) return beta[static_cast<std::size_t>(k - 2)];
    if (2 * N <= k && k <= 3 * N - 2) return lambda[static_cast<std::size_t>(k - 2 * N)];
    return 0.0;
  }
  bool all_beta_positive() const {
    for (bool p : positivity)
      if (!p) return false;
    return !positivity.empty();
  }
};

namespace detail {

inline void check_profile_shape(const BetaProfile& p) {
  if (p.N < 4) throw std::invalid_argument("BetaProfile: N must be >= 4");
  if (static_cast<int>(p.beta.size()) != p.N - 1 ||
      static_cast<int>(p.lambda.size()) != p.N - 1)
    throw std::invalid_argument("BetaProfile: beta/lambda must have N-1 entries");
}

inline void refresh_positivity(BetaProfile& p) {
  p.positivity.assign(p.beta.size(), false);
  for (std::size_t i = 0; i < p.beta.size(); ++i) p.positivity[i] = p.beta[i] > 0.0;
}

}  // namespace detail

/// Residual f_n, n = 2..N, of the truncated coefficient system
///   f_n = 2 b_n^2 + 4 b_n sum_{k=2}^{n-1} b_k - 4 b_n b_{2n-1} [2n-1 <= N]
///         - 2 sum_{k=n+1}^{N} b_k b_{k+1-n} - 2 sum_{k=2N+1}^{3N-2} b_k b_{k+1-n}
///         - sqrt(n) b_n,
/// where the parameter sum ranges over the full zero-pattern support, so it
/// also picks up b_{2N} through the second factor.
inline std::vector<double> residual(const BetaProfile& p) {
  detail::check_profile_shape(p);
  const int N = p.N;
  std::vector<double> f(static_cast<std::size_t>(N - 1));
  for (int n = 2; n <= N; ++n) {
    CompensatedSum acc;
    const double bn = p.beta_at(n);
    add_product(acc, 2.0, bn, bn);
    add_product(acc, -std::sqrt(static_cast<double>(n)), bn);
    for (int k = 2; k < n; ++k) add_product(acc, 4.0, bn, p.beta_at(k));
    if (2 * n - 1 <= N) add_product(acc, -4.0, bn, p.beta_at(2 * n - 1));
    for (int k = n + 1; k <= N; ++k)
      add_product(acc, -2.0, p.beta_at(k), p.beta_at(k + 1 - n));
    for (int k = 2 * N + n - 1; k <= 3 * N - 2; ++k)
      add_product(acc, -2.0, p.beta_at(k), p.beta_at(k + 1 - n));
    f[static_cast<std::size_t>(n - 2)] = acc.value();
  }
  return f;
}

inline double residual_max_norm(const BetaProfile& p) {
  double m = 0.0;
  for (double v : residual(p)) m = std::max(m, std::abs(v));
  return m;
}

/// Analytic Jacobian d f_n / d beta_m, rows and columns indexed 2..N.
inline Matrix jacobian_beta(const BetaProfile& p) {
  detail::check_profile_shape(p);
  const int N = p.N;
  Matrix J(N - 1, N - 1, 0.0);
  for (int n = 2; n <= N; ++n) {
    const int r = n - 2;
    const double bn = p.beta_at(n);
    double diag = 4.0 * bn - std::sqrt(static_cast<double>(n));
    for (int k = 2; k < n; ++k) diag += 4.0 * p.beta_at(k);
    if (2 * n - 1 <= N) {
      diag += -4.0 * p.beta_at(2 * n - 1);
      J(r, 2 * n - 1 - 2) += -4.0 * bn;
    }
    J(r, r) += diag;
    for (int m = 2; m < n; ++m) J(r, m - 2) += 4.0 * bn;
    for (int k = n + 1; k <= N; ++k) {
      const int j = k + 1 - n;
      J(r, k - 2) += -2.0 * p.beta_at(j);
      if (2 <= j && j <= N) J(r, j - 2) += -2.0 * p.beta_at(k);
    }
  }
  return J;
}

/// Jacobian of the residual with respect to the parameters lambda,
/// rows n = 2..N, columns j = 1..N-1.
inline Matrix jacobian_lambda(const BetaProfile& p) {
  detail::check_profile_shape(p);
  const int N = p.N;
  Matrix J(N - 1, N - 1, 0.0);
  for (int n = 2; n <= N; ++n) {
    const int r = n - 2;
    for (int k = 2 * N + n - 1; k <= 3 * N - 2; ++k) {
      const int i = k - 2 * N + 1;       // lambda index of b_k
      const int ip = i - n + 1;          // lambda index of b_{k+1-n}
      J(r, i - 1) += -2.0 * p.lambda[static_cast<std::size_t>(ip - 1)];
      J(r, ip - 1) += -2.0 * p.lambda[static_cast<std::size_t>(i - 1)];
    }
  }
  return J;
}

/// The explicit zero of the truncated system: beta_2 = gamma, all other
/// unknowns zero, lambda = (l1, l2, 0, ..., 0), with
/// gamma = (sqrt(2) + sqrt(2 + 16 l1 l2)) / 4.
inline BetaProfile particular_solution(double lambda1, double lambda2, int N) {
  if (N < 4) throw std::invalid_argument("particular_solution: N must be >= 4");
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0))
    throw std::invalid_argument("particular_solution: parameters must be positive");
  BetaProfile p;
  p.N = N;
  p.beta.assign(static_cast<std::size_t>(N - 1), 0.0);
  p.lambda.assign(static_cast<std::size_t>(N - 1), 0.0);
  p.beta[0] = (std::sqrt(2.0) + std::sqrt(2.0 + 16.0 * lambda1 * lambda2)) / 4.0;
  p.lambda[0] = lambda1;
  p.lambda[1] = lambda2;
  p.residual_norm = residual_max_norm(p);
  detail::refresh_positivity(p);
  return p;
}

namespace detail {

inline bool newton_solve(BetaProfile& p, double tol, int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    const std::vector<double> f = residual(p);
    double norm = 0.0;
    for (double v : f) norm = std::max(norm, std::abs(v));
    if (norm <= tol) {
      p.residual_norm = norm;
      return true;
    }
    std::vector<double> step;
    try {
      step = lu_solve(jacobian_beta(p), f);
    } catch (const std::runtime_error&) {
      return false;
    }
    for (std::size_t i = 0; i < p.beta.size(); ++i) p.beta[i] -= step[i];
    double scale = 0.0;
    for (double b : p.beta) scale = std::max(scale, std::abs(b));
    if (!std::isfinite(scale) || scale > 1e8) return false;
  }
  p.residual_norm = residual_max_norm(p);
  return p.residual_norm <= tol;
}

}  // namespace detail

/// Continues the particular solution to lambda = lambda0 + delta * (1,...,1)
/// by Newton iteration from the anchor. Halves delta up to 10 times on
/// non-convergence. The converged profile keeps the lambda values by
/// construction; positivity flags are reported, never silently accepted.
inline BetaProfile continue_solution(double lambda1_0, double lambda2_0, int N,
                                     double delta, double tol = 1e-13,
                                     int max_iter = 50) {
  if (N < 4) throw std::invalid_argument("continue_solution: N must be >= 4");
  if (!(lambda1_0 * lambda2_0 > N / 4.0))
    throw std::invalid_argument(
        "continue_solution: hypothesis lambda1*lambda2 > N/4 violated");
  if (!(delta > 0.0)) throw std::invalid_argument("continue_solution: delta must be > 0");
  double d = delta;
  for (int attempt = 0; attempt <= 10; ++attempt) {
    BetaProfile p = particular_solution(lambda1_0, lambda2_0, N);
    for (double& l : p.lambda) l += d;
    if (detail::newton_solve(p, tol, max_iter)) {
      detail::refresh_positivity(p);
      return p;
    }
    d *= 0.5;
  }
  throw std::runtime_error("continue_solution: delta too large: reduce and retry");
}

/// J_lambda beta at the anchor, via J_beta f^{-1} applied to -J_lambda f.
/// The triangular closed-form inverse of the anchor Jacobian is evaluated
/// as a cross-check; disagreement beyond 1e-12 throws.
inline Matrix ift_slope_pattern(double lambda1_0, double lambda2_0, int N) {
  if (N < 4) throw std::invalid_argument("ift_slope_pattern: N must be >= 4");
  if (!(lambda1_0 * lambda2_0 > N / 4.0))
    throw std::invalid_argument(
        "ift_slope_pattern: hypothesis lambda1*lambda2 > N/4 violated");
  const BetaProfile p = particular_solution(lambda1_0, lambda2_0, N);
  const double g = p.beta[0];
  const Matrix Jb = jacobian_beta(p);
  const Matrix Jl = jacobian_lambda(p);
  const int n = N - 1;
  // closed-form inverse of the upper-bidiagonal anchor Jacobian:
  // diag d_r = 4g - sqrt(r+2), superdiagonal -e_r with e_1 = 6g (the
  // first row couples through both the pair term and the cascade term)
  // and e_r = 2g otherwise; inv(i,j) = (prod_{k=i..j-1} e_k/d_k) / d_j.
  std::vector<double> d(static_cast<std::size_t>(n)), e(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) d[static_cast<std::size_t>(r)] = 4.0 * g - std::sqrt(r + 2.0);
  for (int r = 0; r < n; ++r) e[static_cast<std::size_t>(r)] = (r == 0 ? 6.0 : 2.0) * g;
  Matrix inv(n, n, 0.0);
  for (int i = 0; i < n; ++i) {
    double prod = 1.0;
    for (int j = i; j < n; ++j) {
      if (j > i) prod *= e[static_cast<std::size_t>(j - 1)] / d[static_cast<std::size_t>(j - 1)];
      inv(i, j) = prod / d[static_cast<std::size_t>(j)];
    }
  }
  // cross-check against a direct solve of Jb * x = e_col
  for (int col = 0; col < n; ++col) {
    std::vector<double> rhs(static_cast<std::size_t>(n), 0.0);
    rhs[static_cast<std::size_t>(col)] = 1.0;
    const std::vector<double> x = lu_solve(Jb, rhs);
    for (int i = 0; i < n; ++i)
      if (std::abs(x[static_cast<std::size_t>(i)] - inv(i, col)) >
          1e-12 * std::max(1.0, std::abs(inv(i, col))))
        throw std::runtime_error("ift_slope_pattern: inverse cross-check failed");
  }
  Matrix out(n, n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += inv(i, k) * (-Jl(k, j));
      out(i, j) = acc;
    }
  return out;
}

/// c_n = 2 gamma / (4 gamma - sqrt(n)) of the anchor Jacobian inverse.
inline double cascade_ratio(double gamma, int n) {
  return 2.0 * gamma / (4.0 * gamma - std::sqrt(static_cast<double>(n)));
}

/// Quadratic toy-model right-hand side dF_n/dt for n = 2..n_max, evaluated
/// directly from the time-domain form (independent of the coefficient
/// residual; used to cross-check profiles against the ODE).
inline std::vector<double> toy_model_rhs(const std::vector<double>& F, int n_max) {
  // F[i] holds F_{i+2}, i.e. frequencies 2..(F.size()+1)
  const int top = static_cast<int>(F.size()) + 1;
  auto f = [&](int k) { return (2 <= k && k <= top) ? F[static_cast<std::size_t>(k - 2)] : 0.0; };
  std::vector<double> out(static_cast<std::size_t>(n_max - 1), 0.0);
  for (int n = 2; n <= n_max; ++n) {
    const double sn = std::sqrt(static_cast<double>(n));
    double t = 0.0;
    if (2 * n - 1 <= top)
      t += 4.0 * f(n) / sn * f(2 * n - 1) / std::sqrt(2.0 * n - 1.0);
    double below = 0.0;
    for (int k = 2; k < n; ++k) below += f(k) / std::sqrt(static_cast<double>(k));
    t -= 4.0 * f(n) / sn * below;
    t -= 2.0 * (f(n) / sn) * (f(n) / sn);
    for (int k = n + 1; k <= top; ++k) {
      const int j = k + 1 - n;
      t += 2.0 * f(k) * f(j) / std::sqrt(static_cast<double>(k) * j);
    }
    out[static_cast<std::size_t>(n - 2)] = t;
  }
  return out;
}

/// Roots of the fully truncated system (beta_k = 0 for all k >= N), found
/// by seeded multi-start Newton and deduplicated. Start s draws from a
/// splitmix-derived stream so the result set is reproducible and
/// independent of evaluation order.
inline std::vector<BetaProfile> enumerate_full_truncation(int N, int n_starts,
                                                          std::uint64_t seed) {
  if (N < 4 || N > 8)
    throw std::invalid_argument("enumerate_full_truncation: N must be in [4, 8]");
  if (n_starts < 1) throw std::invalid_argument("enumerate_full_truncation: n_starts >= 1");
  const int dim = N - 2;  // unknowns beta_2..beta_{N-1}

  auto bare_residual = [&](const std::vector<double>& b) {
    auto at = [&](int k) {
      return (2 <= k && k <= N - 1) ? b[static_cast<std::size_t>(k - 2)] : 0.0;
    };
    std::vector<double> f(static_cast<std::size_t>(dim));
    for (int n = 2; n <= N - 1; ++n) {
      CompensatedSum acc;
      const double bn = at(n);
      add_product(acc, 2.0, bn, bn);
      add_product(acc, -std::sqrt(static_cast<double>(n)), bn);
      for (int k = 2; k < n; ++k) add_product(acc, 4.0, bn, at(k));
      if (2 * n - 1 <= N - 1) add_product(acc, -4.0, bn, at(2 * n - 1));
      for (int k = n + 1; k <= N - 1; ++k) add_product(acc, -2.0, at(k), at(k + 1 - n));
      f[static_cast<std::size_t>(n - 2)] = acc.value();
    }
    return f;
  };
  auto bare_jacobian = [&](const std::vector<double>& b) {
    auto at = [&](int k) {
      return (2 <= k && k <= N - 1) ? b[static_cast<std::size_t>(k - 2)] : 0.0;
    };
    Matrix J(dim, dim, 0.0);
    for (int n = 2; n <= N - 1; ++n) {
      const int r = n - 2;
      double diag = 4.0 * at(n) - std::sqrt(static_cast<double>(n));
      for (int k = 2; k < n; ++k) diag += 4.0 * at(k);
      if (2 * n - 1 <= N - 1) {
        diag += -4.0 * at(2 * n - 1);
        J(r, 2 * n - 1 - 2) += -4.0 * at(n);
      }
      J(r, r) += diag;
      for (int m = 2; m < n; ++m) J(r, m - 2) += 4.0 * at(n);
      for (int k = n + 1; k <= N - 1; ++k) {
        const int j = k + 1 - n;
        J(r, k - 2) += -2.0 * at(j);
        if (2 <= j && j <= N - 1) J(r, j - 2) += -2.0 * at(k);
      }
    }
    return J;
  };

  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  };

  std::vector<std::vector<double>> roots;
  for (int s = 0; s < n_starts; ++s) {
    std::mt19937_64 rng(splitmix(seed + static_cast<std::uint64_t>(s)));
    std::vector<double> b(static_cast<std::size_t>(dim));
    for (double& x : b) x = -3.0 + 6.0 * detail::uniform01(rng);
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
      const std::vector<double> f = bare_residual(b);
      double norm = 0.0;
      for (double v : f) norm = std::max(norm, std::abs(v));
      if (norm <= 1e-13) {
        converged = true;
        break;
      }
      std::vector<double> step;
      try {
        step = lu_solve(bare_jacobian(b), f);
      } catch (const std::runtime_error&) {
        break;
      }
      double s2 = 0.0;
      for (std::size_t i = 0; i < b.size(); ++i) {
        b[i] -= step[i];
        s2 = std::max(s2, std::abs(b[i]));
      }
      if (!std::isfinite(s2) || s2 > 1e6) break;
    }
    if (!converged) continue;
    double mag = 0.0;
    for (double x : b) mag = std::max(mag, std::abs(x));
    if (mag > 1e3) continue;
    bool dup = false;
    for (const auto& r : roots) {
      double dist = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) dist = std::max(dist, std::abs(r[i] - b[i]));
      if (dist < 1e-8) {
        dup = true;
        break;
      }
    }
    if (!dup) roots.push_back(b);
  }
  std::sort(roots.begin(), roots.end());

  std::vector<BetaProfile> out;
  for (const auto& r : roots) {
    BetaProfile p;
    p.N = N;
    p.beta.assign(static_cast<std::size_t>(N - 1), 0.0);
    p.lambda.assign(static_cast<std::size_t>(N - 1), 0.0);
    for (int i = 0; i < dim; ++i) p.beta[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(i)];
    double norm = 0.0;
    for (double v : bare_residual(r)) norm = std::max(norm, std::abs(v));
    p.residual_norm = norm;
    detail::refresh_positivity(p);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace dwke
