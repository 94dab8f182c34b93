#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dwke/collision_kernel.hpp"
#include "dwke/compensated.hpp"
#include "dwke/roots.hpp"
#include "dwke/spectrum.hpp"

namespace dwke {

/// Resonant quadruple (w1, w2, w3) -> w4 = w1 + w2 - w3 with the standard
/// interaction weight Phi = min of the four root frequencies.
struct InteractionTriple {
  int w1, w2, w3;
  int w4;
  double phi_min;
};

inline InteractionTriple make_interaction_triple(int w1, int w2, int w3) {
  if (w1 < 1 || w2 < 1 || w3 < 1)
    throw std::invalid_argument("InteractionTriple: frequencies must be >= 1");
  const int w4 = w1 + w2 - w3;
  if (w4 < 0) throw std::invalid_argument("InteractionTriple: w4 negative");
  const int m = std::min(std::min(w1, w2), std::min(w3, w4));
  return InteractionTriple{w1, w2, w3, w4, std::sqrt(static_cast<double>(m))};
}

/// Brute-force dF_n/dt for n = 1..n_max directly from the weak formulation,
/// accumulating every ordered in-state triple over the support. This is the
/// ground truth the closed-form kernel is verified against.
inline std::vector<double> oracle_rhs(const Spectrum& s, int n_max) {
  if (n_max < 1) throw std::invalid_argument("oracle_rhs: n_max must be >= 1");
  const int K = s.cutoff();
  std::vector<int> supp;
  for (int i = 1; i <= K; ++i)
    if (s.at(i) != 0.0) supp.push_back(i);
  RootTable rt(std::max(2 * K, n_max) + 1);
  std::vector<CompensatedSum> rows(static_cast<std::size_t>(n_max) + 1);
  for (int a : supp) {
    const double fa = s.at(a);
    for (int b : supp) {
      const double fb = s.at(b);
      for (int c : supp) {
        const int d = a + b - c;
        if (d <= 0) continue;  // Phi vanishes at d = 0; skipped explicitly
        const int mn = std::min(std::min(a, b), std::min(c, d));
        Product w(rt.s(mn));
        w *= fa;
        w *= fb;
        w *= s.at(c);
        w *= rt.r(a);
        w *= rt.r(b);
        w *= rt.r(c);
        Product neg = w;
        neg *= -1.0;
        if (d <= n_max) add_product_term(rows[static_cast<std::size_t>(d)], w);
        if (c <= n_max) add_product_term(rows[static_cast<std::size_t>(c)], w);
        if (a <= n_max) add_product_term(rows[static_cast<std::size_t>(a)], neg);
        if (b <= n_max) add_product_term(rows[static_cast<std::size_t>(b)], neg);
      }
    }
  }
  std::vector<double> out(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n)
    out[static_cast<std::size_t>(n - 1)] = rows[static_cast<std::size_t>(n)].value();
  return out;
}

/// d/dt of the observable sum phi(n) F_n, written through the symmetrized
/// functional G_phi. For phi = 1 or phi = id this vanishes; for convex phi
/// it is non-negative.
template <class Phi>
double oracle_functional_rate(const Spectrum& s, Phi&& phi) {
  const int K = s.cutoff();
  std::vector<int> supp;
  for (int i = 1; i <= K; ++i)
    if (s.at(i) != 0.0) supp.push_back(i);
  RootTable rt(2 * K + 1);
  CompensatedSum acc;
  for (int a : supp)
    for (int b : supp)
      for (int c : supp) {
        const double g = g_functional(phi, static_cast<double>(a),
                                      static_cast<double>(b), static_cast<double>(c));
        if (g == 0.0) continue;
        add_product(acc, g, s.at(a), s.at(b), s.at(c), rt.r(a), rt.r(b), rt.r(c));
      }
  return acc.value();
}

}  // namespace dwke
