#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dwke/collision_kernel.hpp"
#include "dwke/spectrum.hpp"
#include "dwke/weak_form_oracle.hpp"

using namespace dwke;

namespace {
Spectrum sparse(int K, std::initializer_list<std::pair<int, double>> entries) {
  std::vector<double> v(static_cast<std::size_t>(K), 0.0);
  for (const auto& [n, f] : entries) v[static_cast<std::size_t>(n - 1)] = f;
  return Spectrum(K, std::move(v));
}
}  // namespace

TEST_CASE("term_L") {
  CHECK(term_L(sparse(8, {{1, 1.0}}), 2) == Catch::Approx(1.0).margin(1e-15));
  CHECK(term_L(sparse(8, {{1, 0.5}, {3, 0.3}}), 2) ==
        Catch::Approx(0.6732050807568877).epsilon(1e-14));
  CHECK(term_L(sparse(8, {}), 5) == 0.0);
  CHECK_THROWS(term_L(sparse(8, {{1, 1.0}}), 1));
}

TEST_CASE("term_Q") {
  CHECK(term_Q(sparse(8, {{1, 0.6}, {3, 0.2}}), 2) ==
        Catch::Approx(0.2092925127559876).epsilon(1e-14));
  CHECK(term_Q(sparse(8, {{1, 1.0}}), 2) == 0.0);
  CHECK(term_Q(sparse(8, {}), 7) == 0.0);
  CHECK_THROWS(term_Q(sparse(8, {{1, 1.0}}), 0));
}

TEST_CASE("term_U") {
  CHECK(term_U(sparse(8, {{3, 0.3}, {4, 0.2}}), 2) ==
        Catch::Approx(0.024494897427831785).epsilon(1e-14));
  CHECK(term_U(sparse(8, {{1, 0.5}, {2, 0.4}}), 3) ==
        Catch::Approx(0.32659863237109044).epsilon(1e-14));
  CHECK(term_U(sparse(8, {{1, 1.0}}), 2) == 0.0);
  CHECK_THROWS(term_U(sparse(8, {{1, 1.0}}), 1));
}

TEST_CASE("term_C") {
  CHECK(term_C(sparse(8, {{1, 0.5}, {2, 0.4}}), 3) == Catch::Approx(0.04).epsilon(1e-14));
  CHECK(term_C(sparse(8, {{1, 0.5}, {2, 0.4}, {3, 0.3}}), 2) ==
        Catch::Approx(0.048989794855663564).epsilon(1e-14));
  CHECK(term_C(sparse(8, {}), 4) == 0.0);
  CHECK_THROWS(term_C(sparse(8, {{1, 1.0}}), 1));
}

TEST_CASE("kernel terms are non-negative on non-negative spectra") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const Spectrum s = random_spectrum(seed, 10, 19);
    for (int n = 2; n <= 19; ++n) {
      const KernelTerms kt = kernel_terms(s, n);
      CHECK(kt.L >= 0.0);
      CHECK(kt.Q >= 0.0);
      CHECK(kt.U >= 0.0);
      CHECK(kt.C >= 0.0);
      // gain terms are non-negative: rhs_n >= -F_n (U_n + F_n L_n)
      const double row = rhs(s)[static_cast<std::size_t>(n - 1)];
      CHECK(row >= -s.at(n) * (kt.U + s.at(n) * kt.L) - 1e-15);
    }
  }
}

TEST_CASE("rhs hand-checked example and steady Diracs") {
  const std::vector<double> r = rhs(sparse(4, {{1, 0.5}, {2, 0.5}}));
  CHECK(r[0] == Catch::Approx(0.0625).epsilon(1e-13));
  CHECK(r[1] == Catch::Approx(-0.125).epsilon(1e-13));
  CHECK(r[2] == Catch::Approx(0.0625).epsilon(1e-13));
  CHECK(r[3] == 0.0);

  for (const auto& steady : {sparse(5, {{1, 1.0}}), sparse(5, {{2, 1.0}})}) {
    for (double x : rhs(steady)) CHECK(x == 0.0);
  }
}

TEST_CASE("rhs agrees with the weak-form oracle") {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Spectrum s = random_spectrum(seed, 8, 15);
    const auto kr = rhs(s);
    const auto orc = oracle_rhs(s, 15);
    for (int n = 2; n <= 15; ++n) {
      const double a = kr[static_cast<std::size_t>(n - 1)];
      const double b = orc[static_cast<std::size_t>(n - 1)];
      const double diff = std::abs(a - b);
      if (diff > 1e-18) worst = std::max(worst, diff / std::max(std::abs(a), std::abs(b)));
    }
    // the constraint row matches the oracle's condensate row up to the
    // rounding of the row sums
    CHECK(std::abs(kr[0] - orc[0]) < 1e-15);
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("rhs is independent of the thread partition") {
  const Spectrum s = random_spectrum(11, 10, 19);
  const auto seq = rhs(s, 1);
  const auto par = rhs(s, 4);
  REQUIRE(seq.size() == par.size());
  for (std::size_t i = 0; i < seq.size(); ++i) CHECK(seq[i] == par[i]);
}

TEST_CASE("mass and energy nullity of the closed-form rows") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    // cutoff >= 2*maxfreq - 1 so no interaction leaves the window
    const Spectrum s = random_spectrum(seed, 9, 17);
    const auto r = rhs(s);
    CompensatedSum ms, es;
    for (int n = 1; n <= 17; ++n) {
      ms.add(r[static_cast<std::size_t>(n - 1)]);
      es.add(n * r[static_cast<std::size_t>(n - 1)]);
    }
    CHECK(std::abs(ms.value()) <= 1e-12);
    CHECK(std::abs(es.value()) <= 1e-12);
  }
}

TEST_CASE("rhs_H consistency identity") {
  const Spectrum a = sparse(4, {{1, 0.5}, {2, 0.5}});
  CHECK(rhs_H(a, 2) == Catch::Approx(0.5).epsilon(1e-13));
  CHECK_THROWS(rhs_H(sparse(4, {{1, 1.0}}), 2));

  const Spectrum b = sparse(8, {{1, 0.5}, {2, 0.4}, {3, 0.1}});
  const auto rows = rhs(b);
  for (int n = 2; n <= 3; ++n) {
    const double fn = b.at(n);
    const double expected = -rows[static_cast<std::size_t>(n - 1)] / (fn * fn);
    CHECK(rhs_H(b, n) == Catch::Approx(expected).epsilon(1e-12));
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Spectrum s = random_spectrum(seed, 8, 15);
    const auto rows2 = rhs(s);
    for (int n = 2; n <= 8; ++n) {
      const double fn = s.at(n);
      if (fn <= 0.0) continue;
      CHECK(rhs_H(s, n) ==
            Catch::Approx(-rows2[static_cast<std::size_t>(n - 1)] / (fn * fn))
                .epsilon(1e-12)
                .margin(1e-15));
    }
  }
}

TEST_CASE("sort_triple") {
  auto t = sort_triple(1, 2, 3);
  CHECK(t.w_plus == 3);
  CHECK(t.w_zero == 2);
  CHECK(t.w_minus == 1);
  t = sort_triple(2, 2, 3);
  CHECK(t.w_plus == 3);
  CHECK(t.w_zero == 2);
  CHECK(t.w_minus == 2);
  t = sort_triple(5, 5, 5);
  CHECK(t.w_plus == 5);
  CHECK(t.w_minus == 5);
  CHECK_THROWS(sort_triple(-1, 2, 3));
}

TEST_CASE("g_functional vanishes on conserved observables") {
  auto one = [](double) { return 1.0; };
  auto id = [](double w) { return w; };
  for (int a = 1; a <= 6; ++a)
    for (int b = 1; b <= 6; ++b)
      for (int c = 1; c <= 6; ++c) {
        CHECK(g_functional(one, a, b, c) == 0.0);
        CHECK(std::abs(g_functional(id, a, b, c)) < 1e-14);
      }
}

TEST_CASE("g_functional quadratic examples") {
  auto sq = [](double w) { return w * w; };
  CHECK(g_functional(sq, 1, 2, 3) == Catch::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(g_functional(sq, 2, 2, 3) == Catch::Approx(2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("g_functional is non-negative for convex observables") {
  auto sq = [](double w) { return w * w; };
  for (int a = 1; a <= 20; ++a)
    for (int b = 1; b <= 20; ++b)
      for (int c = 1; c <= 20; ++c) CHECK(g_functional(sq, a, b, c) >= 0.0);
  for (double shift : {1.0, 2.0, 3.0, 4.0, 5.0}) {
    auto hinge = [shift](double w) {
      const double d = w - shift;
      return d > 0.0 ? d * d : 0.0;
    };
    for (int a = 1; a <= 12; ++a)
      for (int b = a; b <= 12; ++b)
        for (int c = b; c <= 12; ++c) CHECK(g_functional(hinge, a, b, c) >= 0.0);
  }
}
