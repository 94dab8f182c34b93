#include <catch2/catch_amalgamated.hpp>

#include "dwke/spectrum.hpp"

using namespace dwke;

TEST_CASE("make_spectrum places Dirac weights onto integer bins") {
  const auto r = make_spectrum(InitialData{0.5, {{2, 0.5}}}, 8);
  CHECK(r.spectrum.at(1) == 0.5);
  CHECK(r.spectrum.at(2) == 0.5);
  for (int n = 3; n <= 8; ++n) CHECK(r.spectrum.at(n) == 0.0);
  CHECK(r.spectrum.time() == 0.0);
  CHECK(r.rescale_factor == 1.0);

  const auto single = make_spectrum(InitialData{0.0, {{3, 1.0}}}, 8);
  CHECK(single.spectrum.at(3) == 1.0);
  CHECK(single.spectrum.at(1) == 0.0);
}

TEST_CASE("make_spectrum normalizes and records the rescale factor") {
  const auto r = make_spectrum(InitialData{1.0, {{2, 1.0}}}, 8);
  CHECK(r.rescale_factor == 2.0);
  CHECK(r.spectrum.at(1) == 0.5);
  CHECK(r.spectrum.at(2) == 0.5);
  CHECK(mass(r.spectrum) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("make_spectrum rejections") {
  CHECK_THROWS_WITH(make_spectrum(InitialData{0.5, {{9, 0.5}}}, 8),
                    Catch::Matchers::ContainsSubstring("9"));
  CHECK_THROWS(make_spectrum(InitialData{0.0, {}}, 8));          // zero measure
  CHECK_THROWS(make_spectrum(InitialData{0.5, {{1, 0.5}}}, 8));  // tail j < 2
  CHECK_THROWS(make_spectrum(InitialData{0.5, {{3, -0.1}}}, 8)); // negative mass
}

TEST_CASE("mass and energy are the stated finite sums") {
  const auto a = make_spectrum(InitialData{0.5, {{2, 0.5}}}, 8);
  CHECK(mass(a.spectrum) == Catch::Approx(1.0).margin(1e-15));
  CHECK(energy(a.spectrum) == Catch::Approx(1.5).margin(1e-15));

  const auto b = make_spectrum(InitialData{1.0, {}}, 4);
  CHECK(energy(b.spectrum) == 1.0);

  Spectrum c(4, {0.25, 0.25, 0.25, 0.25});
  CHECK(mass(c) == Catch::Approx(1.0).margin(1e-15));
  CHECK(energy(c) == Catch::Approx(2.5).margin(1e-15));
}

TEST_CASE("spectrum invariants are enforced") {
  CHECK_THROWS(Spectrum(1, {1.0}));                   // cutoff >= 2
  CHECK_THROWS(Spectrum(2, {0.5, -0.1}));             // non-negative
  CHECK_THROWS(Spectrum(2, {0.9, 0.9}));              // mass <= 1 + tol
  CHECK_NOTHROW(Spectrum(2, {0.9, 0.9}, 0.0, 0.81));  // configurable tol
}

TEST_CASE("csv row serialization") {
  Spectrum s(3, {0.5, 0.25, 0.25}, 1.5);
  CHECK(to_csv_row(s) == "1.5,0.5,0.25,0.25");
}

TEST_CASE("random spectra are unit mass with bounded support") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Spectrum s = random_spectrum(seed, 10, 19);
    CHECK(mass(s) == Catch::Approx(1.0).margin(1e-12));
    for (int n = 11; n <= 19; ++n) CHECK(s.at(n) == 0.0);
    int support = 0;
    for (int n = 1; n <= 10; ++n) support += s.at(n) > 0.0;
    CHECK(support >= 2);
  }
  // deterministic for a fixed seed
  CHECK(random_spectrum(42, 10, 19).values() == random_spectrum(42, 10, 19).values());
}
