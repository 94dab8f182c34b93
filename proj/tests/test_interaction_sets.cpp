#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dwke/interaction_sets.hpp"

using namespace dwke;

TEST_CASE("next_interaction_set examples") {
  CHECK(next_interaction_set({{1}, 10}).elements == std::vector<int>{1});
  CHECK(next_interaction_set({{1, 2, 3}, 10}).elements == std::vector<int>{1, 2, 3, 4, 5});
  CHECK(next_interaction_set({{1, 3}, 10}).elements == std::vector<int>{1, 3, 5});
  CHECK_THROWS(next_interaction_set({{}, 10}));
}

TEST_CASE("closure_set examples") {
  CHECK(closure_set({{1, 2}, 12}).elements ==
        std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
  CHECK(closure_set({{1, 3}, 9}).elements == std::vector<int>{1, 3, 5, 7, 9});
  CHECK(closure_set({{2}, 9}).elements == std::vector<int>{2});
}

TEST_CASE("next_interaction_set is monotone") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const int window = 5 + static_cast<int>(rng() % 20);
    std::set<int> base;
    const int count = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < count; ++i) base.insert(1 + static_cast<int>(rng() % window));
    FrequencySet a{{base.begin(), base.end()}, window};
    const FrequencySet next = next_interaction_set(a);
    for (int x : a.elements)
      CHECK(std::find(next.elements.begin(), next.elements.end(), x) != next.elements.end());
  }
}

TEST_CASE("closure of {1..N0} fills the window") {
  for (int n0 : {2, 3, 5}) {
    for (int window : {n0, n0 + 3, 17}) {
      std::vector<int> base;
      for (int i = 1; i <= n0; ++i) base.push_back(i);
      const FrequencySet closed = closure_set({base, window});
      REQUIRE(static_cast<int>(closed.elements.size()) == window);
      for (int i = 1; i <= window; ++i) CHECK(closed.elements[i - 1] == i);
    }
  }
}
