#pragma once

#include <algorithm>
#include <set>
#include <stdexcept>
#include <vector>

namespace dwke {

/// Finite window onto a set of integer frequencies.
struct FrequencySet {
  std::vector<int> elements;  // sorted, deduplicated, all in [1, window]
  int window = 0;
};

namespace detail {
inline void validate_frequency_set(const FrequencySet& a) {
  if (a.elements.empty())
    throw std::invalid_argument("FrequencySet: empty set");
  if (a.window < 1) throw std::invalid_argument("FrequencySet: window must be >= 1");
  for (int x : a.elements)
    if (x < 1 || x > a.window)
      throw std::invalid_argument("FrequencySet: element outside [1, window]");
}
}  // namespace detail

/// One round of the resonance combination: { x+y-z : x,y,z in a } restricted
/// to [1, window]. Contains the input (take z = y).
inline FrequencySet next_interaction_set(const FrequencySet& a) {
  detail::validate_frequency_set(a);
  std::set<int> out;
  for (int x : a.elements)
    for (int y : a.elements)
      for (int z : a.elements) {
        const int w = x + y - z;
        if (w >= 1 && w <= a.window) out.insert(w);
      }
  return FrequencySet{std::vector<int>(out.begin(), out.end()), a.window};
}

/// Iterates next_interaction_set to its fixed point within the window.
/// The iteration is monotone in a finite lattice, so it terminates.
inline FrequencySet closure_set(const FrequencySet& a1) {
  FrequencySet cur = a1;
  detail::validate_frequency_set(cur);
  std::sort(cur.elements.begin(), cur.elements.end());
  cur.elements.erase(std::unique(cur.elements.begin(), cur.elements.end()),
                     cur.elements.end());
  while (true) {
    FrequencySet next = next_interaction_set(cur);
    if (next.elements == cur.elements) return cur;
    cur = std::move(next);
  }
}

}  // namespace dwke
