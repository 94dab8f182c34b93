#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dwke {

/// Precomputed sqrt(i) and 1/sqrt(i) for integer frequencies.
///
/// The collision kernel and the weak-form oracle must consume identical
/// rounded root factors: every kernel term is assembled from the same
/// s(i)/r(i) multiset as the oracle triple it represents, so the two
/// routes differ only at the eps^2 level even on rows that nearly cancel.
class RootTable {
 public:
  explicit RootTable(int max_index) {
    if (max_index < 1) throw std::invalid_argument("RootTable: max_index must be >= 1");
    sqrt_.resize(static_cast<std::size_t>(max_index) + 1);
    rsqrt_.resize(static_cast<std::size_t>(max_index) + 1);
    sqrt_[0] = 0.0;
    rsqrt_[0] = 0.0;  // index 0 never multiplies a nonzero factor
    for (int i = 1; i <= max_index; ++i) {
      sqrt_[static_cast<std::size_t>(i)] = std::sqrt(static_cast<double>(i));
      rsqrt_[static_cast<std::size_t>(i)] = 1.0 / sqrt_[static_cast<std::size_t>(i)];
    }
  }

  double s(int i) const { return sqrt_[static_cast<std::size_t>(i)]; }
  double r(int i) const { return rsqrt_[static_cast<std::size_t>(i)]; }
  int max_index() const { return static_cast<int>(sqrt_.size()) - 1; }

 private:
  std::vector<double> sqrt_;
  std::vector<double> rsqrt_;
};

}  // namespace dwke
