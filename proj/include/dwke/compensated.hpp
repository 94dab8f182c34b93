#pragma once

#include <cmath>
#include <initializer_list>

namespace dwke {

/// Neumaier-compensated accumulator. The running compensation keeps the
/// final result accurate to one rounding of the true sum plus an
/// O(n*eps^2) term in the gross magnitude, which is what the 1e-12/1e-13
/// conservation and oracle-equivalence checks need across O(K^3) terms.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// A product of doubles tracked as value + first-order rounding error.
/// Feeding both parts into a CompensatedSum makes each addend exact to
/// O(eps^2), so two routes that sum the same real-valued terms agree far
/// below any cancellation level reachable in double precision.
class Product {
 public:
  Product() = default;
  explicit Product(double x) : hi_(x) {}

  Product& operator*=(double f) {
    const double p = hi_ * f;
    err_ = err_ * f + std::fma(hi_, f, -p);
    hi_ = p;
    return *this;
  }

  double hi() const { return hi_; }
  double err() const { return err_; }

 private:
  double hi_ = 1.0;
  double err_ = 0.0;
};

inline void add_product_term(CompensatedSum& acc, const Product& p) {
  acc.add(p.hi());
  acc.add(p.err());
}

/// acc += f1*f2*...*fn with error-tracked multiplication.
template <class... Fs>
inline void add_product(CompensatedSum& acc, Fs... factors) {
  Product p;
  (void)std::initializer_list<int>{(p *= static_cast<double>(factors), 0)...};
  add_product_term(acc, p);
}

}  // namespace dwke
