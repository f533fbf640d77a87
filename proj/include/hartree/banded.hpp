#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "hartree/errors.hpp"

namespace hartree {

// Square band matrix with equal lower/upper bandwidth, stored row-major by
// diagonal offset: entry (i, j) lives at data[i * (2b+1) + (j - i + b)].
template <class T>
class BandMatrix {
public:
  BandMatrix() = default;
  BandMatrix(std::size_t n, std::size_t half_band)
      : n_(n), b_(half_band), data_(n * (2 * half_band + 1), T{}) {}

  std::size_t size() const { return n_; }
  std::size_t half_band() const { return b_; }

  bool in_band(std::size_t i, std::size_t j) const {
    return (j + b_ >= i) && (j <= i + b_) && i < n_ && j < n_;
  }

  T &at(std::size_t i, std::size_t j) { return data_[i * width() + (j + b_ - i)]; }
  const T &at(std::size_t i, std::size_t j) const {
    return data_[i * width() + (j + b_ - i)];
  }

  template <class V>
  void multiply(std::span<const V> x, std::span<V> y) const {
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t lo = i >= b_ ? i - b_ : 0;
      const std::size_t hi = std::min(n_ - 1, i + b_);
      V acc{};
      for (std::size_t j = lo; j <= hi; ++j) acc += at(i, j) * x[j];
      y[i] = acc;
    }
  }

private:
  std::size_t width() const { return 2 * b_ + 1; }

  std::size_t n_ = 0;
  std::size_t b_ = 0;
  std::vector<T> data_;
};

// LU factorisation without pivoting. Every system solved in this library has a
// positive-definite Hermitian part (W + dt*A or W + i*dt/2*A with W > 0 diagonal
// and A symmetric positive semi-definite), for which elimination without
// pivoting is stable.
template <class T>
class BandLU {
public:
  explicit BandLU(BandMatrix<T> m) : lu_(std::move(m)) {
    const std::size_t n = lu_.size();
    const std::size_t b = lu_.half_band();
    for (std::size_t k = 0; k < n; ++k) {
      const T pivot = lu_.at(k, k);
      if (!(std::abs(pivot) > 0.0) || !std::isfinite(std::abs(pivot))) {
        throw LinearAlgebraError("band LU: zero or non-finite pivot at row " +
                                 std::to_string(k));
      }
      const std::size_t last = std::min(n - 1, k + b);
      for (std::size_t i = k + 1; i <= last; ++i) {
        T &lik = lu_.at(i, k);
        lik /= pivot;
        for (std::size_t j = k + 1; j <= last; ++j) {
          lu_.at(i, j) -= lik * lu_.at(k, j);
        }
      }
    }
  }

  template <class V>
  std::vector<V> solve(std::span<const V> rhs) const {
    const std::size_t n = lu_.size();
    const std::size_t b = lu_.half_band();
    if (rhs.size() != n) throw DimensionError("band LU: right-hand side length mismatch");
    std::vector<V> x(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i >= b ? i - b : 0;
      for (std::size_t j = lo; j < i; ++j) x[i] -= lu_.at(i, j) * x[j];
    }
    for (std::size_t ii = n; ii-- > 0;) {
      const std::size_t hi = std::min(n - 1, ii + b);
      for (std::size_t j = ii + 1; j <= hi; ++j) x[ii] -= lu_.at(ii, j) * x[j];
      x[ii] /= lu_.at(ii, ii);
    }
    for (const auto &v : x) {
      if (!std::isfinite(std::abs(v))) throw LinearAlgebraError("band LU: non-finite solution");
    }
    return x;
  }

private:
  BandMatrix<T> lu_;
};

} // namespace hartree
