#include "hartree/radial_field.hpp"

#include <cmath>
#include <string>

#include "hartree/errors.hpp"

namespace hartree {

namespace {

// Fourth-order staggered first derivative: (u_{k-2} - 27 u_{k-1} + 27 u_k - u_{k+1}) / (24 dr)
// evaluated at face k, with ghost nodes folded back onto the interior.
RadialGrid::FaceStencil make_face_stencil(std::size_t k, std::size_t n, double dr) {
  static constexpr int kOffsets[RadialGrid::kStencil] = {-2, -1, 0, 1};
  static constexpr double kCoeffs[RadialGrid::kStencil] = {1.0, -27.0, 27.0, -1.0};
  RadialGrid::FaceStencil s{};
  const auto nn = static_cast<long>(n);
  for (std::size_t m = 0; m < RadialGrid::kStencil; ++m) {
    long j = static_cast<long>(k) + kOffsets[m];
    double sign = 1.0;
    if (j < 0) {
      j = -j - 1; // even about r = 0
    } else if (j >= nn) {
      j = 2 * nn - 1 - j; // odd about r = r_max
      sign = -1.0;
    }
    s.index[m] = static_cast<std::size_t>(j);
    s.coeff[m] = sign * kCoeffs[m] / (24.0 * dr);
  }
  return s;
}

} // namespace

RadialGrid::RadialGrid(std::size_t n, double r_max)
    : n_(n), r_max_(r_max), dr_(r_max / static_cast<double>(n)) {
  if (n < 8) throw PreconditionError("RadialGrid: need at least 8 nodes");
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw PreconditionError("RadialGrid: r_max must be positive");

  r_.resize(n);
  w_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r_[i] = (static_cast<double>(i) + 0.5) * dr_;
    w_[i] = kSphereArea * r_[i] * r_[i] * r_[i] * dr_;
  }

  rho_.resize(n + 1);
  faces_.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double f = static_cast<double>(k) * dr_;
    rho_[k] = kSphereArea * f * f * f * dr_;
    faces_[k] = make_face_stencil(k, n, dr_);
  }
  rho_[n] *= 0.5; // trapezoid end weight at r_max

  stiffness_ = BandMatrix<double>(n, kHalfBand);
  for (std::size_t k = 0; k <= n; ++k) {
    const auto &s = faces_[k];
    for (std::size_t a = 0; a < kStencil; ++a) {
      for (std::size_t b = 0; b < kStencil; ++b) {
        stiffness_.at(s.index[a], s.index[b]) += rho_[k] * s.coeff[a] * s.coeff[b];
      }
    }
  }
}

std::vector<cplx> RadialGrid::face_derivative(std::span<const cplx> u) const {
  if (u.size() != n_) throw DimensionError("face_derivative: length mismatch");
  std::vector<cplx> du(n_ + 1);
  for (std::size_t k = 0; k <= n_; ++k) {
    const auto &s = faces_[k];
    cplx acc{};
    for (std::size_t m = 0; m < kStencil; ++m) acc += s.coeff[m] * u[s.index[m]];
    du[k] = acc;
  }
  return du;
}

std::vector<cplx> RadialGrid::apply_stiffness(std::span<const cplx> u) const {
  if (u.size() != n_) throw DimensionError("apply_stiffness: length mismatch");
  std::vector<cplx> out(n_);
  stiffness_.multiply<cplx>(u, out);
  return out;
}

GridPtr make_grid(std::size_t n, double r_max) { return std::make_shared<const RadialGrid>(n, r_max); }

RadialField::RadialField(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw PreconditionError("RadialField: null grid");
  values_.assign(grid_->size(), cplx{});
}

RadialField::RadialField(GridPtr grid, std::vector<cplx> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw PreconditionError("RadialField: null grid");
  if (values_.size() != grid_->size()) {
    throw DimensionError("RadialField: " + std::to_string(values_.size()) + " values for a grid of " +
                         std::to_string(grid_->size()) + " nodes");
  }
}

bool RadialField::is_finite() const {
  for (const auto &v : values_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

bool RadialField::is_zero() const {
  for (const auto &v : values_) {
    if (v != cplx{}) return false;
  }
  return true;
}

std::vector<double> RadialField::density() const {
  std::vector<double> d(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) d[i] = std::norm(values_[i]);
  return d;
}

RadialField &RadialField::operator*=(cplx s) {
  for (auto &v : values_) v *= s;
  return *this;
}

RadialField &RadialField::operator+=(const RadialField &other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

RadialField &RadialField::operator-=(const RadialField &other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

RadialField operator*(cplx s, RadialField u) {
  u *= s;
  return u;
}

RadialField operator+(RadialField a, const RadialField &b) {
  a += b;
  return a;
}

RadialField operator-(RadialField a, const RadialField &b) {
  a -= b;
  return a;
}

void require_same_grid(const RadialField &a, const RadialField &b) {
  if (!a.grid().same_as(b.grid())) throw DimensionError("fields live on different grids");
}

} // namespace hartree
