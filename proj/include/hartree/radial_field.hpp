#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "hartree/banded.hpp"

namespace hartree {

using cplx = std::complex<double>;

// Surface area of the unit 3-sphere.
inline constexpr double kSphereArea = 2.0 * 3.14159265358979323846 * 3.14159265358979323846;

// Uniform cell-centred mesh on [0, r_max]: node i sits at (i + 1/2) dr and
// carries the 4D volume weight 2 pi^2 r_i^3 dr. Faces sit at k dr, k = 0..n.
//
// The grid also owns the discrete radial Laplacian. It is built variationally
// from the Dirichlet form  sum_k rho_k |(D u)_k|^2  where D is the fourth-order
// staggered derivative (nodes -> faces) and rho_k = 2 pi^2 f_k^3 dr are face
// quadrature weights. With A = D^T diag(rho) D the Laplacian is -W^{-1} A, which
// is self-adjoint in the weighted inner product used by integrate(). Ghost values
// are even about r = 0 (regularity) and odd about r_max (u(r_max) = 0).
class RadialGrid {
public:
  static constexpr std::size_t kStencil = 4;
  static constexpr std::size_t kHalfBand = 3;

  struct FaceStencil {
    std::size_t index[kStencil];
    double coeff[kStencil];
  };

  RadialGrid(std::size_t n, double r_max);

  std::size_t size() const { return n_; }
  double r_max() const { return r_max_; }
  double dr() const { return dr_; }
  double node(std::size_t i) const { return r_[i]; }
  std::span<const double> nodes() const { return r_; }
  std::span<const double> weights() const { return w_; }
  std::span<const double> face_weights() const { return rho_; }
  std::span<const FaceStencil> face_stencils() const { return faces_; }

  // A = D^T diag(rho) D, symmetric positive definite.
  const BandMatrix<double> &stiffness() const { return stiffness_; }

  // (D u)_k for k = 0..n.
  std::vector<cplx> face_derivative(std::span<const cplx> u) const;
  // A u.
  std::vector<cplx> apply_stiffness(std::span<const cplx> u) const;

  bool same_as(const RadialGrid &other) const {
    return n_ == other.n_ && r_max_ == other.r_max_;
  }

private:
  std::size_t n_;
  double r_max_;
  double dr_;
  std::vector<double> r_;
  std::vector<double> w_;
  std::vector<double> rho_;
  std::vector<FaceStencil> faces_;
  BandMatrix<double> stiffness_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(std::size_t n, double r_max);

// Complex samples u(r_i) of a radial function on a shared grid.
class RadialField {
public:
  explicit RadialField(GridPtr grid);
  RadialField(GridPtr grid, std::vector<cplx> values);

  // Samples f(r_i) of a real profile.
  template <class F>
  static RadialField from_function(GridPtr grid, F &&f) {
    RadialField out(grid);
    for (std::size_t i = 0; i < grid->size(); ++i) out.values_[i] = f(grid->node(i));
    return out;
  }

  const RadialGrid &grid() const { return *grid_; }
  const GridPtr &grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  std::span<const cplx> values() const { return values_; }
  std::span<cplx> values() { return values_; }
  cplx operator[](std::size_t i) const { return values_[i]; }
  cplx &operator[](std::size_t i) { return values_[i]; }

  bool is_finite() const;
  bool is_zero() const;
  // |u|^2 at every node.
  std::vector<double> density() const;

  RadialField &operator*=(cplx s);
  RadialField &operator+=(const RadialField &other);
  RadialField &operator-=(const RadialField &other);

private:
  GridPtr grid_;
  std::vector<cplx> values_;
};

RadialField operator*(cplx s, RadialField u);
RadialField operator+(RadialField a, const RadialField &b);
RadialField operator-(RadialField a, const RadialField &b);

void require_same_grid(const RadialField &a, const RadialField &b);

} // namespace hartree
