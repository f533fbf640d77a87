#pragma once

#include <span>
#include <vector>

#include "hartree/radial_field.hpp"

namespace hartree {

// Phi = |x|^{-2} * |u|^2 sampled at the grid nodes.
struct Potential {
  GridPtr grid;
  std::vector<double> values;

  double operator[](std::size_t i) const { return values[i]; }
};

// Phi = 4 pi^2 Psi with -Delta Psi = f, Psi(inf) = 0, through the enclosed
// charge N(r) = int_0^r f 2 pi^2 s^3 ds and Psi(r) = int_r^inf N / (2 pi^2 s^3) ds.
// N is accumulated from exact cell moments of a quadratic fit of f, Psi by an
// end-corrected trapezoid rule on the faces plus the monopole tail
// N(r_max) / (4 pi^2 r_max^2); face values are brought back to the nodes with
// a four-point midpoint interpolant.
Potential potential_from_density(const GridPtr &grid, std::span<const double> f);
Potential potential(const RadialField &u);

// Direct quadrature of int |u(y)|^2 / |x - y|^2 dy at |x| = r_query, with u
// interpolated by piecewise cubics and the 4D angular kernel
// 4 pi int_0^pi sin^2 t / (r^2 + s^2 - 2 r s cos t) dt evaluated numerically.
// Slow; intended for verification only. Throws OracleFailure when two
// quadrature orders disagree beyond 1e-9 relative.
double potential_oracle(const RadialField &u, double r_query);

// ||u||_{L^V}^4 = integral of Phi |u|^2.
double lv4(const RadialField &u);

// 1/2 kinetic - 1/4 lv4.
double energy(const RadialField &u);

// J(u) = mass^2 * kinetic / lv4.
double gn_functional(const RadialField &u);

} // namespace hartree
