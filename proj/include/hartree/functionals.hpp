#pragma once

#include <span>
#include <vector>

#include "hartree/radial_field.hpp"

namespace hartree {

// sum_i f_i * 2 pi^2 r_i^3 dr
double integrate(const RadialGrid &grid, std::span<const double> f);

// L2 norm (not its square).
double mass(const RadialField &u);

// Integral of |du/dr|^2, i.e. <u, A u> for the grid's stiffness matrix.
double kinetic(const RadialField &u);

struct VarianceResult {
  double value = 0.0;
  // r^2 |u|^2 in the outer 10% of the grid carries more than 1% of the total.
  bool tail_dominated = false;
};

VarianceResult variance(const RadialField &u);

// 2 * integral of w'(r) Im(conj(u) u'(r)).
double radial_momentum(const RadialField &u, std::span<const double> w);

// Fourth-order centred derivative at the nodes. The field is extended evenly
// through r = 0; past r_max it is extended oddly when dirichlet is set and
// otherwise differentiated with one-sided stencils.
std::vector<cplx> nodal_derivative(const RadialGrid &grid, std::span<const cplx> u, bool dirichlet = true);
std::vector<double> nodal_derivative(const RadialGrid &grid, std::span<const double> w, bool dirichlet);

// Cubic Lagrange interpolation through the four nearest nodes. Even about the
// origin; zero at and beyond r_max.
cplx interpolate(const RadialField &u, double r);

} // namespace hartree
