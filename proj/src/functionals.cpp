#include "hartree/functionals.hpp"

#include <cmath>

#include "hartree/errors.hpp"

namespace hartree {

namespace {

template <class T>
std::vector<T> nodal_derivative_impl(const RadialGrid &grid, std::span<const T> u, bool dirichlet) {
  const std::size_t n = grid.size();
  if (u.size() != n) throw DimensionError("nodal_derivative: length mismatch");
  const double h = grid.dr();
  const auto at = [&](long j) -> T {
    if (j < 0) return u[static_cast<std::size_t>(-j - 1)];
    if (j >= static_cast<long>(n)) return -u[static_cast<std::size_t>(2 * static_cast<long>(n) - 1 - j)];
    return u[static_cast<std::size_t>(j)];
  };
  std::vector<T> du(n);
  for (std::size_t i = 0; i < n; ++i) {
    const long j = static_cast<long>(i);
    if (!dirichlet && i + 2 >= n) {
      if (i + 1 == n) {
        du[i] = (25.0 * u[i] - 48.0 * u[i - 1] + 36.0 * u[i - 2] - 16.0 * u[i - 3] + 3.0 * u[i - 4]) / (12.0 * h);
      } else {
        du[i] = (3.0 * u[i + 1] + 10.0 * u[i] - 18.0 * u[i - 1] + 6.0 * u[i - 2] - u[i - 3]) / (12.0 * h);
      }
      continue;
    }
    du[i] = (at(j - 2) - 8.0 * at(j - 1) + 8.0 * at(j + 1) - at(j + 2)) / (12.0 * h);
  }
  return du;
}

} // namespace

double integrate(const RadialGrid &grid, std::span<const double> f) {
  if (f.size() != grid.size()) throw DimensionError("integrate: length mismatch");
  const auto w = grid.weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += w[i] * f[i];
  return acc;
}

double mass(const RadialField &u) { return std::sqrt(integrate(u.grid(), u.density())); }

double kinetic(const RadialField &u) {
  const auto du = u.grid().face_derivative(u.values());
  const auto rho = u.grid().face_weights();
  double acc = 0.0;
  for (std::size_t k = 0; k < du.size(); ++k) acc += rho[k] * std::norm(du[k]);
  return acc;
}

VarianceResult variance(const RadialField &u) {
  const auto &g = u.grid();
  const std::size_t n = g.size();
  const auto w = g.weights();
  const std::size_t outer = n - n / 10;
  double total = 0.0;
  double tail = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = w[i] * g.node(i) * g.node(i) * std::norm(u[i]);
    total += c;
    if (i >= outer) tail += c;
  }
  return {total, total > 0.0 && tail > 0.01 * total};
}

double radial_momentum(const RadialField &u, std::span<const double> w) {
  const auto &g = u.grid();
  if (w.size() != g.size()) throw DimensionError("radial_momentum: weight profile length mismatch");
  const auto du = nodal_derivative(g, u.values(), true);
  const auto dw = nodal_derivative(g, w, false);
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = dw[i] * std::imag(std::conj(u[i]) * du[i]);
  return 2.0 * integrate(g, f);
}

std::vector<cplx> nodal_derivative(const RadialGrid &grid, std::span<const cplx> u, bool dirichlet) {
  return nodal_derivative_impl<cplx>(grid, u, dirichlet);
}

std::vector<double> nodal_derivative(const RadialGrid &grid, std::span<const double> w, bool dirichlet) {
  return nodal_derivative_impl<double>(grid, w, dirichlet);
}

cplx interpolate(const RadialField &u, double r) {
  const auto &g = u.grid();
  if (!(std::abs(r) < g.r_max())) return {};
  r = std::abs(r);
  const long n = static_cast<long>(g.size());
  const double s = r / g.dr() - 0.5;
  const long i = static_cast<long>(std::floor(s));
  const double t = s - static_cast<double>(i);
  const auto at = [&](long j) -> cplx {
    if (j < 0) j = -j - 1;
    return j < n ? u[static_cast<std::size_t>(j)] : cplx{};
  };
  const double c0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
  const double c1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  const double c2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
  const double c3 = (t + 1.0) * t * (t - 1.0) / 6.0;
  return c0 * at(i - 1) + c1 * at(i) + c2 * at(i + 1) + c3 * at(i + 2);
}

} // namespace hartree
