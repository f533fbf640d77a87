#include "hartree/potential.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "hartree/errors.hpp"
#include "hartree/functionals.hpp"

namespace hartree {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFourPiSq = 4.0 * kPi * kPi;

// Integral of f * 2 pi^2 s^3 over each cell [r_i - dr/2, r_i + dr/2] with f
// replaced by its local quadratic f_i + f'_i (s - r_i) + f''_i (s - r_i)^2 / 2.
// The s^3 moments are exact, which keeps N(r) ~ r^4 accurate near the origin.
std::vector<double> cell_charges(const RadialGrid &g, std::span<const double> f) {
  const std::size_t n = g.size();
  const double h = g.dr();
  const double h3 = h * h * h;
  const double h5 = h3 * h * h;
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = g.node(i);
    const double fm = i > 0 ? f[i - 1] : f[0];
    const double fp = i + 1 < n ? f[i + 1] : 0.0;
    const double d1 = (fp - fm) / (2.0 * h);
    const double d2 = (fp - 2.0 * f[i] + fm) / (h * h);
    const double m0 = r * r * r * h + r * h3 / 4.0;
    const double m1 = r * r * h3 / 4.0 + h5 / 80.0;
    const double m2 = r * r * r * h3 / 12.0 + 3.0 * r * h5 / 80.0;
    q[i] = kSphereArea * (f[i] * m0 + d1 * m1 + 0.5 * d2 * m2);
  }
  return q;
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_m.
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

GaussRule gauss_legendre(std::size_t m) {
  GaussRule rule{std::vector<double>(m), std::vector<double>(m)};
  for (std::size_t k = 0; k < m; ++k) {
    double x = std::cos(kPi * (static_cast<double>(k) + 0.75) / (static_cast<double>(m) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t j = 2; j <= m; ++j) {
        const double p2 = ((2.0 * static_cast<double>(j) - 1.0) * x * p1 - (static_cast<double>(j) - 1.0) * p0) /
                          static_cast<double>(j);
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(m) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.x[k] = x;
    rule.w[k] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

const GaussRule &cached_rule(std::size_t m) {
  static const std::array<GaussRule, 4> rules = {gauss_legendre(6), gauss_legendre(8), gauss_legendre(16),
                                                 gauss_legendre(24)};
  switch (m) {
  case 6: return rules[0];
  case 8: return rules[1];
  case 16: return rules[2];
  default: return rules[3];
  }
}

// 4 pi int_0^pi sin^2 t / (r^2 + s^2 - 2 r s cos t) dt. The integrand changes on
// the scale |r - s| / max(r, s) near t = 0, so the panels grow geometrically
// from that width up to pi.
double angular_kernel(double r, double s, const GaussRule &rule) {
  const double eps = std::max(std::abs(r - s) / std::max(r, s), 1e-8);
  double a = 0.0;
  double b = std::min(eps, kPi);
  double acc = 0.0;
  const double rs2 = 2.0 * r * s;
  while (a < kPi) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    for (std::size_t k = 0; k < rule.x.size(); ++k) {
      const double t = mid + half * rule.x[k];
      const double st = std::sin(t);
      // 1 - cos t written as 2 sin^2(t/2) to avoid cancellation near t = 0.
      const double sh = std::sin(0.5 * t);
      const double denom = (r - s) * (r - s) + 2.0 * rs2 * sh * sh;
      acc += rule.w[k] * half * st * st / denom;
    }
    a = b;
    b = std::min(2.0 * b, kPi);
  }
  return 4.0 * kPi * acc;
}

double oracle_at_order(const RadialField &u, double rq, std::size_t radial_pts, std::size_t angular_pts) {
  const auto &g = u.grid();
  const GaussRule &rr = cached_rule(radial_pts);
  const GaussRule &ar = cached_rule(angular_pts);
  // Panel breakpoints: 0, the nodes, r_max, and r_query.
  std::vector<double> breaks;
  breaks.reserve(g.size() + 3);
  breaks.push_back(0.0);
  for (double r : g.nodes()) breaks.push_back(r);
  breaks.push_back(g.r_max());
  breaks.push_back(rq);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  double acc = 0.0;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double a = breaks[p];
    const double b = breaks[p + 1];
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    for (std::size_t k = 0; k < rr.x.size(); ++k) {
      const double s = mid + half * rr.x[k];
      const double dens = std::norm(interpolate(u, s));
      if (dens == 0.0) continue;
      acc += rr.w[k] * half * dens * s * s * s * angular_kernel(rq, s, ar);
    }
  }
  return acc;
}

} // namespace

Potential potential_from_density(const GridPtr &grid, std::span<const double> f) {
  const RadialGrid &g = *grid;
  const std::size_t n = g.size();
  if (f.size() != n) throw DimensionError("potential: density length mismatch");
  const double h = g.dr();

  const auto q = cell_charges(g, f);
  std::vector<double> charge(n + 1, 0.0); // N at the faces
  for (std::size_t i = 0; i < n; ++i) charge[i + 1] = charge[i] + q[i];

  // Psi'(r) = -N / (2 pi^2 r^3) =: -h(r); h -> 0 at the origin since N ~ r^4.
  std::vector<double> hf(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    const double face = static_cast<double>(k) * h;
    hf[k] = charge[k] / (kSphereArea * face * face * face);
  }
  std::vector<double> dh(n + 1);
  for (std::size_t k = 1; k < n; ++k) dh[k] = (hf[k + 1] - hf[k - 1]) / (2.0 * h);
  dh[0] = (-3.0 * hf[0] + 4.0 * hf[1] - hf[2]) / (2.0 * h);
  dh[n] = (3.0 * hf[n] - 4.0 * hf[n - 1] + hf[n - 2]) / (2.0 * h);

  // Psi at faces: monopole tail, then the trapezoid rule inward with the
  // Euler-Maclaurin end correction.
  std::vector<double> phi_face(n + 1);
  const double tail = charge[n] / (kFourPiSq * g.r_max() * g.r_max());
  double cum = 0.0;
  phi_face[n] = kFourPiSq * tail;
  for (std::size_t k = n; k-- > 0;) {
    cum += 0.5 * h * (hf[k] + hf[k + 1]);
    phi_face[k] = kFourPiSq * (tail + cum - h * h / 12.0 * (dh[n] - dh[k]));
  }

  // Nodes sit midway between faces: (9 (a + b) - (c + d)) / 16, with the face
  // values extended evenly through the origin and by the exterior monopole
  // N / r^2 past r_max.
  const double outside = charge[n] / ((g.r_max() + h) * (g.r_max() + h));
  const auto face_at = [&](long k) {
    if (k < 0) return phi_face[static_cast<std::size_t>(-k)];
    if (k > static_cast<long>(n)) return outside;
    return phi_face[static_cast<std::size_t>(k)];
  };
  Potential out{grid, std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const long k = static_cast<long>(i);
    out.values[i] = (9.0 * (face_at(k) + face_at(k + 1)) - (face_at(k - 1) + face_at(k + 2))) / 16.0;
  }
  return out;
}

Potential potential(const RadialField &u) { return potential_from_density(u.grid_ptr(), u.density()); }

double potential_oracle(const RadialField &u, double r_query) {
  if (!(r_query > 0.0 && r_query < u.grid().r_max())) {
    throw PreconditionError("potential_oracle: r_query must lie in (0, r_max)");
  }
  const double coarse = oracle_at_order(u, r_query, 6, 16);
  const double fine = oracle_at_order(u, r_query, 8, 24);
  if (!std::isfinite(fine) || std::abs(fine - coarse) > 1e-9 * std::abs(fine)) {
    throw OracleFailure("potential_oracle: quadrature did not converge at r = " + std::to_string(r_query));
  }
  return fine;
}

double lv4(const RadialField &u) {
  const auto phi = potential(u);
  const auto dens = u.density();
  std::vector<double> f(dens.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = phi.values[i] * dens[i];
  return integrate(u.grid(), f);
}

double energy(const RadialField &u) { return 0.5 * kinetic(u) - 0.25 * lv4(u); }

double gn_functional(const RadialField &u) {
  const double l = lv4(u);
  if (!(l > 0.0)) throw UndefinedFunctionalError("gn_functional: lv4(u) vanishes");
  const double m = mass(u);
  return m * m * kinetic(u) / l;
}

} // namespace hartree
