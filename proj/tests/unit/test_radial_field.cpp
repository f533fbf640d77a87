#include <doctest.h>

#include <cmath>
#include <random>

#include "hartree/errors.hpp"
#include "hartree/functionals.hpp"
#include "support.hpp"

using namespace hartree;
using test::kPi2;

namespace {

RadialField gaussian_field(const GridPtr &g, double scale = 1.0) {
  return RadialField::from_function(g, [&](double r) { return cplx(std::exp(-0.5 * scale * scale * r * r)); });
}

// lam^2 u(lam r) by interpolation on the same grid.
RadialField rescaled(const RadialField &u, double lam) {
  RadialField out(u.grid_ptr());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = lam * lam * interpolate(u, lam * u.grid().node(i));
  return out;
}

} // namespace

TEST_SUITE("radial_field") {

TEST_CASE("grid nodes are cell centred, positive and increasing with 4D volume weights") {
  const auto g = make_grid(64, 2.0);
  CHECK(g->dr() == doctest::Approx(2.0 / 64));
  for (std::size_t i = 0; i < g->size(); ++i) {
    CHECK(g->node(i) == doctest::Approx((i + 0.5) * g->dr()));
    CHECK(g->node(i) > 0.0);
    if (i > 0) CHECK(g->node(i) > g->node(i - 1));
    const double r = g->node(i);
    CHECK(g->weights()[i] == doctest::Approx(2.0 * kPi2 * r * r * r * g->dr()).epsilon(1e-14));
  }
}

TEST_CASE("grid and field construction reject bad input") {
  CHECK_THROWS_AS(make_grid(4, 1.0), PreconditionError);
  CHECK_THROWS_AS(make_grid(64, 0.0), PreconditionError);
  const auto g = make_grid(16, 1.0);
  CHECK_THROWS_AS(RadialField(g, std::vector<cplx>(15)), DimensionError);
  const auto h = make_grid(32, 1.0);
  CHECK_THROWS_AS(RadialField(g) + RadialField(h), DimensionError);
}

TEST_CASE("field arithmetic and finiteness") {
  const auto g = make_grid(16, 1.0);
  RadialField u = RadialField::from_function(g, [](double r) { return cplx(r, -r); });
  CHECK_FALSE(u.is_zero());
  CHECK(RadialField(g).is_zero());
  CHECK(u.is_finite());
  const RadialField d = u + u - cplx(2.0) * u;
  CHECK(d.is_zero());
  u[3] = cplx(std::nan(""), 0.0);
  CHECK_FALSE(u.is_finite());
}

TEST_CASE("integrate: zero, Gaussian and volume examples") {
  const auto g = make_grid(2048, 8.0);
  CHECK(integrate(*g, std::vector<double>(g->size(), 0.0)) == 0.0);

  std::vector<double> f(g->size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(-g->node(i) * g->node(i));
  CHECK(std::abs(integrate(*g, f) / kPi2 - 1.0) < 1e-8);

  const auto unit = make_grid(256, 1.0);
  const double vol = integrate(*unit, std::vector<double>(unit->size(), 1.0));
  CHECK(std::abs(vol / (0.5 * kPi2) - 1.0) < 1e-4);

  CHECK_THROWS_AS(integrate(*g, std::vector<double>(3)), DimensionError);
}

TEST_CASE("integrate is linear") {
  const auto g = make_grid(512, 8.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> a(g->size()), b(g->size()), c(g->size());
  for (auto &x : a) x = d(rng);
  for (auto &x : b) x = d(rng);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 2.5 * a[i] - 0.75 * b[i];
  const double lhs = integrate(*g, c);
  const double rhs = 2.5 * integrate(*g, a) - 0.75 * integrate(*g, b);
  CHECK(std::abs(lhs - rhs) < 1e-12 * (std::abs(lhs) + 1.0));
}

TEST_CASE("Gaussian mass quadrature converges at least at second order") {
  double prev = 0.0;
  for (std::size_t n : {32, 64, 128}) {
    const auto g = make_grid(n, 8.0);
    const double err = std::abs(mass(gaussian_field(g)) - std::numbers::pi);
    if (prev > 0.0) CHECK(prev / err >= 3.0);
    prev = err;
  }
}

TEST_CASE("mass: examples, homogeneity and phase invariance") {
  const auto &g = test::default_grid();
  CHECK(mass(RadialField(g)) == 0.0);
  const RadialField u = gaussian_field(g);
  CHECK(std::abs(mass(u) / std::numbers::pi - 1.0) < 1e-6);
  CHECK(mass(cplx(2.0) * u) == doctest::Approx(2.0 * mass(u)).epsilon(1e-15));
  CHECK(mass(std::polar(1.0, 0.7) * u) == doctest::Approx(mass(u)).epsilon(1e-15));
}

TEST_CASE("kinetic of the Gaussian is 2 pi^2") {
  const RadialField u = gaussian_field(test::default_grid());
  CHECK(std::abs(kinetic(u) / (2.0 * kPi2) - 1.0) < 1e-4);
  CHECK(kinetic(u) >= 0.0);
}

// Constants are not in the Dirichlet space: the only nonzero face derivatives
// of u = 1 sit at the truncation radius, where the odd ghost values jump.
TEST_CASE("face derivatives of a constant vanish away from the Dirichlet end") {
  const auto g = make_grid(64, 4.0);
  const auto du = g->face_derivative(std::vector<cplx>(g->size(), cplx(1.0)));
  for (std::size_t k = 0; k + 2 < g->size(); ++k) CHECK(std::abs(du[k]) < 1e-12);
  CHECK(std::abs(du[g->size()]) > 1.0);
}

TEST_CASE("mass-critical scaling by resampling") {
  const auto &g = test::default_grid();
  const RadialField u = gaussian_field(g);
  for (double lam : {0.5, 2.0}) {
    const RadialField v = rescaled(u, lam);
    CHECK(std::abs(mass(v) / mass(u) - 1.0) < 1e-4);
    CHECK(std::abs(kinetic(v) / (lam * lam * kinetic(u)) - 1.0) < 1e-3);
    CHECK(std::abs(variance(v).value * lam * lam / variance(u).value - 1.0) < 1e-3);
  }
}

TEST_CASE("variance: examples and the tail-dominance flag") {
  const auto &g = test::default_grid();
  CHECK(variance(RadialField(g)).value == 0.0);
  const auto v = variance(gaussian_field(g));
  CHECK(std::abs(v.value / (2.0 * kPi2) - 1.0) < 1e-6);
  CHECK_FALSE(v.tail_dominated);
  const RadialField far = RadialField::from_function(g, [](double r) { return cplx(std::exp(-(r - 30.0) * (r - 30.0))); });
  CHECK(variance(far).tail_dominated);
  CHECK(variance(far).value >= 0.0);
}

TEST_CASE("radial_momentum: real fields, chirped Gaussian and phase invariance") {
  const auto &g = test::default_grid();
  std::vector<double> w(g->size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = g->node(i) * g->node(i);

  const RadialField real = RadialField::from_function(g, [](double r) { return cplx(std::exp(-r) * (1.0 + r)); });
  CHECK(std::abs(radial_momentum(real, w)) < 1e-12);

  auto chirp = [](double r) { return std::exp(-0.5 * r * r) * std::polar(1.0, 0.25 * r * r); };
  const RadialField u = RadialField::from_function(g, chirp);
  const double p = radial_momentum(u, w);
  // Im(conj(u) u') = r / 2 |u|^2 and w' = 2r, so the integral is 2 pi^2 * 2.
  CHECK(std::abs(p / (4.0 * kPi2) - 1.0) < 1e-8);

  const auto fine = make_grid(8 * g->size(), g->r_max());
  std::vector<double> wf(fine->size());
  for (std::size_t i = 0; i < wf.size(); ++i) wf[i] = fine->node(i) * fine->node(i);
  const double pf = radial_momentum(RadialField::from_function(fine, chirp), wf);
  CHECK(std::abs(p / pf - 1.0) < 1e-8);

  CHECK(radial_momentum(std::polar(1.0, 1.3) * u, w) == doctest::Approx(p).epsilon(1e-13));
  CHECK_THROWS_AS(radial_momentum(u, std::vector<double>(5)), DimensionError);
}

TEST_CASE("nodal_derivative is fourth-order accurate") {
  double prev = 0.0;
  for (std::size_t n : {128, 256}) {
    const auto g = make_grid(n, 8.0);
    const auto d = nodal_derivative(*g, gaussian_field(g).values());
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = g->node(i);
      err = std::max(err, std::abs(d[i] - cplx(-r * std::exp(-0.5 * r * r))));
    }
    if (prev > 0.0) CHECK(prev / err > 12.0);
    prev = err;
  }
}

TEST_CASE("interpolate: nodes, accuracy, evenness and truncation") {
  const auto g = make_grid(256, 8.0);
  const RadialField u = gaussian_field(g);
  CHECK(interpolate(u, g->node(17)) == u[17]);
  for (double r : {0.0, 0.01, 0.333, 1.7, 5.2}) {
    CHECK(std::abs(interpolate(u, r) - cplx(std::exp(-0.5 * r * r))) < 1e-7);
  }
  CHECK(interpolate(u, -0.4) == interpolate(u, 0.4));
  CHECK(interpolate(u, 8.0) == cplx(0.0));
  CHECK(interpolate(u, 100.0) == cplx(0.0));
}

}
