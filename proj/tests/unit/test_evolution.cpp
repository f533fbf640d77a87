#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hartree/errors.hpp"
#include "hartree/evolution.hpp"
#include "hartree/experiments.hpp"
#include "hartree/functionals.hpp"
#include "hartree/potential.hpp"
#include "support.hpp"

using namespace hartree;

namespace {

RadialField modulus(const RadialField &u) {
  RadialField out(u.grid_ptr());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::abs(u[i]);
  return out;
}

} // namespace

TEST_SUITE("evolution") {

TEST_CASE("step_strang: zero stays zero, dt must be positive") {
  const RadialField z(test::default_grid());
  CHECK(step_strang(z, 1e-3).is_zero());
  CHECK_THROWS_AS(step_strang(z, 0.0), PreconditionError);
}

TEST_CASE("the solitary wave keeps its modulus for 1000 steps") {
  const auto &gs = test::ground_state();
  RadialField u = gs.q;
  for (int k = 0; k < 1000; ++k) u = step_strang(u, 1e-3);
  CHECK(test::rel_l2(modulus(u), gs.q) < 1e-3);
}

TEST_CASE("a free step has third-order local error against the closed form") {
  const GaussianParams p{1.0, 1.0};
  const auto &g = test::default_grid();
  const RadialField u0 = gaussian(g, p.amplitude, p.sigma);
  auto local = [&](double dt) { return test::rel_l2(step_strang(u0, dt, 0.0), free_reference(g, p, dt)); };
  const double ratio = local(0.04) / local(0.02);
  CHECK(ratio > 7.0);
  CHECK(ratio < 9.0);
}

TEST_CASE("free_reference: initial value, unitarity and quadratic variance") {
  const auto &g = test::default_grid();
  const GaussianParams p{1.0, 1.0};
  const RadialField u0 = gaussian(g, p.amplitude, p.sigma);
  const RadialField f0 = free_reference(g, p, 0.0);
  for (std::size_t i = 0; i < u0.size(); ++i) CHECK(f0[i] == u0[i]);
  for (double t : {0.5, 1.0, 2.0}) CHECK(std::abs(mass(free_reference(g, p, t)) / mass(u0) - 1.0) < 1e-10);

  // Fit v = a + b t^2 on t = 0, 0.1, ..., 1.
  double s00 = 0, s01 = 0, s11 = 0, y0 = 0, y1 = 0;
  std::vector<std::pair<double, double>> pts;
  for (int k = 0; k <= 10; ++k) {
    const double t = 0.1 * k, x = t * t;
    const double v = variance(free_reference(g, p, t)).value;
    pts.emplace_back(x, v);
    s00 += 1; s01 += x; s11 += x * x; y0 += v; y1 += x * v;
  }
  const double det = s00 * s11 - s01 * s01;
  const double a = (y0 * s11 - y1 * s01) / det, b = (s00 * y1 - s01 * y0) / det;
  double rss = 0.0;
  for (const auto &[x, v] : pts) rss += (a + b * x - v) * (a + b * x - v);
  CHECK(std::sqrt(rss / pts.size()) < 1e-6);
  CHECK_THROWS_AS(free_reference(g, {1.0, 0.0}, 1.0), PreconditionError);
}

TEST_CASE("evolve validates its inputs") {
  const RadialField u = gaussian(test::default_grid(), 1.0);
  EvolutionConfig bad;
  bad.dt0 = 0.0;
  CHECK_THROWS_AS(evolve(u, bad), ConfigError);
  bad = EvolutionConfig{};
  bad.monitor_stride = 0;
  CHECK_THROWS_AS(evolve(u, bad), ConfigError);
  CHECK_THROWS_AS(evolve(RadialField(test::default_grid()), EvolutionConfig{}), PreconditionError);
  RadialField nan = u;
  nan[5] = std::nan("");
  CHECK_THROWS_AS(evolve(nan, EvolutionConfig{}), PreconditionError);
}

TEST_CASE("sub-threshold run: completes, stays bounded, conserves mass and energy") {
  const auto &gs = test::ground_state();
  const auto &tr = test::subcritical_run();
  CHECK(tr.termination == Termination::completed);
  CHECK(tr.t_final == 2.0);
  const auto &s0 = tr.samples.front();
  const double bound = 2.0 * s0.energy / (1.0 - s0.mass * s0.mass / (gs.mass * gs.mass));
  for (std::size_t i = 0; i < tr.samples.size(); ++i) {
    const auto &s = tr.samples[i];
    CHECK(s.kinetic <= bound + 1e-3);
    CHECK(std::abs(s.mass - s0.mass) / s0.mass < 1e-6 * std::max(s.t, 1.0));
    CHECK(std::abs(s.energy - s0.energy) / std::max(std::abs(s0.energy), s0.mass * s0.mass) < 1e-4 * std::max(s.t, 1.0));
    if (i > 0) {
      CHECK(s.t > tr.samples[i - 1].t);
      CHECK(s.l3_accum >= tr.samples[i - 1].l3_accum);
    }
  }
}

TEST_CASE("supercritical run is detected as blow-up") {
  const auto &tr = test::supercritical_run();
  CHECK(tr.termination == Termination::blowup_detected);
  CHECK(std::isfinite(tr.t_est));
  CHECK(tr.t_est >= tr.t_final);
  CHECK(tr.samples.back().grad_norm >= 10.0 * tr.samples.front().grad_norm);
  CHECK(tr.samples.back().spectral_tail > 0.01);
  for (std::size_t i = 1; i < tr.samples.size(); ++i) CHECK(tr.samples[i].l3_accum >= tr.samples[i - 1].l3_accum);
}

TEST_CASE("tiny Gaussian follows the free solution") {
  const GaussianParams p{1e-3, 1.0};
  const auto &g = test::default_grid();
  const Trajectory tr = evolve(gaussian(g, p.amplitude, p.sigma), test::until(1.0));
  CHECK(test::rel_l2(tr.checkpoints.back().second, free_reference(g, p, 1.0)) < 1e-5);
}

TEST_CASE("virial_series: 1.2Q, Q and the free Gaussian") {
  const auto &sup = test::supercritical_run();
  const double e0 = sup.samples.front().energy;
  CHECK(e0 < 0.0);
  CHECK(std::abs(virial_series(sup, 0.5).second_derivative / (16.0 * e0) - 1.0) < 0.02);

  const auto &gs = test::ground_state();
  const Trajectory still = evolve(gs.q, test::until(0.5));
  CHECK(std::abs(virial_series(still).second_derivative) < 1e-2 * gs.mass * gs.mass);

  EvolutionConfig cfg = test::until(1.0);
  cfg.coupling = 0.0;
  const Trajectory lin = evolve(gaussian(test::default_grid(), 1.0), cfg);
  const auto fit = virial_series(lin);
  CHECK(std::abs(fit.second_derivative / (8.0 * lin.samples.front().kinetic) - 1.0) < 0.01);
  CHECK(fit.residual < 1e-6);
}

TEST_CASE("virial_series needs ten samples") {
  EvolutionConfig cfg = test::until(0.05);
  const Trajectory tr = evolve(gaussian(test::default_grid(), 0.1), cfg);
  CHECK(tr.samples.size() < 10);
  CHECK_THROWS_AS(virial_series(tr), InsufficientDataError);
}

TEST_CASE("localized momentum bound at mass ||Q||") {
  const auto &gs = test::ground_state();
  const auto &g = test::default_grid();
  RadialField u0 = gs.q;
  for (std::size_t i = 0; i < u0.size(); ++i) u0[i] *= std::polar(1.0, 0.1 * g->node(i) * g->node(i));
  EvolutionConfig cfg = test::until(0.5);
  cfg.checkpoint_stride = 25;
  const Trajectory tr = evolve(u0, cfg);
  // Smoothed |x|^2 weight.
  std::vector<double> w(g->size()), dw2(g->size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double r = g->node(i);
    w[i] = r * r / (1.0 + r * r / 64.0);
    const double d = 2.0 * r / ((1.0 + r * r / 64.0) * (1.0 + r * r / 64.0));
    dw2[i] = d * d;
  }
  for (const auto &[t, u] : tr.checkpoints) {
    const double e = energy(u);
    REQUIRE(e > 0.0);
    std::vector<double> f(u.size());
    const auto dens = u.density();
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = dens[i] * dw2[i];
    // radial_momentum carries the factor 2 of the virial derivative, so the
    // bound on the bare integral doubles.
    const double rhs = 2.0 * std::sqrt(2.0 * e) * std::sqrt(integrate(*g, f));
    CHECK(std::abs(radial_momentum(u, w)) <= rhs * (1.0 + 1e-3));
  }
}

TEST_CASE("halving dt shows second-order convergence on the solitary wave") {
  const auto &gs = test::ground_state();
  auto run = [&](double dt) {
    EvolutionConfig cfg = test::until(1.0);
    cfg.dt0 = dt;
    return evolve(gs.q, cfg).checkpoints.back().second;
  };
  const RadialField ref = run(0.01 / 8.0);
  const double ratio = test::rel_l2(run(0.01), ref) / test::rel_l2(run(0.005), ref);
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("resolution failures terminate the run") {
  const RadialField u = gaussian(test::default_grid(), 1.0);
  EvolutionConfig cfg = test::until(0.1);
  cfg.dt_floor = 1e-2;
  const Trajectory tr = evolve(u, cfg);
  CHECK(tr.termination == Termination::resolution_failure);
  CHECK_FALSE(tr.message.empty());
}

TEST_CASE("spectral_tail separates smooth fields from grid-scale noise") {
  const auto &g = test::default_grid();
  CHECK(spectral_tail(gaussian(g, 1.0)) < 1e-4);
  CHECK(spectral_tail(RadialField(g)) == 0.0);
  const RadialField zigzag = RadialField::from_function(g, [&](double r) {
    const double sign = static_cast<long>(r / g->dr()) % 2 ? -1.0 : 1.0;
    return cplx(sign * std::exp(-0.5 * r * r));
  });
  CHECK(spectral_tail(zigzag) > 0.5);
}

TEST_CASE("estimate_blowup_time extrapolates 1/grad_norm") {
  std::vector<TrajectorySample> s(30);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i].t = 0.01 * i;
    s[i].grad_norm = 1.0 / (2.0 * (0.5 - s[i].t));
  }
  CHECK(estimate_blowup_time(s) == doctest::Approx(0.5).epsilon(1e-10));
  for (auto &x : s) x.grad_norm = 1.0;
  CHECK(std::isnan(estimate_blowup_time(s)));
}

TEST_CASE("trajectory CSV has the documented header and a JSON footer") {
  const auto &tr = test::subcritical_run();
  std::ostringstream out;
  write_trajectory_csv(out, tr);
  const std::string text = out.str();
  CHECK(text.rfind("t,mass,energy,kinetic,lv4,variance,grad_norm,l3_accum,concentration_mass\n", 0) == 0);
  CHECK(text.find("# {\"message\":\"\",\"steps\":2000,\"t_est\":null,\"t_final\":2.0,\"termination\":\"completed\"}") !=
        std::string::npos);
}

}
