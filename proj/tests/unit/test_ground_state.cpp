#include <doctest.h>

#include <cmath>
#include <random>

#include "hartree/errors.hpp"
#include "hartree/experiments.hpp"
#include "hartree/functionals.hpp"
#include "hartree/ground_state.hpp"
#include "hartree/potential.hpp"
#include "support.hpp"

using namespace hartree;

TEST_SUITE("ground_state") {

TEST_CASE("default run at tol 1e-6 satisfies the identities") {
  const GroundState gs = solve_ground_state(test::default_grid(), 1e-6, 2000);
  CHECK(gs.pde_residual < 1e-6);
  CHECK(gs.pohozaev_grad_defect < 1e-3);
  CHECK(gs.pohozaev_lv_defect < 1e-3);
  CHECK(gs.energy_defect < 1e-3);
  CHECK(std::abs(gs.sharp_J / (0.5 * gs.mass * gs.mass) - 1.0) < 1e-3);
  CHECK(gs.iterations > 0);
}

TEST_CASE("Q is real, positive and strictly decreasing") {
  const auto &q = test::ground_state().q;
  for (std::size_t i = 0; i < q.size(); ++i) {
    CHECK(q[i].imag() == 0.0);
    CHECK(q[i].real() > 0.0);
    if (i > 0) CHECK(q[i].real() < q[i - 1].real());
  }
}

TEST_CASE("report carries every defect") {
  const auto rep = test::ground_state().report();
  for (const char *key : {"mass", "kinetic", "lv4", "energy", "sharp_J", "pde_residual", "pohozaev_grad_defect",
                          "pohozaev_lv_defect", "energy_defect", "iterations"}) {
    CHECK(rep.count(key) == 1);
  }
}

TEST_CASE("unreachable tolerance raises an iteration-limit error with the last report") {
  try {
    solve_ground_state(test::default_grid(), 1e-15, 2000);
    FAIL("expected IterationLimitError");
  } catch (const IterationLimitError &e) {
    CHECK(e.report().at("pde_residual") > 1e-15);
    CHECK(e.report().at("pde_residual") < 1e-9);
  }
  CHECK_THROWS_AS(solve_ground_state(test::default_grid(), 0.0, 10), PreconditionError);
  CHECK_THROWS_AS(solve_ground_state(test::default_grid(), 1e-6, 0), PreconditionError);
}

TEST_CASE("Q is a local minimiser of J") {
  const auto &gs = test::ground_state();
  std::mt19937_64 rng(17);
  const double qmax = gs.q[0].real();
  for (int k = 0; k < 100; ++k) {
    RadialField eta = random_gn_field(test::default_grid(), rng);
    double m = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) m = std::max(m, std::abs(eta[i]));
    eta *= cplx(0.1 * qmax / m);
    CHECK(gn_functional(gs.q + eta) >= gs.sharp_J * (1.0 - 1e-6));
  }
}

TEST_CASE("gradient_flow_step: fixed point, positivity and preconditions") {
  const auto &gs = test::ground_state();
  const RadialField next = gradient_flow_step(gs.q, 2.0);
  CHECK(test::rel_l2(next, gs.q) < 1e-8);

  const RadialField seed = RadialField::from_function(test::default_grid(), [](double r) { return cplx(std::exp(-0.5 * r * r)); });
  const RadialField step = gradient_flow_step(seed, 1e-3);
  for (std::size_t i = 0; i < step.size(); ++i) CHECK(step[i].real() > 0.0);

  CHECK_THROWS_AS(gradient_flow_step(RadialField(test::default_grid()), 1e-3), PreconditionError);
  CHECK_THROWS_AS(gradient_flow_step(seed, 0.0), PreconditionError);
}

TEST_CASE("shooting_refine: converged input is returned unchanged") {
  const auto &gs = test::ground_state();
  const ShootingResult r = shooting_refine(gs.q, 1e-6);
  CHECK_FALSE(r.improved);
  CHECK(r.residual_after == r.residual_before);
  for (std::size_t i = 0; i < gs.q.size(); ++i) CHECK(r.q[i] == gs.q[i]);
}

TEST_CASE("shooting_refine: flow output at 1e-4 is refined below 1e-5") {
  const GroundState rough = solve_ground_state(test::default_grid(), 1e-4, 2000);
  const ShootingResult r = shooting_refine(rough.q, 1e-10);
  CHECK(r.improved);
  CHECK(r.residual_before < 1e-4);
  CHECK(r.residual_after < 1e-5);
  CHECK(r.residual_after * 10.0 <= r.residual_before);
  for (std::size_t i = 0; i < r.q.size(); ++i) {
    CHECK(r.q[i].real() > 0.0);
    if (i > 0) CHECK(r.q[i].real() < r.q[i - 1].real());
  }
}

TEST_CASE("shooting_refine rejects sign-changing, complex and far-off input") {
  const auto &gs = test::ground_state();
  RadialField flipped = gs.q;
  flipped[100] = -flipped[100];
  CHECK_THROWS_AS(shooting_refine(flipped, 1e-10), PreconditionError);
  CHECK_THROWS_AS(shooting_refine(std::polar(1.0, 0.3) * gs.q, 1e-10), PreconditionError);
  CHECK_THROWS_AS(shooting_refine(cplx(1.5) * gs.q, 1e-10), PreconditionError);
}

TEST_CASE("||Q|| agrees between n = 4096 and n = 8192") {
  const GroundState fine = solve_ground_state(make_grid(8192, 32.0), 1e-10, 2000);
  CHECK(std::abs(fine.mass / test::ground_state().mass - 1.0) < 1e-4);
}

}
