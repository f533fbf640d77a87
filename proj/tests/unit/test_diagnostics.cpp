#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hartree/diagnostics.hpp"
#include "hartree/errors.hpp"
#include "hartree/experiments.hpp"
#include "hartree/functionals.hpp"
#include "support.hpp"

using namespace hartree;

TEST_SUITE("diagnostics") {

TEST_CASE("window_mass: full window, monotonicity and continuity") {
  const auto &gs = test::ground_state();
  const auto &g = test::default_grid();
  const double total = gs.mass * gs.mass;
  CHECK(std::abs(window_mass(gs.q, g->r_max()) - total) < 1e-10 * total);
  double max_cell = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) max_cell = std::max(max_cell, g->weights()[i] * std::norm(gs.q[i]));
  double prev = 0.0;
  for (double r = 0.0; r <= 12.0; r += 0.37 * g->dr()) {
    const double w = window_mass(gs.q, r);
    CHECK(w >= prev);
    CHECK(w - prev <= max_cell);
    prev = w;
  }
  CHECK_THROWS_AS(window_mass(gs.q, -1.0), PreconditionError);
}

TEST_CASE("window_mass of Q reaches 99% at a finite radius") {
  const auto &gs = test::ground_state();
  const double r99 = mass_radius(gs.q, 0.99);
  MESSAGE("R99 of Q = " << r99);
  CHECK(r99 > 0.5);
  CHECK(r99 < 10.0);
  CHECK(window_mass(gs.q, r99) == doctest::Approx(0.99 * gs.mass * gs.mass).epsilon(1e-9));
}

TEST_CASE("window_mass respects the support of the field") {
  const auto &g = test::default_grid();
  const RadialField u = RadialField::from_function(g, [](double r) { return cplx(r < 1.0 ? 1.0 - r * r : 0.0); });
  const double total = integrate(*g, u.density());
  CHECK(window_mass(u, 0.5) < total);
  CHECK(std::abs(window_mass(u, 2.0) - total) < 1e-10 * total);
}

TEST_CASE("concentration_scan on the supercritical run") {
  const auto &gs = test::ground_state();
  const auto &tr = test::supercritical_run();
  const double ref = gs.mass * gs.mass;
  const ConcentrationReport rep = concentration_scan(tr, ref, 0.3);
  CHECK(rep.liminf_estimate >= 0.95 * ref);
  CHECK(rep.window_outpaces_sqrt);
  CHECK(rep.window_gradient_diverges);
  CHECK(rep.times.size() == tr.checkpoints.size());
  const double total = tr.samples.front().mass * tr.samples.front().mass;
  for (double w : rep.window_mass_sq) {
    CHECK(w >= 0.0);
    CHECK(w <= total * (1.0 + 1e-12));
  }
  std::ostringstream csv;
  write_concentration_csv(csv, rep);
  CHECK(csv.str().rfind("t,lambda,window_mass_sq\n", 0) == 0);
  CHECK(rep.to_json().at("reference_label") == "conjectured delta0^2 = ||Q||^2");
}

TEST_CASE("concentration_scan rejects runs without detected blow-up and bad exponents") {
  const auto &gs = test::ground_state();
  CHECK_THROWS_AS(concentration_scan(test::subcritical_run(), gs.mass * gs.mass, 0.3), WrongRegimeError);
  CHECK_THROWS_AS(concentration_scan(test::supercritical_run(), gs.mass * gs.mass, 0.5), PreconditionError);
  CHECK_THROWS_AS(concentration_scan(test::supercritical_run(), gs.mass * gs.mass, 0.0), PreconditionError);
}

TEST_CASE("window mass on the explicit pcs solution grows as the blow-up nears") {
  const auto &gs = test::ground_state();
  double prev = 0.0;
  for (double tau = 1.0; tau < 1.95; tau += 0.05) {
    const double lam = std::pow(2.0 - tau, 0.3);
    const double w = window_mass(pcs_blowup_exact(gs, 2.0, tau), lam);
    CHECK(w >= prev);
    prev = w;
  }
  CHECK(prev > 0.95 * gs.mass * gs.mass);
}

TEST_CASE("l3 accumulation grows superlinearly before detection") {
  CHECK(l3_decade_ratio(test::supercritical_run()) >= 2.0);
}

TEST_CASE("blowup_report: sub-threshold and supercritical runs") {
  const auto sub = blowup_report(test::subcritical_run());
  CHECK_FALSE(sub.at("blowup").get<bool>());
  CHECK(sub.at("termination") == "completed");
  CHECK(sub.at("t_est").is_null());
  CHECK(sub.at("virial").at("relative_defect").get<double>() < 0.02);
  CHECK(sub.at("l3_accum").at("nondecreasing").get<bool>());

  const auto sup = blowup_report(test::supercritical_run());
  CHECK(sup.at("blowup").get<bool>());
  CHECK(sup.at("termination") == "blowup_detected");
  CHECK(sup.at("t_est").is_number());
  CHECK(sup.at("gradient_growth").get<double>() > 10.0);
  CHECK(sup.at("virial").at("relative_defect").get<double>() < 0.02);

  CHECK(blowup_report(test::supercritical_run()).dump() == sup.dump());
}

TEST_CASE("blowup_report needs samples") {
  Trajectory empty;
  CHECK_THROWS_AS(blowup_report(empty), PreconditionError);
}

}
