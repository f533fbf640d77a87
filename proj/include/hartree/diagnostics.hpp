#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "hartree/evolution.hpp"
#include "hartree/radial_field.hpp"

namespace hartree {

// Integral of |u|^2 over |x| <= radius. The cell containing the radius
// contributes the fraction of its 4D volume that lies inside.
double window_mass(const RadialField &u, double radius);

// Smallest radius whose window holds `fraction` of the total mass^2.
double mass_radius(const RadialField &u, double fraction);

struct ConcentrationReport {
  std::vector<double> times;
  std::vector<double> window_radii;
  std::vector<double> window_mass_sq;
  double liminf_estimate = 0.0;
  double reference_mass_sq = 0.0;
  std::string reference_label = "conjectured delta0^2 = ||Q||^2";
  double t_est = 0.0;
  double alpha = 0.0;
  // sqrt(T - t) / lambda(t) decreasing over the final 10% of checkpoints.
  bool window_outpaces_sqrt = false;
  // lambda(t) * grad_norm(t) increasing over the final 10% of samples.
  bool window_gradient_diverges = false;

  nlohmann::json to_json() const;
};

// Window masses at every checkpoint with lambda(t) = (t_est - t)^alpha. The
// liminf is the minimum over the final 10% of checkpoints (at least one).
ConcentrationReport concentration_scan(const Trajectory &traj, double reference_mass_sq, double alpha);

void write_concentration_csv(std::ostream &out, const ConcentrationReport &rep);

// Ratio of l3_accum growth over the last 10% of the elapsed time to the growth
// over the 10% before it. NaN when the earlier growth vanishes.
double l3_decade_ratio(const Trajectory &traj);

// Summary of a run: termination, t_est, gradient history, 1/grad_norm fit,
// l3 growth and the virial consistency |2 c2 - 16 E(u0)| over t <= virial_t_max.
nlohmann::json blowup_report(const Trajectory &traj, double virial_t_max = 0.5);

} // namespace hartree
