#pragma once

#include <array>
#include <vector>

#include "hartree/ground_state.hpp"
#include "hartree/radial_field.hpp"

namespace hartree {

// Group element (rho, t0, xi, x0): scale, time shift, frequency shift and
// translation. Only rho and t0 act on radial fields; xi and x0 take part in
// parameter arithmetic and the orthogonality test.
struct SymmetryParams {
  double rho = 1.0;
  double t0 = 0.0;
  std::array<double, 4> xi{};
  std::array<double, 4> x0{};

  void validate() const;
};

struct ScalingResult {
  RadialField field;
  // The rescaled field puts more than 1% of its spectral mass in the finest 10%
  // of grid modes.
  bool aliasing_warning = false;
};

// lam^2 u(lam r), resampled by cubic interpolation; zero past r_max.
ScalingResult apply_scaling(const RadialField &u, double lam);

struct PcsResult {
  RadialField field;
  double new_time = 0.0;
  // The mapped field would need data beyond r_max (mass lost above 1e-8 relative).
  bool truncation_warning = false;
};

// Pseudo-conformal map of a snapshot u taken at time t. With s = t - T:
//   out(x) = s^2 conj(u)(|s| x) exp(i s |x|^2 / 4),   new_time = 1 / s.
// If u(t) solves the equation so does out at new_time. Applying the map to
// (out, new_time, 0) returns u. A soliton Q at t = 0 with T = 1 / Tb gives the
// data, at time -Tb, of a solution that blows up at time 0, i.e. Tb later.
PcsResult apply_pcs(const RadialField &u, double t, double T);

struct OrthogonalityOptions {
  // A sequence diverges if it is nondecreasing over its second half and either
  // its last term exceeds threshold x the median of its first half, or its
  // increments over the last quarter are positive and at least
  // min_increment_ratio x those of the quarter before.
  double threshold = 1e3;
  double min_increment_ratio = 0.75;
};

// Finite-sample test of the orthogonality of two sequences of group elements:
// rho_a / rho_b + rho_b / rho_a diverges, or rho_a = rho_b and
// |xi_a - xi_b| / rho + |t_a - t_b| + |(xi_a - xi_b) t_a / rho + x_a - x_b|
// diverges (evaluated in both orders, so the predicate is symmetric).
bool orthogonal(const std::vector<SymmetryParams> &a, const std::vector<SymmetryParams> &b,
                const OrthogonalityOptions &opt = {});

// Exposed for testing the divergence heuristic on plain sequences.
bool sequence_diverges(const std::vector<double> &s, const OrthogonalityOptions &opt = {});

// e^{it} Q.
RadialField stationary_solution(const GroundState &q, double t);

} // namespace hartree
