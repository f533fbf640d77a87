#pragma once

#include <map>
#include <string>

#include "hartree/radial_field.hpp"

namespace hartree {

struct GroundState {
  RadialField q;
  double mass = 0.0; // ||Q||_{L2}
  double kinetic = 0.0;
  double lv4 = 0.0;
  double energy = 0.0;
  double pde_residual = 0.0;
  double pohozaev_grad_defect = 0.0;
  double pohozaev_lv_defect = 0.0;
  double energy_defect = 0.0;
  double sharp_J = 0.0;
  int iterations = 0;

  std::map<std::string, double> report() const;
};

// ||-Delta u + u - Phi[u] u|| / ||u|| with the grid's discrete Laplacian.
double pde_residual(const RadialField &u);

// Evaluates every identity of the ground-state report for a given profile.
GroundState assess_ground_state(RadialField q, int iterations);

// One step of du/dtau = Delta u - u + Phi[u] u: the linear part implicit, the
// reaction explicit. The result is then rescaled onto the Nehari set
// kinetic + mass^2 = lv4, the unique amplitude at which a profile of the
// current shape can solve the unit-coefficient equation.
RadialField gradient_flow_step(const RadialField &u, double dtau);

// Flow from the unit-mass Gaussian with dtau = 2 until pde_residual < tol.
// If the flow stalls above tol, one shooting refinement is attempted.
GroundState solve_ground_state(const GridPtr &grid, double tol, int max_iter);

struct ShootingResult {
  RadialField q;
  bool improved = false;
  double residual_before = 0.0;
  double residual_after = 0.0;
  double center_value = 0.0;     // Q(0)
  double center_potential = 0.0; // Phi(0)
};

// Solves the radial ODE pair
//   Q'' + 3 Q'/r = Q - 4 pi^2 P Q,   P'' + 3 P'/r = -Q^2,   Phi = 4 pi^2 P
// by shooting on (Q(0), P(0)): bisection on Q(0) for the decaying branch, and
// a secant iteration on P(0) so that P matches the exterior monopole. Beyond
// the radius where the shot is trustworthy the tail comes from the linear
// discrete problem (-Delta + 1 - Phi) Q = 0. The refined profile is returned
// only if it lowers pde_residual by at least 10x.
ShootingResult shooting_refine(const RadialField &q0, double tol);

} // namespace hartree
