#pragma once

#include <cmath>
#include <numbers>

#include "hartree/evolution.hpp"
#include "hartree/functionals.hpp"
#include "hartree/ground_state.hpp"
#include "hartree/radial_field.hpp"

namespace test {

inline constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

inline const hartree::GridPtr &default_grid() {
  static const hartree::GridPtr g = hartree::make_grid(4096, 32.0);
  return g;
}

// Solved once per test binary; several suites compare against it.
inline const hartree::GroundState &ground_state() {
  static const hartree::GroundState gs = hartree::solve_ground_state(default_grid(), 1e-10, 2000);
  return gs;
}

inline hartree::EvolutionConfig until(double t_end) {
  hartree::EvolutionConfig cfg;
  cfg.t_end = t_end;
  return cfg;
}

inline const hartree::Trajectory &supercritical_run() {
  static const hartree::Trajectory tr = hartree::evolve(1.2 * ground_state().q, until(3.0));
  return tr;
}

inline const hartree::Trajectory &subcritical_run() {
  static const hartree::Trajectory tr = hartree::evolve(0.5 * ground_state().q, until(2.0));
  return tr;
}

inline double rel_l2(const hartree::RadialField &a, const hartree::RadialField &b) {
  return hartree::mass(a - b) / hartree::mass(b);
}

} // namespace test
