#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hartree/potential.hpp"
#include "hartree/radial_field.hpp"

namespace hartree {

struct EvolutionConfig {
  double dt0 = 1e-3;
  double t_end = 1.0;
  // dt = min(dt0, cfl_safety * mass^2 / kinetic): the step shrinks like the
  // square of the current length scale.
  double cfl_safety = 0.01;
  int monitor_stride = 10;    // steps between samples
  int checkpoint_stride = 50; // steps between stored fields
  double blowup_gradient_factor = 10.0;
  double spectral_tail_threshold = 0.01;
  double dt_floor = 1e-8;
  double mass_drift_limit = 1e-4;
  // Strength of the Hartree term; 0 gives the free equation.
  double coupling = 1.0;
  // In-flight concentration window: radius window_radius0 at t = 0, shrinking
  // like (grad_norm(0) / grad_norm(t))^(2 alpha).
  double window_radius0 = 1.0;
  double window_alpha = 0.3;

  void validate() const;
};

struct TrajectorySample {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double kinetic = 0.0;
  double lv4 = 0.0;
  double variance = 0.0;
  double grad_norm = 0.0;
  double l3_accum = 0.0;
  double concentration_mass = 0.0;
  double spectral_tail = 0.0;
  double dt = 0.0;
};

enum class Termination { completed, blowup_detected, resolution_failure, error };

std::string to_string(Termination t);

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<std::pair<double, RadialField>> checkpoints;
  Termination termination = Termination::completed;
  double t_final = 0.0;
  double t_est = std::numeric_limits<double>::quiet_NaN(); // blow-up time estimate
  std::string message;
  double coupling = 1.0;
  long steps = 0;
};

// Estimated fraction of |u|^2 in the top 10% of grid wavenumbers, from the
// discrete second-difference energy (a Chebyshev bound, so it errs high).
double spectral_tail(const RadialField &u);

// exp(i coupling Phi dt / 2), Crank-Nicolson for i u_t = -Delta u, exp(i coupling Phi dt / 2).
// Phi is frozen within each phase substep because |u| is. Passing the potential
// of the input (phi_in) saves one evaluation; the potential of the output is
// written to phi_out when requested.
RadialField step_strang(const RadialField &u, double dt, double coupling = 1.0,
                        const Potential *phi_in = nullptr, Potential *phi_out = nullptr);

struct GaussianParams {
  double amplitude = 1.0;
  double sigma = 1.0;
};

// Free Schroedinger evolution of A exp(-r^2 / (2 sigma^2)) in four dimensions:
// A (1 + 2 i t / sigma^2)^{-2} exp(-r^2 / (2 sigma^2 (1 + 2 i t / sigma^2))).
RadialField free_reference(const GridPtr &grid, const GaussianParams &p, double t);

using SampleCallback = std::function<void(const TrajectorySample &)>;

Trajectory evolve(const RadialField &u0, const EvolutionConfig &cfg, const SampleCallback &on_sample = {});

struct VirialFit {
  double second_derivative = 0.0; // 2 c2
  double residual = 0.0;          // rms of the fit
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
  std::size_t samples = 0;
};

// Least-squares V(t) ~ c0 + c1 t + c2 t^2 over the samples with t <= t_max.
VirialFit virial_series(const Trajectory &traj, double t_max = std::numeric_limits<double>::infinity());

// Extrapolates 1/grad_norm linearly to zero over the last `window` samples.
// NaN when the fit does not point to a finite future time.
double estimate_blowup_time(const std::vector<TrajectorySample> &samples, std::size_t window = 20);

void write_trajectory_csv(std::ostream &out, const Trajectory &traj);

} // namespace hartree
