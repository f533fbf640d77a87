#include "hartree/evolution.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include <json.hpp>

#include "hartree/banded.hpp"
#include "hartree/diagnostics.hpp"
#include "hartree/errors.hpp"
#include "hartree/functionals.hpp"

namespace hartree {

namespace {

// Crank-Nicolson propagator for a fixed dt: (W + i dt/2 A) u+ = (W - i dt/2 A) u.
class CrankNicolson {
public:
  CrankNicolson(const RadialGrid &g, double dt) : grid_(&g), dt_(dt), lu_(assemble(g, dt)) {}

  double dt() const { return dt_; }

  std::vector<cplx> apply(std::span<const cplx> u) const {
    const auto au = grid_->apply_stiffness(u);
    const auto w = grid_->weights();
    const cplx half(0.0, 0.5 * dt_);
    std::vector<cplx> rhs(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) rhs[i] = w[i] * u[i] - half * au[i];
    return lu_.solve<cplx>(rhs);
  }

private:
  static BandMatrix<cplx> assemble(const RadialGrid &g, double dt) {
    const auto &a = g.stiffness();
    const std::size_t n = g.size();
    const std::size_t b = a.half_band();
    const auto w = g.weights();
    BandMatrix<cplx> m(n, b);
    const cplx half(0.0, 0.5 * dt);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i >= b ? i - b : 0;
      const std::size_t hi = std::min(n - 1, i + b);
      for (std::size_t j = lo; j <= hi; ++j) m.at(i, j) = half * a.at(i, j);
      m.at(i, i) += w[i];
    }
    return m;
  }

  const RadialGrid *grid_;
  double dt_;
  BandLU<cplx> lu_;
};

void apply_phase(RadialField &u, const Potential &phi, double angle_per_unit) {
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= std::polar(1.0, angle_per_unit * phi[i]);
}

RadialField strang_with(const RadialField &u, double dt, double coupling, const CrankNicolson &cn,
                        const Potential *phi_in, Potential *phi_out) {
  RadialField v = u;
  if (coupling != 0.0) apply_phase(v, phi_in ? *phi_in : potential(u), 0.5 * coupling * dt);
  RadialField w(u.grid_ptr(), cn.apply(v.values()));
  if (coupling != 0.0 || phi_out) {
    Potential phi = potential(w);
    if (coupling != 0.0) apply_phase(w, phi, 0.5 * coupling * dt);
    if (phi_out) *phi_out = std::move(phi);
  }
  return w;
}

double l3_cubed(const RadialField &u) {
  std::vector<double> f(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) f[i] = std::pow(std::abs(u[i]), 3);
  return integrate(u.grid(), f);
}

TrajectorySample measure(const RadialField &u, const Potential &phi, double t, double coupling) {
  TrajectorySample s;
  s.t = t;
  const auto dens = u.density();
  s.mass = std::sqrt(integrate(u.grid(), dens));
  s.kinetic = kinetic(u);
  std::vector<double> f(dens.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = phi[i] * dens[i];
  s.lv4 = integrate(u.grid(), f);
  s.energy = 0.5 * s.kinetic - 0.25 * coupling * s.lv4;
  s.variance = variance(u).value;
  s.grad_norm = std::sqrt(s.kinetic);
  return s;
}

} // namespace

void EvolutionConfig::validate() const {
  if (!(dt0 > 0.0)) throw ConfigError("evolution: dt0 must be positive");
  if (!(t_end > 0.0)) throw ConfigError("evolution: t_end must be positive");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw ConfigError("evolution: cfl_safety must lie in (0, 1]");
  if (monitor_stride < 1 || checkpoint_stride < 1) throw ConfigError("evolution: strides must be at least 1");
  if (!(blowup_gradient_factor > 1.0)) throw ConfigError("evolution: blowup_gradient_factor must exceed 1");
  if (!(spectral_tail_threshold > 0.0 && spectral_tail_threshold < 1.0)) {
    throw ConfigError("evolution: spectral_tail_threshold must lie in (0, 1)");
  }
  if (!(dt_floor > 0.0)) throw ConfigError("evolution: dt_floor must be positive");
  if (!(mass_drift_limit > 0.0)) throw ConfigError("evolution: mass_drift_limit must be positive");
  if (!std::isfinite(coupling)) throw ConfigError("evolution: coupling must be finite");
  if (!(window_radius0 > 0.0)) throw ConfigError("evolution: window_radius0 must be positive");
  if (!(window_alpha > 0.0 && window_alpha < 0.5)) throw ConfigError("evolution: window_alpha must lie in (0, 1/2)");
}

std::string to_string(Termination t) {
  switch (t) {
  case Termination::completed: return "completed";
  case Termination::blowup_detected: return "blowup_detected";
  case Termination::resolution_failure: return "resolution_failure";
  case Termination::error: return "error";
  }
  return "error";
}

double spectral_tail(const RadialField &u) {
  const double m2 = integrate(u.grid(), u.density());
  if (!(m2 > 0.0)) return 0.0;
  // Symbol of the staggered fourth-order difference at 90% of the Nyquist
  // wavenumber. Modes at or above it carry at least lambda_c of kinetic energy
  // per unit mass, so kinetic / (mass^2 lambda_c) bounds their mass fraction.
  const double theta = 0.9 * std::numbers::pi;
  const double symbol = (54.0 * std::sin(0.5 * theta) - 2.0 * std::sin(1.5 * theta)) / (24.0 * u.grid().dr());
  return std::min(1.0, kinetic(u) / (m2 * symbol * symbol));
}

RadialField step_strang(const RadialField &u, double dt, double coupling, const Potential *phi_in,
                        Potential *phi_out) {
  if (!(dt > 0.0)) throw PreconditionError("step_strang: dt must be positive");
  const CrankNicolson cn(u.grid(), dt);
  return strang_with(u, dt, coupling, cn, phi_in, phi_out);
}

RadialField free_reference(const GridPtr &grid, const GaussianParams &p, double t) {
  if (!(p.sigma > 0.0)) throw PreconditionError("free_reference: sigma must be positive");
  const double s2 = p.sigma * p.sigma;
  const cplx z(1.0, 2.0 * t / s2);
  const cplx pref = p.amplitude / (z * z);
  RadialField out(grid);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double r = grid->node(i);
    out[i] = pref * std::exp(-r * r / (2.0 * s2 * z));
  }
  return out;
}

double estimate_blowup_time(const std::vector<TrajectorySample> &samples, std::size_t window) {
  if (samples.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t k = std::min(window, samples.size());
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t i = samples.size() - k; i < samples.size(); ++i) {
    const double t = samples[i].t;
    const double y = 1.0 / samples[i].grad_norm;
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  const double kk = static_cast<double>(k);
  const double det = kk * stt - st * st;
  if (!(det > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double slope = (kk * sty - st * sy) / det;
  const double intercept = (sy - slope * st) / kk;
  if (!(slope < 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return -intercept / slope;
}

Trajectory evolve(const RadialField &u0, const EvolutionConfig &cfg, const SampleCallback &on_sample) {
  cfg.validate();
  if (!u0.is_finite()) throw PreconditionError("evolve: initial data is not finite");
  if (u0.is_zero()) throw PreconditionError("evolve: initial data is zero");

  Trajectory traj;
  traj.coupling = cfg.coupling;
  const auto &g = u0.grid();
  RadialField u = u0;
  Potential phi = potential(u);
  double t = 0.0;
  double l3 = 0.0;
  double l3_rate = l3_cubed(u);

  auto record = [&](const RadialField &field, double dt) {
    TrajectorySample s = measure(field, phi, t, cfg.coupling);
    s.l3_accum = l3;
    s.dt = dt;
    const double g0 = traj.samples.empty() ? s.grad_norm : traj.samples.front().grad_norm;
    const double radius =
        std::min(g.r_max(), cfg.window_radius0 * std::pow(g0 / s.grad_norm, 2.0 * cfg.window_alpha));
    s.concentration_mass = window_mass(field, radius);
    traj.samples.push_back(s);
    if (on_sample) on_sample(traj.samples.back());
    return s;
  };

  const TrajectorySample first = record(u, 0.0);
  traj.checkpoints.emplace_back(0.0, u);
  const double m0 = first.mass;
  const double m0_sq = m0 * m0;
  const double g0 = first.grad_norm;

  std::optional<CrankNicolson> cn;
  long step = 0;
  double dt = cfg.dt0;
  double last_dt = 0.0;
  while (t < cfg.t_end) {
    const double k = kinetic(u);
    dt = std::min(cfg.dt0, k > 0.0 ? cfg.cfl_safety * m0_sq / k : cfg.dt0);
    if (dt < cfg.dt_floor) {
      traj.termination = Termination::resolution_failure;
      traj.message = "time step fell below the floor";
      break;
    }
    bool final_step = false;
    if (t + dt >= cfg.t_end * (1.0 - 1e-12)) {
      dt = cfg.t_end - t;
      final_step = true;
    }
    if (!cn || cn->dt() != dt) cn.emplace(g, dt);
    Potential next_phi;
    RadialField next = strang_with(u, dt, cfg.coupling, *cn, &phi, &next_phi);
    if (!next.is_finite()) {
      traj.termination = Termination::error;
      traj.message = "non-finite field encountered at t = " + std::to_string(t + dt);
      traj.checkpoints.emplace_back(t, u);
      break;
    }
    const double next_rate = l3_cubed(next);
    l3 += 0.5 * dt * (l3_rate + next_rate);
    l3_rate = next_rate;
    u = std::move(next);
    phi = std::move(next_phi);
    t = final_step ? cfg.t_end : t + dt;
    last_dt = dt;
    ++step;

    const bool sample_now = step % cfg.monitor_stride == 0 || final_step;
    if (step % cfg.checkpoint_stride == 0 || final_step) traj.checkpoints.emplace_back(t, u);
    if (!sample_now) continue;
    TrajectorySample s = record(u, dt);
    if (std::abs(s.mass - m0) > cfg.mass_drift_limit * m0) {
      traj.termination = Termination::resolution_failure;
      traj.message = "mass drift exceeded the limit";
      break;
    }
    if (s.grad_norm > cfg.blowup_gradient_factor * g0) {
      s.spectral_tail = spectral_tail(u);
      traj.samples.back().spectral_tail = s.spectral_tail;
      if (s.spectral_tail > cfg.spectral_tail_threshold) {
        traj.termination = Termination::blowup_detected;
        traj.t_est = estimate_blowup_time(traj.samples);
        if (traj.checkpoints.back().first != t) traj.checkpoints.emplace_back(t, u);
        break;
      }
    }
  }
  if (traj.samples.back().t != t && traj.termination != Termination::error) record(u, last_dt);
  traj.t_final = t;
  traj.steps = step;
  return traj;
}

VirialFit virial_series(const Trajectory &traj, double t_max) {
  // Normal equations for the quadratic fit in a shifted and scaled time
  // variable to keep them well conditioned.
  std::vector<std::pair<double, double>> pts;
  for (const auto &s : traj.samples) {
    if (s.t <= t_max) pts.emplace_back(s.t, s.variance);
  }
  if (pts.size() < 10) throw InsufficientDataError("virial_series: need at least 10 samples");
  const double ta = pts.front().first;
  const double tb = pts.back().first;
  const double mid = 0.5 * (ta + tb);
  const double half = 0.5 * (tb - ta);
  if (!(half > 0.0)) throw InsufficientDataError("virial_series: samples span no time");
  double m[3][4] = {};
  for (const auto &[t, v] : pts) {
    const double x = (t - mid) / half;
    const double basis[3] = {1.0, x, x * x};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m[i][j] += basis[i] * basis[j];
      m[i][3] += basis[i] * v;
    }
  }
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    }
    std::swap(m[c], m[piv]);
    for (int r = 0; r < 3; ++r) {
      if (r == c) continue;
      const double f = m[r][c] / m[c][c];
      for (int k = c; k < 4; ++k) m[r][k] -= f * m[c][k];
    }
  }
  const double a0 = m[0][3] / m[0][0];
  const double a1 = m[1][3] / m[1][1];
  const double a2 = m[2][3] / m[2][2];
  VirialFit fit;
  // V = a0 + a1 x + a2 x^2 with x = (t - mid) / half.
  fit.c2 = a2 / (half * half);
  fit.c1 = a1 / half - 2.0 * a2 * mid / (half * half);
  fit.c0 = a0 - a1 * mid / half + a2 * mid * mid / (half * half);
  fit.second_derivative = 2.0 * fit.c2;
  double ss = 0.0;
  for (const auto &[t, v] : pts) {
    const double x = (t - mid) / half;
    const double e = a0 + a1 * x + a2 * x * x - v;
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / static_cast<double>(pts.size()));
  fit.samples = pts.size();
  return fit;
}

void write_trajectory_csv(std::ostream &out, const Trajectory &traj) {
  out << "t,mass,energy,kinetic,lv4,variance,grad_norm,l3_accum,concentration_mass\n";
  out.precision(17);
  for (const auto &s : traj.samples) {
    out << s.t << ',' << s.mass << ',' << s.energy << ',' << s.kinetic << ',' << s.lv4 << ',' << s.variance << ','
        << s.grad_norm << ',' << s.l3_accum << ',' << s.concentration_mass << '\n';
  }
  nlohmann::json footer = {{"termination", to_string(traj.termination)},
                           {"t_final", traj.t_final},
                           {"steps", traj.steps},
                           {"message", traj.message}};
  footer["t_est"] = std::isfinite(traj.t_est) ? nlohmann::json(traj.t_est) : nlohmann::json(nullptr);
  out << "# " << footer.dump() << '\n';
}

} // namespace hartree
