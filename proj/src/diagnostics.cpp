#include "hartree/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "hartree/errors.hpp"
#include "hartree/functionals.hpp"

namespace hartree {

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

double l3_at(const std::vector<TrajectorySample> &s, double t) {
  if (t <= s.front().t) return s.front().l3_accum;
  if (t >= s.back().t) return s.back().l3_accum;
  const auto it = std::lower_bound(s.begin(), s.end(), t, [](const TrajectorySample &a, double x) { return a.t < x; });
  const auto &b = *it;
  const auto &a = *(it - 1);
  const double f = (t - a.t) / (b.t - a.t);
  return a.l3_accum + f * (b.l3_accum - a.l3_accum);
}

std::size_t final_decade_start(std::size_t count) {
  const std::size_t k = std::max<std::size_t>(1, count / 10);
  return count - k;
}

} // namespace

double window_mass(const RadialField &u, double radius) {
  const auto &g = u.grid();
  if (!(radius >= 0.0)) throw PreconditionError("window_mass: radius must be nonnegative");
  const auto w = g.weights();
  const double h = g.dr();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double a = static_cast<double>(i) * h;
    const double b = a + h;
    if (b <= radius) {
      acc += w[i] * std::norm(u[i]);
    } else {
      if (radius > a) {
        const double frac = (std::pow(radius, 4) - std::pow(a, 4)) / (std::pow(b, 4) - std::pow(a, 4));
        acc += frac * w[i] * std::norm(u[i]);
      }
      break;
    }
  }
  return acc;
}

double mass_radius(const RadialField &u, double fraction) {
  const auto &g = u.grid();
  const auto w = g.weights();
  const double total = integrate(g, u.density());
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double c = w[i] * std::norm(u[i]);
    if (acc + c >= fraction * total) {
      const double a = static_cast<double>(i) * g.dr();
      const double b = a + g.dr();
      const double need = c > 0.0 ? (fraction * total - acc) / c : 0.0;
      return std::pow(std::pow(a, 4) + need * (std::pow(b, 4) - std::pow(a, 4)), 0.25);
    }
    acc += c;
  }
  return g.r_max();
}

nlohmann::json ConcentrationReport::to_json() const {
  return {{"liminf_estimate", liminf_estimate},
          {"reference_mass_sq", reference_mass_sq},
          {"reference_label", reference_label},
          {"liminf_ratio", reference_mass_sq > 0.0 ? liminf_estimate / reference_mass_sq : 0.0},
          {"t_est", t_est},
          {"alpha", alpha},
          {"window_outpaces_sqrt", window_outpaces_sqrt},
          {"window_gradient_diverges", window_gradient_diverges},
          {"checkpoints", times.size()}};
}

ConcentrationReport concentration_scan(const Trajectory &traj, double reference_mass_sq, double alpha) {
  if (traj.termination != Termination::blowup_detected) {
    throw WrongRegimeError("concentration_scan: trajectory did not end in detected blow-up");
  }
  if (!(alpha > 0.0 && alpha < 0.5)) throw PreconditionError("concentration_scan: alpha must lie in (0, 1/2)");
  if (!std::isfinite(traj.t_est)) throw WrongRegimeError("concentration_scan: no finite blow-up time estimate");
  if (traj.checkpoints.empty()) throw InsufficientDataError("concentration_scan: no checkpoints");

  ConcentrationReport rep;
  rep.reference_mass_sq = reference_mass_sq;
  rep.t_est = traj.t_est;
  rep.alpha = alpha;
  for (const auto &[t, u] : traj.checkpoints) {
    const double lam = std::pow(std::max(traj.t_est - t, 0.0), alpha);
    rep.times.push_back(t);
    rep.window_radii.push_back(lam);
    rep.window_mass_sq.push_back(window_mass(u, std::min(lam, u.grid().r_max())));
  }
  const std::size_t from = final_decade_start(rep.times.size());
  rep.liminf_estimate = *std::min_element(rep.window_mass_sq.begin() + static_cast<long>(from), rep.window_mass_sq.end());

  const auto ratio = [&](double t, double lam) { return std::sqrt(std::max(traj.t_est - t, 0.0)) / lam; };
  const std::size_t a = from > 0 ? from - 1 : 0;
  const std::size_t b = rep.times.size() - 1;
  rep.window_outpaces_sqrt = b > a && rep.window_radii[b] > 0.0 &&
                             ratio(rep.times[b], rep.window_radii[b]) < ratio(rep.times[a], rep.window_radii[a]);

  const auto &s = traj.samples;
  const std::size_t sa = final_decade_start(s.size());
  const auto lam_grad = [&](const TrajectorySample &x) {
    return std::pow(std::max(traj.t_est - x.t, 0.0), alpha) * x.grad_norm;
  };
  rep.window_gradient_diverges = s.size() > 1 && lam_grad(s.back()) > lam_grad(s[sa > 0 ? sa - 1 : 0]);
  return rep;
}

void write_concentration_csv(std::ostream &out, const ConcentrationReport &rep) {
  out << "t,lambda,window_mass_sq\n";
  out.precision(17);
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    out << rep.times[i] << ',' << rep.window_radii[i] << ',' << rep.window_mass_sq[i] << '\n';
  }
}

double l3_decade_ratio(const Trajectory &traj) {
  const auto &s = traj.samples;
  if (s.size() < 3) return std::numeric_limits<double>::quiet_NaN();
  const double t0 = s.front().t;
  const double span = s.back().t - t0;
  const double t1 = t0 + 0.8 * span, t2 = t0 + 0.9 * span, t3 = s.back().t;
  const double prev = l3_at(s, t2) - l3_at(s, t1);
  const double last = l3_at(s, t3) - l3_at(s, t2);
  return prev > 0.0 ? last / prev : std::numeric_limits<double>::quiet_NaN();
}

nlohmann::json blowup_report(const Trajectory &traj, double virial_t_max) {
  if (traj.samples.empty()) throw PreconditionError("blowup_report: trajectory has no samples");
  const auto &s = traj.samples;
  nlohmann::json rep;
  rep["blowup"] = traj.termination == Termination::blowup_detected;
  rep["termination"] = to_string(traj.termination);
  rep["message"] = traj.message;
  rep["t_final"] = traj.t_final;
  rep["steps"] = traj.steps;
  rep["t_est"] = finite_or_null(traj.t_est);
  rep["t_est_refit"] = finite_or_null(estimate_blowup_time(s));
  rep["gradient_growth"] = s.back().grad_norm / s.front().grad_norm;

  std::vector<double> ts, gn, inv;
  for (const auto &x : s) {
    ts.push_back(x.t);
    gn.push_back(x.grad_norm);
    inv.push_back(1.0 / x.grad_norm);
  }
  rep["gradient_curve"] = {{"t", ts}, {"grad_norm", gn}, {"inverse_grad_norm", inv}};

  nlohmann::json l3;
  l3["final"] = s.back().l3_accum;
  l3["decade_ratio"] = finite_or_null(l3_decade_ratio(traj));
  bool monotone = true;
  for (std::size_t i = 1; i < s.size(); ++i) monotone = monotone && s[i].l3_accum >= s[i - 1].l3_accum;
  l3["nondecreasing"] = monotone;
  rep["l3_accum"] = l3;

  const double e0 = s.front().energy;
  const double m0_sq = s.front().mass * s.front().mass;
  nlohmann::json vir;
  vir["t_max"] = virial_t_max;
  vir["expected_second_derivative"] = 16.0 * e0;
  try {
    const VirialFit fit = virial_series(traj, virial_t_max);
    const double defect = std::abs(fit.second_derivative - 16.0 * e0);
    vir["second_derivative"] = fit.second_derivative;
    vir["fit_residual"] = fit.residual;
    vir["samples"] = fit.samples;
    vir["abs_defect"] = defect;
    vir["relative_defect"] = defect / std::max(std::abs(16.0 * e0), 0.01 * m0_sq);
  } catch (const InsufficientDataError &e) {
    vir["error"] = e.what();
  }
  rep["virial"] = vir;

  const double m_final = s.back().mass;
  rep["mass_drift"] = std::abs(m_final - s.front().mass) / s.front().mass;
  rep["energy_drift"] = std::abs(s.back().energy - e0) / std::max(std::abs(e0), m0_sq);
  return rep;
}

} // namespace hartree
