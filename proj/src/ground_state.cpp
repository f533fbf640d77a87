#include "hartree/ground_state.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>

#include "hartree/banded.hpp"
#include "hartree/errors.hpp"
#include "hartree/functionals.hpp"
#include "hartree/potential.hpp"

namespace hartree {

namespace {

constexpr double kFourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;
constexpr std::size_t kHeadNodes = 32;

BandMatrix<double> shifted_stiffness(const RadialGrid &g, double mass_coeff, double stiff_coeff) {
  BandMatrix<double> m = g.stiffness();
  const std::size_t n = g.size();
  const std::size_t b = m.half_band();
  const auto w = g.weights();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= b ? i - b : 0;
    const std::size_t hi = std::min(n - 1, i + b);
    for (std::size_t j = lo; j <= hi; ++j) m.at(i, j) *= stiff_coeff;
    m.at(i, i) += mass_coeff * w[i];
  }
  return m;
}

// Implicit solve of (W (1 + dtau) + dtau A) v = W (u + dtau Phi u), then the
// Nehari rescale.
RadialField flow_step(const RadialField &u, double dtau, const BandLU<double> &lu) {
  const auto &g = u.grid();
  const auto phi = potential(u);
  const auto w = g.weights();
  std::vector<cplx> rhs(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) rhs[i] = w[i] * (u[i] + dtau * phi[i] * u[i]);
  RadialField v(u.grid_ptr(), lu.solve<cplx>(rhs));
  const double m_in = mass(u);
  const double m_out = mass(v);
  if (!v.is_finite() || m_out > 10.0 * m_in) throw StepSizeError("gradient flow step diverged");
  const double l = lv4(v);
  if (!(l > 0.0) || m_out < 1e-300) throw TrivialLimitError("gradient flow collapsed to the zero field");
  const double c = std::sqrt((kinetic(v) + m_out * m_out) / l);
  v *= c;
  return v;
}

} // namespace

std::map<std::string, double> GroundState::report() const {
  return {{"mass", mass},
          {"kinetic", kinetic},
          {"lv4", lv4},
          {"energy", energy},
          {"sharp_J", sharp_J},
          {"pde_residual", pde_residual},
          {"pohozaev_grad_defect", pohozaev_grad_defect},
          {"pohozaev_lv_defect", pohozaev_lv_defect},
          {"energy_defect", energy_defect},
          {"iterations", static_cast<double>(iterations)}};
}

double pde_residual(const RadialField &u) {
  const auto &g = u.grid();
  const auto au = g.apply_stiffness(u.values());
  const auto phi = potential(u);
  const auto w = g.weights();
  std::vector<double> r2(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) r2[i] = std::norm(au[i] / w[i] + u[i] - phi[i] * u[i]);
  const double m = mass(u);
  if (!(m > 0.0)) throw UndefinedFunctionalError("pde_residual: zero field");
  return std::sqrt(integrate(g, r2)) / m;
}

GroundState assess_ground_state(RadialField q, int iterations) {
  GroundState gs{std::move(q)};
  const double m2 = integrate(gs.q.grid(), gs.q.density());
  gs.mass = std::sqrt(m2);
  gs.kinetic = hartree::kinetic(gs.q);
  gs.lv4 = hartree::lv4(gs.q);
  gs.energy = 0.5 * gs.kinetic - 0.25 * gs.lv4;
  gs.pde_residual = hartree::pde_residual(gs.q);
  gs.pohozaev_grad_defect = std::abs(gs.kinetic - m2) / m2;
  gs.pohozaev_lv_defect = std::abs(gs.lv4 - 2.0 * m2) / (2.0 * m2);
  gs.energy_defect = std::abs(gs.energy) / m2;
  gs.sharp_J = m2 * gs.kinetic / gs.lv4;
  gs.iterations = iterations;
  return gs;
}

RadialField gradient_flow_step(const RadialField &u, double dtau) {
  if (!(dtau > 0.0)) throw PreconditionError("gradient_flow_step: dtau must be positive");
  if (u.is_zero()) throw PreconditionError("gradient_flow_step: zero field");
  if (!u.is_finite()) throw PreconditionError("gradient_flow_step: non-finite field");
  const BandLU<double> lu(shifted_stiffness(u.grid(), 1.0 + dtau, dtau));
  return flow_step(u, dtau, lu);
}

GroundState solve_ground_state(const GridPtr &grid, double tol, int max_iter) {
  if (!(tol > 0.0)) throw PreconditionError("solve_ground_state: tol must be positive");
  if (max_iter < 1) throw PreconditionError("solve_ground_state: max_iter must be at least 1");
  constexpr double kDtau = 2.0;
  constexpr int kStallWindow = 20;

  RadialField u = RadialField::from_function(grid, [](double r) { return std::exp(-0.5 * r * r); });
  u *= 1.0 / mass(u);
  const BandLU<double> lu(shifted_stiffness(*grid, 1.0 + kDtau, kDtau));

  double res = std::numeric_limits<double>::infinity();
  double best = res;
  int best_at = 0;
  int it = 0;
  while (it < max_iter) {
    u = flow_step(u, kDtau, lu);
    ++it;
    res = pde_residual(u);
    if (res < tol) return assess_ground_state(std::move(u), it);
    if (res < 0.999 * best) {
      best = res;
      best_at = it;
    } else if (it - best_at >= kStallWindow) {
      break;
    }
  }

  if (res < 1e-2) {
    auto refined = shooting_refine(u, tol);
    if (refined.improved) {
      if (refined.residual_after < tol) return assess_ground_state(std::move(refined.q), it);
      u = std::move(refined.q);
      res = refined.residual_after;
    }
  }
  char msg[128];
  std::snprintf(msg, sizeof msg, "solve_ground_state: residual %.3e above tol %.3e after %d iterations", res, tol, it);
  throw IterationLimitError(msg, assess_ground_state(std::move(u), it).report());
}

namespace {

// State (Q, Q', P, P') of the radial ODE pair.
using OdeState = std::array<double, 4>;

OdeState ode_rhs(double r, const OdeState &y) {
  const double q = y[0], dq = y[1], p = y[2], dp = y[3];
  const double src_q = q - kFourPiSq * p * q;
  const double src_p = -q * q;
  // At r = 0 regularity gives Q'' + 3 Q'/r -> 4 Q''.
  if (r == 0.0) return {dq, 0.25 * src_q, dp, 0.25 * src_p};
  return {dq, src_q - 3.0 * dq / r, dp, src_p - 3.0 * dp / r};
}

// Solves rows [first, last) of (A + W (1 - Phi)) Q = 0 for the same unknowns,
// holding every other entry of values fixed.
void solve_linear_block(const RadialGrid &g, std::vector<cplx> &values, const std::vector<double> &phi,
                        std::size_t first, std::size_t last) {
  const auto &a = g.stiffness();
  const auto w = g.weights();
  const std::size_t n = g.size();
  const std::size_t bw = a.half_band();
  BandMatrix<double> t(last - first, bw);
  std::vector<double> rhs(last - first, 0.0);
  for (std::size_t j = first; j < last; ++j) {
    const std::size_t lo = j >= bw ? j - bw : 0;
    const std::size_t hi = std::min(n - 1, j + bw);
    for (std::size_t k = lo; k <= hi; ++k) {
      if (k < first || k >= last) {
        rhs[j - first] -= a.at(j, k) * values[k].real();
      } else {
        t.at(j - first, k - first) = a.at(j, k);
      }
    }
    t.at(j - first, j - first) += w[j] * (1.0 - phi[j]);
  }
  const auto x = BandLU<double>(std::move(t)).solve<double>(rhs);
  for (std::size_t j = first; j < last; ++j) values[j] = x[j - first];
}

struct Shot {
  std::vector<OdeState> states; // states[k] at r = k h
  int fate = 0;                 // +1 crossed zero, -1 turned upward, 0 reached the end
};

// Taylor series in r^2 about the origin, Q = sum q_k r^2k and P = sum p_k r^2k,
// from 2k (2k + 2) q_k = q_{k-1} - 4 pi^2 (p q)_{k-1} and 2k (2k + 2) p_k = -(q q)_{k-1}.
// Returns the states at r = k h for k = 0..count-1, or nothing if the series
// has not converged to roundoff by the last of them.
std::optional<std::vector<OdeState>> series_start(double a, double b, double h, std::size_t count) {
  constexpr std::size_t kTerms = 40;
  std::array<double, kTerms> q{}, p{};
  q[0] = a;
  p[0] = b;
  for (std::size_t k = 1; k < kTerms; ++k) {
    double pq = 0.0, qq = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      pq += p[j] * q[k - 1 - j];
      qq += q[j] * q[k - 1 - j];
    }
    const double d = 2.0 * static_cast<double>(k) * (2.0 * static_cast<double>(k) + 2.0);
    q[k] = (q[k - 1] - kFourPiSq * pq) / d;
    p[k] = -qq / d;
  }
  std::vector<OdeState> out(count);
  for (std::size_t s = 0; s < count; ++s) {
    const double r = static_cast<double>(s) * h;
    const double r2 = r * r;
    OdeState y{};
    double pw = 1.0; // r^{2k}
    double last = 0.0;
    for (std::size_t k = 0; k < kTerms; ++k) {
      y[0] += q[k] * pw;
      y[2] += p[k] * pw;
      if (k > 0) {
        const double dpw = 2.0 * static_cast<double>(k) * pw / r;
        y[1] += q[k] * dpw;
        y[3] += p[k] * dpw;
      }
      last = std::abs(q[k] * pw) + std::abs(p[k] * pw);
      pw *= r2;
    }
    if (last > 1e-17 * (std::abs(y[0]) + std::abs(y[2]))) return std::nullopt;
    out[s] = y;
  }
  return out;
}

Shot shoot(double a, double b, double h, std::size_t max_steps) {
  Shot s;
  // RK4 loses accuracy next to the 3/r singularity, so the first stretch comes
  // from the series.
  std::size_t start = std::max<std::size_t>(1, static_cast<std::size_t>(0.5 / h));
  std::optional<std::vector<OdeState>> head;
  while (!(head = series_start(a, b, h, start + 1)) && start > 1) start /= 2;
  if (!head) throw BracketError("shooting_refine: series start did not converge");
  s.states = std::move(*head);
  s.states.reserve(max_steps + 1);
  OdeState y = s.states.back();
  for (std::size_t k = start; k < max_steps; ++k) {
    const double r = static_cast<double>(k) * h;
    const auto k1 = ode_rhs(r, y);
    OdeState t;
    for (int j = 0; j < 4; ++j) t[j] = y[j] + 0.5 * h * k1[j];
    const auto k2 = ode_rhs(r + 0.5 * h, t);
    for (int j = 0; j < 4; ++j) t[j] = y[j] + 0.5 * h * k2[j];
    const auto k3 = ode_rhs(r + 0.5 * h, t);
    for (int j = 0; j < 4; ++j) t[j] = y[j] + h * k3[j];
    const auto k4 = ode_rhs(r + h, t);
    for (int j = 0; j < 4; ++j) y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    s.states.push_back(y);
    if (y[0] <= 0.0) {
      s.fate = +1;
      return s;
    }
    if (y[1] > 0.0) {
      s.fate = -1;
      return s;
    }
  }
  return s;
}

struct Branch {
  Shot shot;
  std::size_t trusted = 0; // steps over which the bracketing shots agree
};

// Bisection on Q(0) for fixed P(0) = b.
Branch decaying_branch(double a0, double b, double h, std::size_t max_steps) {
  std::optional<std::pair<double, int>> lo, hi;
  const Shot first = shoot(a0, b, h, max_steps);
  if (first.fate == 0) return {first, first.states.size() - 1};
  for (double delta : {1e-4, 1e-3, 1e-2, 1e-1, 0.5}) {
    for (double sgn : {-1.0, 1.0}) {
      const double a = a0 * (1.0 + sgn * delta);
      const int f = shoot(a, b, h, max_steps).fate;
      if (f != first.fate) {
        lo = {a0, first.fate};
        hi = {a, f};
        break;
      }
    }
    if (lo) break;
  }
  if (!lo) throw BracketError("shooting_refine: could not bracket the decaying branch");
  double a_lo = lo->first, a_hi = hi->first;
  const int f_lo = lo->second;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a_lo + a_hi);
    if (mid == a_lo || mid == a_hi) break;
    const int f = shoot(mid, b, h, max_steps).fate;
    if (f == 0) {
      a_lo = a_hi = mid;
      break;
    }
    (f == f_lo ? a_lo : a_hi) = mid;
  }
  Branch out{shoot(a_lo, b, h, max_steps)};
  const Shot other = shoot(a_hi, b, h, max_steps);
  const std::size_t common = std::min(out.shot.states.size(), other.states.size());
  std::size_t k = 0;
  while (k < common && std::abs(out.shot.states[k][0] - other.states[k][0]) <= 1e-8 * out.shot.states[k][0]) ++k;
  out.trusted = k > 0 ? k - 1 : 0;
  return out;
}

// P(R) minus the exterior monopole value N(R) / (4 pi^2 R^2), N = -2 pi^2 R^3 P'(R).
double monopole_mismatch(const Branch &br, double h) {
  const double r = static_cast<double>(br.trusted) * h;
  const auto &y = br.shot.states[br.trusted];
  const double charge = -kSphereArea * r * r * r * y[3];
  return y[2] - charge / (kFourPiSq * r * r);
}

} // namespace

ShootingResult shooting_refine(const RadialField &q0, double tol) {
  const auto &g = q0.grid();
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(q0[i].imag()) > 1e-12 * std::abs(q0[i].real()) || !(q0[i].real() > 0.0)) {
      throw PreconditionError("shooting_refine: input must be real and positive");
    }
  }
  ShootingResult result{q0};
  result.residual_before = pde_residual(q0);
  result.residual_after = result.residual_before;
  if (result.residual_before >= 1e-2) throw PreconditionError("shooting_refine: input is not a near-solution");
  if (result.residual_before <= tol) return result;

  const double h = 0.5 * g.dr();
  const std::size_t max_steps = 2 * n;
  const auto phi0 = potential(q0);
  const double a0 = interpolate(q0, 0.0).real();
  double b_prev = (9.0 * phi0[0] - phi0[1]) / 8.0 / kFourPiSq;
  double b = b_prev * (1.0 + 1e-4);
  Branch br_prev = decaying_branch(a0, b_prev, h, max_steps);
  double f_prev = monopole_mismatch(br_prev, h);
  Branch br = decaying_branch(br_prev.shot.states[0][0], b, h, max_steps);
  double f = monopole_mismatch(br, h);
  for (int it = 0; it < 60 && std::abs(f) > 1e-15 * std::abs(b); ++it) {
    if (f == f_prev) break;
    const double b_next = b - f * (b - b_prev) / (f - f_prev);
    b_prev = b;
    f_prev = f;
    b = b_next;
    br = decaying_branch(br.shot.states[0][0], b, h, max_steps);
    f = monopole_mismatch(br, h);
  }

  // Sample the shot at the nodes (odd multiples of h) inside the trusted range.
  std::vector<cplx> values(n);
  std::size_t m = 0;
  while (m < n && 2 * m + 1 <= br.trusted) {
    values[m] = br.shot.states[2 * m + 1][0];
    ++m;
  }
  if (m < RadialGrid::kHalfBand + 1) throw BracketError("shooting_refine: shot trusted over too short a range");

  if (m < n) {
    // Linear tail with the exterior monopole potential.
    const double r_match = static_cast<double>(br.trusted) * h;
    const auto &ym = br.shot.states[br.trusted];
    const double charge = -kSphereArea * r_match * r_match * r_match * ym[3];
    const double phi_match = kFourPiSq * ym[2];
    std::vector<double> phi(n, 0.0);
    for (std::size_t j = m; j < n; ++j) {
      const double r = g.node(j);
      phi[j] = phi_match - charge * (1.0 / (r_match * r_match) - 1.0 / (r * r));
    }
    solve_linear_block(g, values, phi, m, n);
  }
  // The discrete Laplacian is only consistent in the weighted sense next to the
  // origin, so the sampled continuum profile is off by a thin boundary layer in
  // the first few nodes. Re-solve those against the discrete operator.
  const std::size_t head = std::min<std::size_t>(kHeadNodes, m);
  solve_linear_block(g, values, potential(RadialField(q0.grid_ptr(), values)).values, 0, head);

  RadialField refined(q0.grid_ptr(), std::move(values));
  for (std::size_t i = 0; i < n; ++i) {
    if (!(refined[i].real() > 0.0)) return result;
    if (i > 0 && !(refined[i].real() < refined[i - 1].real())) return result;
  }
  const double after = pde_residual(refined);
  if (after <= 0.1 * result.residual_before) {
    result.q = std::move(refined);
    result.improved = true;
    result.residual_after = after;
  }
  result.center_value = br.shot.states[0][0];
  result.center_potential = kFourPiSq * b;
  return result;
}

} // namespace hartree
