#include "hartree/symmetries.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hartree/errors.hpp"
#include "hartree/evolution.hpp"
#include "hartree/functionals.hpp"

namespace hartree {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double norm4(const std::array<double, 4> &v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

// |xi_j - xi_k| / rho_j + |t_j - t_k| + |(xi_j - xi_k) t_j / rho_j + x_j - x_k|
double equal_scale_separation(const SymmetryParams &j, const SymmetryParams &k) {
  std::array<double, 4> dxi{}, shift{};
  for (int c = 0; c < 4; ++c) {
    dxi[c] = j.xi[c] - k.xi[c];
    shift[c] = dxi[c] * j.t0 / j.rho + j.x0[c] - k.x0[c];
  }
  return norm4(dxi) / j.rho + std::abs(j.t0 - k.t0) + norm4(shift);
}

} // namespace

void SymmetryParams::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw PreconditionError("SymmetryParams: rho must be positive");
}

ScalingResult apply_scaling(const RadialField &u, double lam) {
  if (!(lam > 0.0) || !std::isfinite(lam)) throw PreconditionError("apply_scaling: lam must be positive");
  RadialField out(u.grid_ptr());
  const double amp = lam * lam;
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = amp * interpolate(u, lam * u.grid().node(i));
  const bool warn = !out.is_zero() && spectral_tail(out) > 0.01;
  return {std::move(out), warn};
}

PcsResult apply_pcs(const RadialField &u, double t, double T) {
  const double s = t - T;
  if (s == 0.0 || !std::isfinite(s)) throw PreconditionError("apply_pcs: t must differ from T");
  const auto &g = u.grid();
  RadialField out(u.grid_ptr());
  const double amp = s * s;
  const double as = std::abs(s);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = g.node(i);
    out[i] = amp * std::conj(interpolate(u, as * r)) * std::polar(1.0, 0.25 * s * r * r);
  }
  const double m_in = mass(u);
  const double m_out = mass(out);
  const bool lost = m_in > 0.0 && m_in - m_out > 1e-8 * m_in;
  return {std::move(out), 1.0 / s, lost};
}

bool sequence_diverges(const std::vector<double> &s, const OrthogonalityOptions &opt) {
  const std::size_t n = s.size();
  if (n < 8) throw InsufficientDataError("orthogonality: sequences need at least 8 terms");
  const std::size_t half = n / 2;
  for (std::size_t i = n - half + 1; i < n; ++i) {
    if (s[i] < s[i - 1]) return false;
  }
  const double med = median(std::vector<double>(s.begin(), s.begin() + static_cast<long>(half)));
  if (s.back() > opt.threshold * med && s.back() > 0.0) return true;
  const std::size_t q = n / 4;
  const double last = (s[n - 1] - s[n - 1 - q]) / static_cast<double>(q);
  const double prev = (s[n - 1 - q] - s[n - 1 - 2 * q]) / static_cast<double>(q);
  return last > 0.0 && prev > 0.0 && last >= opt.min_increment_ratio * prev;
}

bool orthogonal(const std::vector<SymmetryParams> &a, const std::vector<SymmetryParams> &b,
                const OrthogonalityOptions &opt) {
  if (a.size() != b.size()) throw DimensionError("orthogonal: sequences differ in length");
  if (a.size() < 8) throw InsufficientDataError("orthogonal: sequences need at least 8 terms");
  std::vector<double> scale(a.size()), sep(a.size());
  bool same_scale = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i].validate();
    b[i].validate();
    scale[i] = a[i].rho / b[i].rho + b[i].rho / a[i].rho;
    same_scale = same_scale && std::abs(a[i].rho - b[i].rho) <= 1e-12 * std::max(a[i].rho, b[i].rho);
    sep[i] = std::max(equal_scale_separation(a[i], b[i]), equal_scale_separation(b[i], a[i]));
  }
  if (sequence_diverges(scale, opt)) return true;
  return same_scale && sequence_diverges(sep, opt);
}

RadialField stationary_solution(const GroundState &q, double t) {
  RadialField out = q.q;
  out *= std::polar(1.0, t);
  return out;
}

} // namespace hartree
