#include "hartree/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "hartree/errors.hpp"
#include "hartree/functionals.hpp"
#include "hartree/potential.hpp"
#include "hartree/symmetries.hpp"

namespace hartree {

RadialField random_gn_field(const GridPtr &grid, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> width(0.3, 4.0), amp(-1.0, 1.0), beta(-1.0, 1.0);
  std::array<double, 5> w{}, a{};
  for (std::size_t k = 0; k < w.size(); ++k) {
    w[k] = width(rng);
    a[k] = amp(rng);
  }
  const double b = beta(rng);
  return RadialField::from_function(grid, [&](double r) {
    double v = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) v += a[k] * std::exp(-r * r / (2.0 * w[k] * w[k]));
    return v * std::polar(1.0, b * r * r);
  });
}

GnCheckResult gn_check(const GroundState &gs, std::size_t samples, std::uint64_t seed, bool inject_q) {
  if (samples == 0) throw PreconditionError("gn_check: samples must be at least 1");
  std::mt19937_64 rng(seed);
  GnCheckResult res;
  const auto grid = gs.q.grid_ptr();
  while (res.ratios.size() < samples) {
    RadialField u = (inject_q && res.ratios.empty()) ? gs.q : random_gn_field(grid, rng);
    const double m2 = integrate(*grid, u.density());
    const double v = lv4(u);
    if (!(v > 1e-12 * m2 * m2)) {
      ++res.resampled;
      continue;
    }
    const double ratio = gn_functional(u) / gs.sharp_J;
    if (std::abs(ratio - 1.0) < 1e-3) res.near_extremal.push_back(res.ratios.size());
    res.ratios.push_back(ratio);
  }
  std::vector<double> sorted = res.ratios;
  std::sort(sorted.begin(), sorted.end());
  res.min_ratio = sorted.front();
  const std::size_t m = sorted.size() / 2;
  res.median_ratio = sorted.size() % 2 ? sorted[m] : 0.5 * (sorted[m - 1] + sorted[m]);
  res.passed = res.min_ratio >= 1.0 - 1e-6;

  // Log-spaced bins in J / J(Q) from 1 to 1e4, plus an overflow bin.
  for (int k = 0; k <= 16; ++k) res.histogram_edges.push_back(std::pow(10.0, 0.25 * k));
  res.histogram_counts.assign(res.histogram_edges.size(), 0);
  for (double r : res.ratios) {
    const auto it = std::upper_bound(res.histogram_edges.begin(), res.histogram_edges.end(), r);
    const std::size_t bin = it == res.histogram_edges.begin() ? 0 : static_cast<std::size_t>(it - res.histogram_edges.begin()) - 1;
    ++res.histogram_counts[bin];
  }
  return res;
}

RadialField gaussian(const GridPtr &grid, double amplitude, double sigma) {
  if (!(sigma > 0.0)) throw PreconditionError("gaussian: sigma must be positive");
  return RadialField::from_function(grid, [&](double r) { return cplx(amplitude * std::exp(-r * r / (2.0 * sigma * sigma))); });
}

// The image of e^{is} Q under the map with pole T lives at time 1 / (s - T);
// the lab clock starts at -blowup_time.
RadialField pcs_blowup_data(const GroundState &gs, double blowup_time) {
  if (!(blowup_time > 0.0)) throw PreconditionError("pcs_blowup_data: blowup_time must be positive");
  return apply_pcs(gs.q, 0.0, 1.0 / blowup_time).field;
}

RadialField pcs_blowup_exact(const GroundState &gs, double blowup_time, double tau) {
  if (!(blowup_time > 0.0)) throw PreconditionError("pcs_blowup_exact: blowup_time must be positive");
  if (!(tau < blowup_time)) throw PreconditionError("pcs_blowup_exact: tau must precede the blow-up time");
  const double T = 1.0 / blowup_time;
  const double s = T + 1.0 / (tau - blowup_time);
  return apply_pcs(stationary_solution(gs, s), s, T).field;
}

} // namespace hartree
