#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hartree/ground_state.hpp"
#include "hartree/radial_field.hpp"

namespace hartree {

// Sum of five centred Gaussians with widths in [0.3, 4] and amplitudes in
// [-1, 1], times exp(i beta r^2) with beta in [-1, 1].
RadialField random_gn_field(const GridPtr &grid, std::mt19937_64 &rng);

struct GnCheckResult {
  std::vector<double> ratios; // J(u) / J(Q), one per accepted sample
  double min_ratio = 0.0;
  double median_ratio = 0.0;
  std::size_t resampled = 0; // draws discarded because lv4 was negligible
  std::vector<std::size_t> near_extremal; // samples with |J/J(Q) - 1| < 1e-3
  std::vector<double> histogram_edges;
  std::vector<std::size_t> histogram_counts;
  bool passed = false; // min_ratio >= 1 - 1e-6
};

// J over `samples` seeded random fields. With inject_q the first sample is Q.
GnCheckResult gn_check(const GroundState &gs, std::size_t samples, std::uint64_t seed, bool inject_q);

// A exp(-r^2 / (2 sigma^2)).
RadialField gaussian(const GridPtr &grid, double amplitude, double sigma = 1.0);

// Data at lab time 0 of the explicit solution that blows up at lab time
// blowup_time: the pseudo-conformal image of e^{it} Q.
RadialField pcs_blowup_data(const GroundState &gs, double blowup_time);

// That explicit solution at lab time tau < blowup_time.
RadialField pcs_blowup_exact(const GroundState &gs, double blowup_time, double tau);

} // namespace hartree
