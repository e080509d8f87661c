#pragma once

// Gaussian-smoothed invariant Ruelle distributions restricted to the
// Birkhoff section of the reference disc.

#include <cstdint>
#include <span>
#include <vector>

#include "ruelle/resonances.hpp"

namespace ruelle {

/// Uniform nodes q_i on [-pi, pi] and p_j on [-1, 1], endpoints included.
struct GridSpec {
  int n_q = 400;
  int n_p = 200;

  double q(int i) const;
  double p(int j) const;
  std::size_t size() const { return static_cast<std::size_t>(n_q) * n_p; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * n_q + i; }
  void validate() const;
};

struct DistributionGrid {
  GridSpec grid;
  double sigma = 0.1;
  cplx lambda0;
  int band = 1;
  std::vector<cplx> values;  // row-major in p: values[grid.index(i, j)]
  double re_min = 0.0;
  double re_max = 0.0;
};

inline constexpr double kMaxSigma = 10.0;

/// Residue of Z_f with f the section comb centred on every node.
DistributionGrid distribution_grid(const OrbitTable& table, std::span<const CycleExpansion> bands,
                                   const Resonance& res, const GridSpec& grid, double sigma,
                                   int workers = 1);

/// Same, from precomputed residue coefficients (one per orbit of the table).
DistributionGrid distribution_grid(const OrbitTable& table, const ResidueCoefficients& coeffs,
                                   cplx lambda0, const GridSpec& grid, double sigma,
                                   int workers = 1);

/// Nodes whose outgoing ray or time-reversed incoming ray meets another
/// disc.  Tangent rows (|p| = 1) and grazing rays are excluded.
std::vector<std::uint8_t> sigma1_mask(const DiscSystem& sys, const GridSpec& grid, int workers = 1);

/// Share of sum |Re value| carried by nodes within Chebyshev index distance
/// `delta` of the mask.
double localization_metric(const DistributionGrid& grid, std::span<const std::uint8_t> mask,
                           int delta);

}  // namespace ruelle
