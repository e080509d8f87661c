#include "ruelle/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ruelle/parallel.hpp"

namespace ruelle {

namespace {
constexpr double kPi = std::numbers::pi;

struct WeightedPoint {
  double q;
  double p;
  cplx coefficient;
};
}  // namespace

double GridSpec::q(int i) const { return -kPi + 2.0 * kPi * i / (n_q - 1); }
double GridSpec::p(int j) const { return -1.0 + 2.0 * j / (n_p - 1); }

void GridSpec::validate() const {
  if (n_q < 2 || n_p < 2 || n_q > 2000 || n_p > 1000) {
    throw std::invalid_argument("grid must be between 2x2 and 2000x1000 nodes");
  }
}

DistributionGrid distribution_grid(const OrbitTable& table, const ResidueCoefficients& coeffs,
                                   cplx lambda0, const GridSpec& grid, double sigma, int workers) {
  grid.validate();
  if (!(sigma > 0.0) || sigma > kMaxSigma) {
    throw std::invalid_argument("sigma must lie in (0, 10]");
  }
  if (coeffs.per_prime.size() > table.orbits.size()) {
    throw std::invalid_argument("residue coefficients do not match the orbit table");
  }

  std::vector<WeightedPoint> points;
  for (std::size_t k = 0; k < coeffs.per_prime.size(); ++k) {
    for (const SectionPoint& b : table.orbits[k].section_bounces) {
      points.push_back({b.q, b.p, coeffs.per_prime[k]});
    }
  }
  const cplx prefactor = -static_cast<double>(coeffs.band) / coeffs.denominator;
  const double cutoff = 40.0 * sigma;  // exp(-800) underflows

  DistributionGrid out;
  out.grid = grid;
  out.sigma = sigma;
  out.lambda0 = lambda0;
  out.band = coeffs.band;
  out.values = parallel_map(grid.size(), workers, [&](std::size_t node) {
    const int i = static_cast<int>(node % grid.n_q);
    const int j = static_cast<int>(node / grid.n_q);
    const double q0 = grid.q(i), p0 = grid.p(j);
    cplx sum = 0.0;
    for (const auto& pt : points) {
      if (std::abs(pt.p - p0) > cutoff) continue;
      const double g = section_gaussian(pt.q - q0, pt.p - p0, sigma);
      if (g != 0.0) sum += g * pt.coefficient;
    }
    return prefactor * sum;
  });
  out.re_min = std::numeric_limits<double>::infinity();
  out.re_max = -std::numeric_limits<double>::infinity();
  for (const cplx& v : out.values) {
    out.re_min = std::min(out.re_min, v.real());
    out.re_max = std::max(out.re_max, v.real());
  }
  return out;
}

DistributionGrid distribution_grid(const OrbitTable& table, std::span<const CycleExpansion> bands,
                                   const Resonance& res, const GridSpec& grid, double sigma,
                                   int workers) {
  const ResidueCoefficients coeffs = residue_coefficients(bands, res);
  return distribution_grid(table, coeffs, res.value, grid, sigma, workers);
}

std::vector<std::uint8_t> sigma1_mask(const DiscSystem& sys, const GridSpec& grid, int workers) {
  grid.validate();
  const int ref = sys.reference_disc();
  return parallel_map(grid.size(), workers, [&](std::size_t node) -> std::uint8_t {
    const int i = static_cast<int>(node % grid.n_q);
    const int j = static_cast<int>(node / grid.n_q);
    const double p = grid.p(j);
    if (!(std::abs(p) < 1.0)) return 0;
    const PhasePoint x = from_birkhoff(sys, {grid.q(i), p, ref});
    const Vec2 normal = (x.position - sys.center(ref)) / sys.radius();
    const Vec2 incoming = x.direction - 2.0 * x.direction.dot(normal) * normal;
    const Reflection fwd = next_reflection(sys, x);
    if (fwd.outcome == RayOutcome::hit) return 1;
    const Reflection bwd = next_reflection(sys, {x.position, -incoming});
    return bwd.outcome == RayOutcome::hit ? 1 : 0;
  });
}

double localization_metric(const DistributionGrid& grid, std::span<const std::uint8_t> mask, int delta) {
  const GridSpec& g = grid.grid;
  if (mask.size() != g.size()) throw std::invalid_argument("mask does not match the grid");
  if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; })) {
    throw std::invalid_argument("localization metric needs a non-empty mask");
  }
  if (delta < 0) throw std::invalid_argument("delta must be non-negative");

  // Chebyshev dilation as two separable 1D passes.
  std::vector<std::uint8_t> rows(g.size(), 0), near(g.size(), 0);
  for (int j = 0; j < g.n_p; ++j) {
    int last = -1 - delta;  // most recent masked column
    for (int i = 0; i < g.n_q; ++i) {
      if (mask[g.index(i, j)]) last = i;
      if (i - last <= delta) rows[g.index(i, j)] = 1;
    }
    last = g.n_q + delta;
    for (int i = g.n_q - 1; i >= 0; --i) {
      if (mask[g.index(i, j)]) last = i;
      if (last - i <= delta) rows[g.index(i, j)] = 1;
    }
  }
  for (int i = 0; i < g.n_q; ++i) {
    int last = -1 - delta;
    for (int j = 0; j < g.n_p; ++j) {
      if (rows[g.index(i, j)]) last = j;
      if (j - last <= delta) near[g.index(i, j)] = 1;
    }
    last = g.n_p + delta;
    for (int j = g.n_p - 1; j >= 0; --j) {
      if (rows[g.index(i, j)]) last = j;
      if (last - j <= delta) near[g.index(i, j)] = 1;
    }
  }

  double inside = 0.0, total = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double a = std::abs(grid.values[k].real());
    total += a;
    if (near[k]) inside += a;
  }
  if (!(total > 0.0)) throw NumericalError("distribution grid is identically zero");
  return inside / total;
}

}  // namespace ruelle
