#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ruelle/distribution.hpp"

using namespace ruelle;

namespace {

struct Fixture {
  OrbitTable table = build_orbit_table(DiscSystem(6.0), Domain::fundamental, 8);
  std::vector<CycleExpansion> bands = build_expansions(cycle_data(table), 2, 8);
  std::vector<Resonance> zeros = scan(bands, Rect{-0.7, 0.5, -6.0, 6.0});

  const Resonance& leading() const {
    for (const auto& z : zeros) {
      if (z.band == 1 && z.value.imag() == 0.0) return z;
    }
    throw std::runtime_error("no real zero");
  }
  const Resonance* complex_zero(double sign) const {
    for (const auto& z : zeros) {
      if (z.band == 1 && z.value.imag() * sign > 0.5) return &z;
    }
    return nullptr;
  }
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

// Marching test for whether a ray from a point on the reference disc meets
// another disc within distance 30.
bool marching_hits(const DiscSystem& sys, Vec2 from, Vec2 dir, int own) {
  for (double t = 1e-3; t < 30.0; t += 1e-3) {
    const Vec2 y = from + t * dir;
    for (int d = 0; d < 3; ++d) {
      if (d != own && (y - sys.center(d)).norm() < sys.radius()) return true;
    }
  }
  return false;
}

}  // namespace

TEST_CASE("grid nodes and validation") {
  const GridSpec g{5, 3};
  CHECK(g.q(0) == -std::numbers::pi);
  CHECK(g.q(4) == std::numbers::pi);
  CHECK(g.p(1) == 0.0);
  CHECK(g.size() == 15);
  CHECK(g.index(2, 1) == 7);
  CHECK_THROWS_AS((GridSpec{1, 3}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GridSpec{2001, 3}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GridSpec{20, 1001}.validate()), std::invalid_argument);
  const auto& f = fx();
  CHECK_THROWS_AS(distribution_grid(f.table, f.bands, f.leading(), GridSpec{8, 8}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(distribution_grid(f.table, f.bands, f.leading(), GridSpec{8, 8}, 10.5), std::invalid_argument);
}

TEST_CASE("grid values are residues of section combs") {
  const auto& f = fx();
  const GridSpec g{61, 31};
  const double sigma = 0.1;
  const auto grid = distribution_grid(f.table, f.bands, f.leading(), g, sigma, 2);
  REQUIRE(grid.values.size() == g.size());
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> ui(0, g.n_q - 1), uj(0, g.n_p - 1);
  double peak = 0.0;
  for (const cplx& v : grid.values) peak = std::max(peak, std::abs(v));
  for (int n = 0; n < 5; ++n) {
    const int i = ui(rng), j = uj(rng);
    CAPTURE(i);
    CAPTURE(j);
    const auto w = orbit_weights(f.table, WeightSpec{SectionComb{g.q(i), g.p(j), sigma}});
    const cplx direct = residue(f.bands, f.leading(), w);
    const cplx v = grid.values[g.index(i, j)];
    CHECK(std::abs(v - direct) <= 1e-10 * std::max(peak, 1e-300));
    const double rho = default_contour_radius(f.leading().value, f.zeros);
    const cplx contour = laurent_coefficient(f.bands, f.leading().value, 0, w, rho).value;
    CHECK(std::abs(v - contour) <= 1e-5 * peak);
  }
  CHECK(grid.re_min <= grid.re_max);
  for (const cplx& v : grid.values) CHECK(std::abs(v.imag()) <= 1e-10 * peak);
}

TEST_CASE("zero coefficients and linearity") {
  const auto& f = fx();
  const GridSpec g{41, 21};
  auto coeffs = residue_coefficients(f.bands, f.leading());
  const auto base = distribution_grid(f.table, coeffs, f.leading().value, g, 0.2);

  auto scaled = coeffs;
  for (auto& c : scaled.per_prime) c *= 2.5;
  const auto twice = distribution_grid(f.table, scaled, f.leading().value, g, 0.2);
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(std::abs(twice.values[k] - 2.5 * base.values[k]) <= 1e-14 * (1.0 + std::abs(base.values[k])));
  }

  for (auto& c : coeffs.per_prime) c = 0.0;
  const auto none = distribution_grid(f.table, coeffs, f.leading().value, g, 0.2);
  for (const cplx& v : none.values) CHECK(v == 0.0);
  CHECK_THROWS_AS(localization_metric(none, sigma1_mask(f.table.system, g), 1), NumericalError);
}

TEST_CASE("conjugate zeros give conjugate distributions") {
  const auto& f = fx();
  const Resonance* up = f.complex_zero(1.0);
  REQUIRE(up != nullptr);
  const Resonance* down = nullptr;
  for (const auto& z : f.zeros) {
    if (z.band == up->band && std::abs(z.value - std::conj(up->value)) < 1e-9) down = &z;
  }
  REQUIRE(down != nullptr);
  const GridSpec g{41, 21};
  const auto a = distribution_grid(f.table, f.bands, *up, g, 0.1);
  const auto b = distribution_grid(f.table, f.bands, *down, g, 0.1);
  double peak = 0.0;
  for (const cplx& v : a.values) peak = std::max(peak, std::abs(v));
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(std::abs(a.values[k] - std::conj(b.values[k])) <= 1e-9 * peak);
  }
}

TEST_CASE("wide smoothing is nearly flat") {
  const auto& f = fx();
  const auto grid = distribution_grid(f.table, f.bands, f.leading(), GridSpec{41, 21}, 10.0);
  double mean = 0.0;
  for (const cplx& v : grid.values) mean += v.real();
  mean /= static_cast<double>(grid.values.size());
  CHECK(mean > 0.0);
  CHECK((grid.re_max - grid.re_min) <= 0.05 * mean);
}

TEST_CASE("sigma1 mask") {
  const DiscSystem sys(6.0);
  const int ref = sys.reference_disc();
  const GridSpec g{41, 21};
  const auto mask = sigma1_mask(sys, g, 3);
  REQUIRE(mask.size() == g.size());

  // Pointing straight at a neighbour, straight out, and along the tangent.
  const Vec2 c = sys.center(ref), other = sys.center((ref + 1) % 3);
  const Vec2 towards = (other - c).normalized();
  const SectionPoint facing = to_birkhoff(sys, {c + sys.radius() * towards, towards}, ref);
  const SectionPoint outward = to_birkhoff(sys, {c + sys.radius() * c.normalized(), c.normalized()}, ref);
  auto nearest = [&](const SectionPoint& s) {
    const int i = static_cast<int>(std::lround((s.q + std::numbers::pi) / (2.0 * std::numbers::pi) * (g.n_q - 1)));
    const int j = static_cast<int>(std::lround((s.p + 1.0) / 2.0 * (g.n_p - 1)));
    return mask[g.index(i, j)];
  };
  CHECK(nearest(facing) == 1);
  CHECK(nearest(outward) == 0);
  for (int i = 0; i < g.n_q; ++i) {
    CHECK(mask[g.index(i, 0)] == 0);
    CHECK(mask[g.index(i, g.n_p - 1)] == 0);
  }

  std::size_t count = 0;
  for (auto m : mask) count += m;
  CHECK(count > 0);
  CHECK(count < g.size());

  // Independent marching check on every interior node.
  int disagree = 0;
  for (int j = 1; j + 1 < g.n_p; ++j) {
    for (int i = 0; i < g.n_q; i += 4) {
      const PhasePoint x = from_birkhoff(sys, {g.q(i), g.p(j), ref});
      const Vec2 n = (x.position - c).normalized();
      const Vec2 incoming = x.direction - 2.0 * x.direction.dot(n) * n;
      const bool oracle = marching_hits(sys, x.position, x.direction, ref) ||
                          marching_hits(sys, x.position, -incoming, ref);
      disagree += oracle != (mask[g.index(i, j)] != 0);
    }
  }
  CHECK(disagree == 0);
}

TEST_CASE("localization metric") {
  const auto& f = fx();
  const GridSpec g{41, 21};
  const auto mask = sigma1_mask(f.table.system, g);
  double fraction = 0.0;
  for (auto m : mask) fraction += m;
  fraction /= static_cast<double>(g.size());

  const auto wide = distribution_grid(f.table, f.bands, f.leading(), g, 10.0);
  CHECK(localization_metric(wide, mask, 1000) == 1.0);
  CHECK(std::abs(localization_metric(wide, mask, 0) - fraction) < 0.05 * fraction);

  // Brute-force Chebyshev dilation oracle.
  const auto grid = distribution_grid(f.table, f.bands, f.leading(), g, 0.1);
  double prev = 0.0;
  for (int delta : {0, 1, 2, 5}) {
    double inside = 0.0, total = 0.0;
    for (int j = 0; j < g.n_p; ++j) {
      for (int i = 0; i < g.n_q; ++i) {
        bool near = false;
        for (int b = std::max(0, j - delta); b <= std::min(g.n_p - 1, j + delta) && !near; ++b) {
          for (int a = std::max(0, i - delta); a <= std::min(g.n_q - 1, i + delta) && !near; ++a) {
            near = mask[g.index(a, b)] != 0;
          }
        }
        const double v = std::abs(grid.values[g.index(i, j)].real());
        total += v;
        if (near) inside += v;
      }
    }
    const double m = localization_metric(grid, mask, delta);
    CHECK(std::abs(m - inside / total) < 1e-14);
    CHECK(m >= prev);
    prev = m;
  }
  CHECK_THROWS_AS(localization_metric(grid, mask, -1), std::invalid_argument);
  const std::vector<std::uint8_t> empty(g.size(), 0);
  CHECK_THROWS_AS(localization_metric(grid, empty, 1), std::invalid_argument);
}

TEST_CASE("distribution converges in the truncation length") {
  const DiscSystem sys(6.0);
  const GridSpec g{41, 21};
  std::vector<DistributionGrid> grids;
  for (int n : {7, 8}) {
    const OrbitTable t = build_orbit_table(sys, Domain::fundamental, n);
    const auto b = build_expansions(cycle_data(t), 1, n);
    const auto z = scan_band(b[0], Rect{-0.6, -0.2, -0.1, 0.1});
    REQUIRE(z.size() == 1);
    grids.push_back(distribution_grid(t, b, z[0], g, 0.1));
  }
  double diff = 0.0, norm = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    diff += std::norm(grids[1].values[k] - grids[0].values[k]);
    norm += std::norm(grids[1].values[k]);
  }
  CHECK(std::sqrt(diff / norm) < 0.01);
}
