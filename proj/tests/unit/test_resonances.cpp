#include <doctest.h>

#include <cmath>
#include <random>

#include "ruelle/resonances.hpp"

using namespace ruelle;

namespace {

struct Fixture {
  OrbitTable table = build_orbit_table(DiscSystem(6.0), Domain::fundamental, 8);
  std::vector<CycleData> cycles = cycle_data(table);
  std::vector<CycleExpansion> bands = build_expansions(cycles, 2, 8);
  std::vector<double> ones = orbit_weights(table, WeightSpec{ConstantOne{}});
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

// Real zero of the band by plain bisection on the real axis.
double bisect(const CycleExpansion& e, double lo, double hi) {
  double flo = e.value(lo).real();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = e.value(mid).real();
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("leading real resonance") {
  const auto& f = fx();
  const auto zeros = scan_band(f.bands[0], Rect{-1.0, 0.5, 0.0, 5.0});
  int real_count = 0;
  double real_zero = 0.0;
  for (const auto& z : zeros) {
    if (z.value.imag() == 0.0) {
      ++real_count;
      real_zero = z.value.real();
    }
  }
  REQUIRE(real_count == 1);
  // Seed bracket from the two-term truncation 1 = e^{-4x}/9.899 + e^{-4.268x}/11.77.
  const double oracle = bisect(f.bands[0], -0.6, -0.2);
  CHECK(std::abs(real_zero - oracle) < 1e-10);
  CHECK(std::abs(real_zero + 0.4103384077693) < 1e-9);
}

TEST_CASE("scan edge cases") {
  const auto& f = fx();
  CHECK(scan_band(f.bands[0], Rect{10.0, 12.0, -5.0, 5.0}).empty());
  CHECK_THROWS_AS(scan_band(f.bands[0], Rect{-1.0, 0.5, 0.0, 5.0}, {0.6}), std::invalid_argument);
  CHECK(scan_band(f.bands[0], Rect{0.0, 0.0, 0.0, 1.0}).empty());
}

TEST_CASE("conjugation symmetry and zero quality") {
  const auto& f = fx();
  const Rect upper{-0.7, 0.5, 0.0, 20.0}, lower{-0.7, 0.5, -20.0, 0.0};
  const auto up = scan(f.bands, upper);
  const auto down = scan(f.bands, lower);
  REQUIRE(up.size() == down.size());
  REQUIRE(up.size() > 5);
  for (const auto& z : up) {
    const auto* match = [&]() -> const Resonance* {
      for (const auto& w : down) {
        if (w.band == z.band && std::abs(w.value - std::conj(z.value)) < 1e-10) return &w;
      }
      return nullptr;
    }();
    CHECK(match != nullptr);
    CHECK(z.residual <= 1e-10 * z.derivative);
    CHECK(z.order == 1);
  }
}

TEST_CASE("argument principle count matches located zeros") {
  const auto& f = fx();
  for (const Rect& r : {Rect{-0.9, 0.3, 0.3, 9.7}, Rect{-0.8, 0.4, -6.1, 6.2}}) {
    int located = 0;
    for (const auto& z : scan_band(f.bands[0], r)) located += z.order;
    CHECK(zero_count(f.bands[0], r) == located);
  }
  // A contour through the leading zero is rejected.
  CHECK_THROWS_AS(zero_count(f.bands[0], Rect{-0.410338407769302, 0.0, -1.0, 1.0}), NumericalError);
}

TEST_CASE("scan is independent of the worker count") {
  const auto& f = fx();
  const Rect r{-1.0, 0.5, -8.0, 8.0};
  const auto a = scan(f.bands, r, {0.25, 1});
  const auto b = scan(f.bands, r, {0.25, 4});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].value == b[i].value);
    CHECK(a[i].band == b[i].band);
  }
}

TEST_CASE("residues") {
  const auto& f = fx();
  const auto zeros = scan(f.bands, Rect{-1.0, 0.5, 0.0, 12.0});
  const std::vector<double> zero(f.ones.size(), 0.0);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  int band2 = 0;
  for (const auto& z : zeros) {
    CAPTURE(z.value);
    const cplx r1 = residue(f.bands, z, f.ones);
    CHECK(std::abs(r1 - static_cast<double>(z.band)) < 1e-12);
    CHECK(residue(f.bands, z, zero) == 0.0);
    band2 += z.band == 2;

    // Regrouping the sum per prime changes rounding by eps times the
    // condition number of the term sum, which is large near Re = -1.
    const auto& e = f.bands[z.band - 1];
    double cond = 0.0;
    for (const auto& t : e.terms()) cond += std::abs(t.coefficient * std::exp(-z.value * t.period)) * t.period;
    cond /= std::abs(e.d_lambda(z.value));
    const double tol = 1e-12 * std::max(1.0, cond);

    const auto coeffs = residue_coefficients(f.bands, z);
    CHECK(std::abs(coeffs.residue(f.ones) - static_cast<double>(z.band)) < tol);
    CHECK(coeffs.residue(zero) == 0.0);

    std::vector<double> a(f.ones.size()), b(f.ones.size()), c(f.ones.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = g(rng);
      b[i] = g(rng);
      c[i] = 1.5 * a[i] - 0.25 * b[i];
    }
    const cplx ra = residue(f.bands, z, a), rb = residue(f.bands, z, b);
    CHECK(std::abs(coeffs.residue(a) - ra) <= tol * std::max(1.0, std::abs(ra)));
    CHECK(std::abs(residue(f.bands, z, c) - (1.5 * ra - 0.25 * rb)) <= 1e-12 * (1.0 + std::abs(ra) + std::abs(rb)));
    if (z.value.imag() == 0.0) CHECK(std::abs(ra.imag()) <= 1e-10 * std::max(1.0, std::abs(ra)));

    if (z.value.real() > -0.7) {
      const double rho = default_contour_radius(z.value, zeros);
      const LaurentResult l0 = laurent_coefficient(f.bands, z.value, 0, a, rho);
      CHECK(l0.reliable);
      CHECK(std::abs(l0.value - ra) <= 1e-6 * std::abs(ra));
      const LaurentResult l1 = laurent_coefficient(f.bands, z.value, 1, a, rho);
      CHECK(std::abs(l1.value) < 1e-8);
    }
  }
  CHECK(band2 > 0);
}

TEST_CASE("flow derivatives have vanishing residues") {
  const auto& f = fx();
  const DiscSystem& sys = f.table.system;
  const PhaseGaussian g{0.5 * (sys.center(0) + sys.center(1)), 0.0, 0.2, 0.0, 1.0};
  const auto w = orbit_weights(f.table, WeightSpec{FlowDerivative{g}});
  const auto zeros = scan_band(f.bands[0], Rect{-0.5, 0.0, -0.1, 0.1});
  REQUIRE(zeros.size() == 1);
  CHECK(std::abs(residue(f.bands, zeros[0], w)) < 1e-10);
}

TEST_CASE("contour guards") {
  const auto& f = fx();
  const cplx lead(-0.410338407769302, 0.0);
  CHECK_THROWS_AS(laurent_coefficient(f.bands, lead, 0, f.ones, 2.0), NumericalError);
  CHECK_THROWS_AS(laurent_coefficient(f.bands, lead, 0, f.ones, 0.1, 16), std::invalid_argument);
  const auto l = laurent_coefficient(f.bands, lead, 0, f.ones, 0.1);
  CHECK(std::abs(l.value - 1.0) < 1e-6);
}
