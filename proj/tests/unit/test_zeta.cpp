#include <doctest.h>

#include <cmath>
#include <random>

#include "ruelle/zeta.hpp"

using namespace ruelle;

namespace {

const OrbitTable& table8() {
  static const OrbitTable t = build_orbit_table(DiscSystem(6.0), Domain::fundamental, 8);
  return t;
}

double sgn(double x) { return x > 0.0 ? 1.0 : -1.0; }

// prod_p (1 - t_p z^{n_p}) as a polynomial in z truncated at degree n_max,
// evaluated at z = 1.
cplx product_oracle(std::span<const CycleData> cycles, int band, int n_max, cplx lambda) {
  std::vector<cplx> poly(n_max + 1, 0.0);
  poly[0] = 1.0;
  for (const auto& c : cycles) {
    if (c.length > n_max) continue;
    const cplx t = std::pow(sgn(c.stability), band + 1) * std::pow(std::abs(c.stability), -band) *
                   std::exp(-lambda * c.period);
    for (int d = n_max; d >= c.length; --d) poly[d] -= t * poly[d - c.length];
  }
  cplx sum = 0.0;
  for (const cplx& x : poly) sum += x;
  return sum;
}

std::vector<double> periods(std::span<const CycleData> cycles) {
  std::vector<double> out;
  for (const auto& c : cycles) out.push_back(c.period);
  return out;
}

}  // namespace

TEST_CASE("first expansions") {
  const auto cycles = cycle_data(table8());
  const cplx lam(0.4, 1.3);
  const auto e1 = build_expansion(cycles, 1, 1);
  // t_w = sigma_w^2 e^{-lambda T_w} / |Lambda_w| with sigma_w^2 = 1
  auto t = [&](int i) { return std::exp(-lam * cycles[i].period) / std::abs(cycles[i].stability); };
  const cplx expected = 1.0 - t(0) - t(1);
  CHECK(std::abs(e1.value(lam) - expected) < 1e-15);
  CHECK(e1.terms().size() == 3);

  const auto e2 = build_expansion(cycles, 1, 2);
  REQUIRE(table8().orbits[2].cycle.word() == "01");
  const cplx curvature = t(2) - t(0) * t(1);
  CHECK(std::abs(e2.value(lam) - (expected - curvature)) < 1e-15);
}

TEST_CASE("expansion equals the truncated Euler product") {
  const auto cycles = cycle_data(table8());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> re(-1.0, 2.0), im(-15.0, 15.0);
  for (int band = 1; band <= 3; ++band) {
    for (int n : {3, 6, 8}) {
      const auto e = build_expansion(cycles, band, n);
      for (int k = 0; k < 5; ++k) {
        const cplx lam(re(rng), im(rng));
        const cplx oracle = product_oracle(cycles, band, n, lam);
        CHECK(std::abs(e.value(lam) - oracle) < 1e-12 * std::max(1.0, std::abs(oracle)));
      }
    }
  }
}

TEST_CASE("term count is the number of admissible prime subsets") {
  const auto cycles = cycle_data(table8());
  for (int n = 1; n <= 8; ++n) {
    // Count subsets by a dynamic program over lengths.
    std::vector<double> ways(n + 1, 0.0);
    ways[0] = 1.0;
    for (const auto& c : cycles) {
      if (c.length > n) continue;
      for (int d = n; d >= c.length; --d) ways[d] += ways[d - c.length];
    }
    double total = 0.0;
    for (double w : ways) total += w;
    CHECK(build_expansion(cycles, 1, n).terms().size() == static_cast<std::size_t>(total));
  }
  CHECK(build_expansion(cycles, 1, 8).terms().size() == 257);
  CHECK_THROWS_AS(build_expansion(cycles, 1, 9), std::invalid_argument);
}

TEST_CASE("derivatives and symmetries") {
  const auto cycles = cycle_data(table8());
  const auto T = periods(cycles);
  const auto bands = build_expansions(cycles, 3, 8);
  for (const auto& e : bands) {
    const cplx lam(0.3, 2.0);
    const double h = 1e-5;
    const cplx fd = (e.value(lam + h) - e.value(lam - h)) / (2.0 * h);
    CHECK(std::abs(fd - e.d_lambda(lam)) <= 1e-8 * std::abs(e.d_lambda(lam)));

    // With A_p = T_p the beta derivative is minus the lambda derivative.
    for (const auto& t : e.terms()) {
      double a = 0.0;
      for (int p : t.primes) a += T[p];
      CHECK(std::abs(a - t.period) <= 1e-14 * t.period);
    }
    CHECK(std::abs(e.d_beta(lam, T) + e.d_lambda(lam)) <= 1e-13 * std::abs(e.d_lambda(lam)));

    CHECK(std::abs(e.value(std::conj(lam)) - std::conj(e.value(lam))) < 1e-15);
    CHECK(std::abs(e.value(30.0) - 1.0) < 1e-40);

    const double beta = 1e-5;
    const cplx fdb = (e.value_at(lam, beta, T) - e.value_at(lam, -beta, T)) / (2.0 * beta);
    CHECK(std::abs(fdb - e.d_beta(lam, T)) <= 1e-8 * std::abs(e.d_beta(lam, T)));
    CHECK(e.evaluate(lam, ZetaMode::d_lambda) == e.d_lambda(lam));
  }
}

TEST_CASE("truncation converges at a fixed point") {
  const auto cycles = cycle_data(table8());
  const cplx lam(0.0, 1.0);
  double prev_inc = 1e300;
  cplx prev = build_expansion(cycles, 1, 3).value(lam);
  for (int n = 4; n <= 8; ++n) {
    const cplx v = build_expansion(cycles, 1, n).value(lam);
    const double inc = std::abs(v - prev);
    CHECK(inc < prev_inc);
    prev_inc = inc;
    prev = v;
  }
}

TEST_CASE("weighted zeta") {
  const auto cycles = cycle_data(table8());
  const auto T = periods(cycles);
  const std::vector<double> zero(cycles.size(), 0.0);
  const auto bands = build_expansions(cycles, 3, 8);
  const cplx lam(2.5, 3.0);
  CHECK(weighted_zeta(bands, lam, zero).value == 0.0);
  const cplx z = weighted_zeta(bands, lam, T).value;
  CHECK(std::abs(weighted_zeta(bands, std::conj(lam), T).value - std::conj(z)) <= 1e-15 * std::abs(z));
  CHECK(weighted_zeta_direct(cycles, lam, zero, 20, 8).value == 0.0);

  SUBCASE("enough bands reproduce the orbit sum") {
    const auto many = build_expansions(cycles, 14, 8);
    for (cplx l : {cplx(2.0, 0.0), cplx(3.0, 5.0), cplx(4.5, -2.0)}) {
      const cplx a = weighted_zeta(many, l, T).value;
      const cplx b = weighted_zeta_direct(cycles, l, T, 20, 8).value;
      CHECK(std::abs(a - b) <= 1e-8 * std::abs(b));
    }
  }

  SUBCASE("band truncation error is covered by the tail bound") {
    for (int k_max = 1; k_max <= 4; ++k_max) {
      const auto some = build_expansions(cycles, k_max, 8);
      for (cplx l : {cplx(2.0, 0.0), cplx(2.5, 7.0), cplx(4.0, -3.0), cplx(1.5, 12.0)}) {
        const ZetaValue a = weighted_zeta(some, l, T);
        const cplx b = weighted_zeta_direct(cycles, l, T, 30, 8).value;
        CHECK(std::abs(a.value - b) <= a.tail_bound);
        CHECK(std::isfinite(a.tail_bound));
      }
    }
  }

  SUBCASE("zeros of a band are rejected") {
    const auto one = build_expansions(cycles, 1, 8);
    const double x = -0.410338407769302;
    CHECK_THROWS_AS(weighted_zeta(one, x, T), PoleProximity);
  }

  SUBCASE("divergent orbit sums are rejected") {
    CHECK_THROWS_AS(weighted_zeta_direct(cycles, -1.0, T, 20, 8), NumericalError);
  }
}

TEST_CASE("single-orbit toy sum") {
  const std::vector<CycleData> toy{{1.0, 4.0, 1}};
  const std::vector<double> a{1.0};
  for (int r_max = 1; r_max <= 20; ++r_max) {
    double oracle = 0.0;
    for (int r = 1; r <= r_max; ++r) {
      const double x = std::pow(4.0, -r);
      oracle += std::exp(-r) * x / ((1.0 - x) * (1.0 - x));  // sum_k k x^k
    }
    const cplx v = weighted_zeta_direct(toy, 1.0, a, r_max, 1).value;
    CHECK(std::abs(v.real() - oracle) < 1e-12 * oracle);
    CHECK(v.imag() == 0.0);
  }
}
