#include "ruelle/zeta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ruelle {

void CompensatedSum::add_real(double& s, double& c, double x) {
  const double t = s + x;
  if (std::abs(s) >= std::abs(x)) {
    c += (s - t) + x;
  } else {
    c += (x - t) + s;
  }
  s = t;
}

void CompensatedSum::add(cplx x) {
  add_real(re_, cre_, x.real());
  add_real(im_, cim_, x.imag());
}

std::vector<CycleData> cycle_data(const OrbitTable& table) {
  std::vector<CycleData> out;
  out.reserve(table.orbits.size());
  for (const auto& o : table.orbits) out.push_back({o.period, o.stability, o.length()});
  return out;
}

CycleExpansion::CycleExpansion(std::span<const CycleData> cycles, int band, int n_max)
    : band_(band), n_max_(n_max), prime_count_(0),
      min_abs_stability_(std::numeric_limits<double>::infinity()) {
  if (band < 1) throw std::invalid_argument("band index must be >= 1");
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");

  // Every admissible length must be represented; a gap means the orbit
  // table is missing primes.
  std::vector<int> primes;
  std::vector<double> weight;
  std::vector<bool> seen(n_max + 1, false);
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    const CycleData& c = cycles[i];
    if (c.length > n_max) continue;
    if (!(std::abs(c.stability) > 1.0)) {
      throw std::invalid_argument("cycle stability must satisfy |Lambda| > 1");
    }
    seen[c.length] = true;
    primes.push_back(static_cast<int>(i));
    const double s = c.stability > 0.0 ? 1.0 : -1.0;
    weight.push_back(std::pow(s, band + 1) * std::pow(std::abs(c.stability), -band));
    min_abs_stability_ = std::min(min_abs_stability_, std::abs(c.stability));
  }
  prime_count_ = primes.size();

  // Depth-first enumeration of sets of distinct primes with total length
  // <= n_max.
  std::vector<int> chosen;
  auto dfs = [&](auto&& self, std::size_t start, int length, double coef, double period) -> void {
    terms_.push_back({coef, period, length, chosen});
    for (std::size_t j = start; j < primes.size(); ++j) {
      const CycleData& c = cycles[primes[j]];
      if (length + c.length > n_max) continue;
      chosen.push_back(primes[j]);
      self(self, j + 1, length + c.length, -coef * weight[j], period + c.period);
      chosen.pop_back();
    }
  };
  dfs(dfs, 0, 0, 1.0, 0.0);
  std::stable_sort(terms_.begin(), terms_.end(),
                   [](const Term& a, const Term& b) { return a.length < b.length; });
}

cplx CycleExpansion::value_at(cplx lambda, double beta, std::span<const double> weights) const {
  CompensatedSum sum;
  for (const Term& t : terms_) {
    double a = 0.0;
    if (beta != 0.0) {
      for (int p : t.primes) a += weights[p];
    }
    sum.add(t.coefficient * std::exp(-lambda * t.period + beta * a));
  }
  return sum.result();
}

cplx CycleExpansion::value(cplx lambda) const {
  CompensatedSum sum;
  for (const Term& t : terms_) sum.add(t.coefficient * std::exp(-lambda * t.period));
  return sum.result();
}

cplx CycleExpansion::d_lambda(cplx lambda) const {
  CompensatedSum sum;
  for (const Term& t : terms_) {
    sum.add(-t.period * t.coefficient * std::exp(-lambda * t.period));
  }
  return sum.result();
}

std::pair<cplx, cplx> CycleExpansion::value_and_derivative_extended(cplx lambda) const {
  using xcplx = std::complex<long double>;
  const xcplx l(lambda.real(), lambda.imag());
  xcplx f = 0.0L, d = 0.0L;
  for (const Term& t : terms_) {
    const long double period = t.period;
    const xcplx w = static_cast<long double>(t.coefficient) * std::exp(-l * period);
    f += w;
    d -= period * w;
  }
  return {cplx(static_cast<double>(f.real()), static_cast<double>(f.imag())),
          cplx(static_cast<double>(d.real()), static_cast<double>(d.imag()))};
}

cplx CycleExpansion::d_beta_extended(cplx lambda, std::span<const double> weights) const {
  using xcplx = std::complex<long double>;
  const xcplx l(lambda.real(), lambda.imag());
  xcplx sum = 0.0L;
  for (const Term& t : terms_) {
    double a = 0.0;  // summed as the term periods are
    for (int p : t.primes) a += weights[p];
    if (a != 0.0) sum += static_cast<long double>(a) * static_cast<long double>(t.coefficient) * std::exp(-l * static_cast<long double>(t.period));
  }
  return {static_cast<double>(sum.real()), static_cast<double>(sum.imag())};
}

cplx CycleExpansion::d_beta(cplx lambda, std::span<const double> weights) const {
  CompensatedSum sum;
  for (const Term& t : terms_) {
    double a = 0.0;
    for (int p : t.primes) a += weights[p];
    if (a != 0.0) sum.add(a * t.coefficient * std::exp(-lambda * t.period));
  }
  return sum.result();
}

cplx CycleExpansion::evaluate(cplx lambda, ZetaMode mode, std::span<const double> weights) const {
  switch (mode) {
    case ZetaMode::value:
      return value(lambda);
    case ZetaMode::d_lambda:
      return d_lambda(lambda);
    case ZetaMode::d_beta:
      return d_beta(lambda, weights);
  }
  return {};
}

CycleExpansion build_expansion(std::span<const CycleData> cycles, int band, int n_max) {
  // The binary/ternary grammars have primes of every length, so a missing
  // length signals an incomplete table.
  int max_len = 0;
  for (const auto& c : cycles) max_len = std::max(max_len, c.length);
  if (max_len < n_max) {
    throw std::invalid_argument("orbit table lacks primes of length " + std::to_string(n_max));
  }
  return CycleExpansion(cycles, band, n_max);
}

std::vector<CycleExpansion> build_expansions(std::span<const CycleData> cycles, int k_max,
                                             int n_max) {
  std::vector<CycleExpansion> out;
  for (int k = 1; k <= k_max; ++k) out.push_back(build_expansion(cycles, k, n_max));
  return out;
}

PoleProximity::PoleProximity(int band_, cplx lambda)
    : NumericalError("lambda = (" + std::to_string(lambda.real()) + ", " +
                     std::to_string(lambda.imag()) + ") is at a zero of band " +
                     std::to_string(band_)),
      band(band_) {}

ZetaValue weighted_zeta(std::span<const CycleExpansion> bands, cplx lambda,
                        std::span<const double> weights) {
  cplx total = 0.0;
  double lam_min = std::numeric_limits<double>::infinity();
  int k_max = 0;
  const CycleExpansion* first = nullptr;
  for (const CycleExpansion& e : bands) {
    const cplx v = e.value(lambda);
    const cplx dl = e.d_lambda(lambda);
    if (std::abs(v) <= 1e-8 * std::abs(dl)) throw PoleProximity(e.band(), lambda);
    total += static_cast<double>(e.band()) * (-e.d_beta(lambda, weights) / v);
    lam_min = std::min(lam_min, e.min_abs_stability());
    k_max = std::max(k_max, e.band());
    if (e.band() == 1) first = &e;
  }

  // Every pseudo-cycle term of band k is its band-1 counterpart times at
  // most lam_min^-(k-1).  With B = sum |A t| and S = sum |t| over the
  // non-constant band-1 terms, each dropped band obeys
  // |k F_k| <= k x^(k-1) B / (1 - x^k_max S), x = 1/lam_min.
  double tail = 0.0;
  if (first && std::isfinite(lam_min) && lam_min > 1.0) {
    double b = 0.0, s = 0.0;
    for (const auto& t : first->terms()) {
      if (t.primes.empty()) continue;
      const double mag = std::abs(t.coefficient) * std::exp(-lambda.real() * t.period);
      double a = 0.0;
      for (int p : t.primes) a += weights[p];
      b += std::abs(a) * mag;
      s += mag;
    }
    const double x = 1.0 / lam_min;
    const double xk = std::pow(x, k_max);
    const double denom = 1.0 - xk * s;
    // sum_{k > K} k x^(k-1) = x^K ((K + 1) / (1 - x) + x / (1 - x)^2)
    const double series = xk * ((k_max + 1) / (1.0 - x) + x / ((1.0 - x) * (1.0 - x)));
    tail = denom > 0.0 ? b * series / denom : std::numeric_limits<double>::infinity();
  } else if (!first) {
    tail = std::numeric_limits<double>::infinity();
  }
  return {total, tail};
}

DirectSum weighted_zeta_direct(std::span<const CycleData> cycles, cplx lambda,
                               std::span<const double> weights, int r_max, int n_max) {
  if (r_max < 1) throw std::invalid_argument("r_max must be >= 1");
  CompensatedSum sum;
  double tail = 0.0;
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    const CycleData& c = cycles[i];
    if (c.length > n_max || weights[i] == 0.0) continue;
    const double abs_lam = std::abs(c.stability);
    const double ratio = std::exp(-lambda.real() * c.period) / abs_lam;
    if (!(ratio < 1.0)) {
      throw NumericalError("orbit sum diverges: Re lambda below the abscissa of convergence");
    }
    for (int r = 1; r <= r_max; ++r) {
      const double lr = std::pow(c.stability, r);
      const double det = std::abs((1.0 - lr) * (1.0 - 1.0 / lr));
      sum.add(weights[i] * std::exp(-lambda * (r * c.period)) / det);
    }
    const double damp = 1.0 - 1.0 / abs_lam;
    tail += std::abs(weights[i]) * std::pow(ratio, r_max + 1) / ((1.0 - ratio) * damp * damp);
  }
  return {sum.result(), tail};
}

}  // namespace ruelle
