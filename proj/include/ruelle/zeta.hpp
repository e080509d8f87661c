#pragma once

// Cycle expansions of the zeta bands
//
//   1/zeta_k(beta, lambda) = prod_p (1 - exp(beta A_p) sigma_p^(k+1) |Lambda_p|^(-k) exp(-lambda T_p))
//
// truncated at total topological length n_max, and the weighted zeta
//
//   Z_f(lambda) = sum_k k * [-d_beta (1/zeta_k) / (1/zeta_k)](lambda) at beta = 0,
//
// which reproduces the orbit sum sum_{p,r} A_p exp(-r lambda T_p) / |det(1 - M_p^r)|
// through 1/|det(1 - M^r)| = sum_k k sigma^(r(k+1)) |Lambda|^(-rk).

#include <complex>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ruelle/orbits.hpp"

namespace ruelle {

using cplx = std::complex<double>;

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Orbit data entering the zeta functions.
struct CycleData {
  double period = 0.0;
  double stability = 0.0;  // signed expanding eigenvalue
  int length = 1;
};

std::vector<CycleData> cycle_data(const OrbitTable& table);

enum class ZetaMode { value, d_lambda, d_beta };

class CycleExpansion {
 public:
  struct Term {
    double coefficient;         // (-1)^m prod sigma^(k+1) |Lambda|^(-k)
    double period;              // T_pi
    int length;                 // total topological length
    std::vector<int> primes;    // indices into the cycle data
  };

  CycleExpansion(std::span<const CycleData> cycles, int band, int n_max);

  int band() const { return band_; }
  int n_max() const { return n_max_; }
  std::size_t prime_count() const { return prime_count_; }
  double min_abs_stability() const { return min_abs_stability_; }
  /// Includes the empty pseudo-cycle (the constant term 1).
  const std::vector<Term>& terms() const { return terms_; }

  cplx value(cplx lambda) const;
  cplx d_lambda(cplx lambda) const;
  /// Value and lambda-derivative with the terms accumulated in long double.
  std::pair<cplx, cplx> value_and_derivative_extended(cplx lambda) const;
  cplx d_beta_extended(cplx lambda, std::span<const double> weights) const;
  /// Derivative in beta at beta = 0 with orbit weights A_p.
  cplx d_beta(cplx lambda, std::span<const double> weights) const;
  /// Value at general beta (for derivative checks).
  cplx value_at(cplx lambda, double beta, std::span<const double> weights) const;

  cplx evaluate(cplx lambda, ZetaMode mode, std::span<const double> weights = {}) const;

 private:
  int band_;
  int n_max_;
  std::size_t prime_count_;
  double min_abs_stability_;
  std::vector<Term> terms_;
};

CycleExpansion build_expansion(std::span<const CycleData> cycles, int band, int n_max);
std::vector<CycleExpansion> build_expansions(std::span<const CycleData> cycles, int k_max,
                                             int n_max);

struct ZetaValue {
  cplx value;
  double tail_bound;  // bound on the dropped bands k > k_max (infinite if unavailable)
};

class PoleProximity : public NumericalError {
 public:
  PoleProximity(int band, cplx lambda);
  int band;
};

/// Z_f(lambda) from the band expansions k = 1..k_max.
ZetaValue weighted_zeta(std::span<const CycleExpansion> bands, cplx lambda,
                        std::span<const double> weights);

struct DirectSum {
  cplx value;
  double tail_bound;
};

/// Literal orbit sum over primes of length <= n_max and repetitions
/// r <= r_max.  Throws NumericalError if the repetition series diverges.
DirectSum weighted_zeta_direct(std::span<const CycleData> cycles, cplx lambda,
                               std::span<const double> weights, int r_max, int n_max);

/// Neumaier-compensated complex accumulator.
class CompensatedSum {
 public:
  void add(cplx x);
  cplx result() const { return {re_ + cre_, im_ + cim_}; }

 private:
  static void add_real(double& s, double& c, double x);
  double re_ = 0.0, im_ = 0.0, cre_ = 0.0, cim_ = 0.0;
};

}  // namespace ruelle
