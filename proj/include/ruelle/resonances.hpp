#pragma once

// Zeros of the zeta bands (Pollicott-Ruelle resonances) and residues /
// Laurent coefficients of the weighted zeta function at them.

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ruelle/zeta.hpp"

namespace ruelle {

struct Rect {
  double re0 = 0.0, re1 = 0.0, im0 = 0.0, im1 = 0.0;

  bool empty() const { return !(re1 > re0) || !(im1 > im0); }
  bool contains(cplx z, double tol = 0.0) const {
    return z.real() >= re0 - tol && z.real() <= re1 + tol && z.imag() >= im0 - tol &&
           z.imag() <= im1 + tol;
  }
  bool conjugation_symmetric() const { return std::abs(im0 + im1) <= 1e-12 * (1.0 + im1); }
};

struct Resonance {
  cplx value;
  int band = 1;
  int order = 1;           // multiplicity from the winding number
  double residual = 0.0;   // |1/zeta_k(value)|
  double derivative = 0.0; // |d_lambda 1/zeta_k(value)|
  int n_max = 0;
};

struct ScanOptions {
  double cell = 0.25;
  int workers = 1;
  int max_depth = 10;  // cell subdivisions while isolating zeros
};

struct ScanLog {
  std::vector<std::string> messages;
  int redissections = 0;
};

/// Argument-principle scan of one band over a rectangle, Newton-refined.
std::vector<Resonance> scan_band(const CycleExpansion& band, const Rect& rect,
                                 const ScanOptions& opts = {}, ScanLog* log = nullptr);

/// All bands; sorted by (Im, Re, band).
std::vector<Resonance> scan(std::span<const CycleExpansion> bands, const Rect& rect,
                            const ScanOptions& opts = {}, ScanLog* log = nullptr);

/// Winding number of 1/zeta_k along the boundary of `rect`; throws if a zero
/// sits within 1e-6 of the boundary.
int zero_count(const CycleExpansion& band, const Rect& rect);

/// Newton iteration on 1/zeta_k from `seed`.
std::optional<Resonance> refine_zero(const CycleExpansion& band, cplx seed);

/// Res Z_f at a simple zero by the ratio -k0 d_beta / d_lambda.
cplx residue(std::span<const CycleExpansion> bands, const Resonance& res,
             std::span<const double> weights);

struct ResidueCoefficients {
  std::vector<cplx> per_prime;  // c_p = sum over pseudo-cycles containing p
  cplx denominator;             // d_lambda 1/zeta_k0 at the zero
  int band = 1;

  /// -k0 * sum_p A_p c_p / D
  cplx residue(std::span<const double> weights) const;
};

ResidueCoefficients residue_coefficients(std::span<const CycleExpansion> bands,
                                         const Resonance& res);

struct LaurentResult {
  cplx value;
  int nodes = 0;
  double richardson_difference = 0.0;
  bool reliable = false;
};

/// (2 pi i)^-1 * contour integral of Z_f(lambda) (lambda - lambda0)^order over
/// the circle |lambda - lambda0| = rho (trapezoidal rule, N doubled until
/// consecutive results agree).
LaurentResult laurent_coefficient(std::span<const CycleExpansion> bands, cplx lambda0, int order,
                                  std::span<const double> weights, double rho, int nodes = 64);

/// min(0.1, half the distance to the nearest other zero).
double default_contour_radius(cplx lambda0, std::span<const Resonance> zeros);

}  // namespace ruelle
