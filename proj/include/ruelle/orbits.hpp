#pragma once

// Periodic orbits of the 3-disc billiard realised from symbolic words,
// their stabilities, and orbit integrals of weight functions.

#include <memory>
#include <stdexcept>
#include <variant>
#include <vector>

#include "ruelle/geometry.hpp"
#include "ruelle/symbolic.hpp"

namespace ruelle {

class OrbitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PeriodicOrbit {
  PrimeCycle cycle;
  std::vector<int> discs;        // unfolded closed itinerary (m * n_p bounces)
  std::vector<double> angles;    // polar angle of each bounce on its disc
  std::vector<Vec2> points;      // bounce positions
  double period = 0.0;           // primitive period (closure length / m)
  Mat2 monodromy = Mat2::Identity();
  double monodromy_det = 1.0;    // accurate determinant of the monodromy
  double stability = 0.0;        // expanding eigenvalue, signed
  int sign = 1;
  GroupElement h;
  int m = 1;
  double gradient_norm = 0.0;    // max-norm of the length gradient at the solution
  int newton_iterations = 0;
  std::vector<SectionPoint> section_bounces;  // C3v images on the reference disc

  int length() const { return cycle.length(); }
  /// Number of bounces making up one primitive period.
  int primitive_bounces() const { return cycle.length(); }
  /// Outgoing direction after bounce i of the closure.
  Vec2 outgoing(int i) const;
};

/// Realise a prime cycle by minimising the total chord length over the
/// boundary angles of its unfolded itinerary.
PeriodicOrbit find_orbit(const DiscSystem& sys, const PrimeCycle& cycle);

struct Monodromy {
  Mat2 matrix;
  double stability;    // expanding eigenvalue with sign
  int sign;
  double determinant;  // from the extended-precision product
};

/// Transverse linearised return map over one primitive period in
/// (displacement, angle) coordinates.  For fundamental cycles the wall
/// reflections of the folded orbit act as -I.
Monodromy monodromy_of(const DiscSystem& sys, const PeriodicOrbit& orbit);

/// Monodromy of the whole closed itinerary (m primitive periods).
Monodromy closure_monodromy(const DiscSystem& sys, const PeriodicOrbit& orbit);

struct OrbitTable {
  DiscSystem system;
  Domain domain;
  int n_max;
  std::vector<PeriodicOrbit> orbits;  // sorted by (length, word)
};

/// Solve every prime cycle up to n_max with `workers` threads.  Cycles that
/// cannot be realised are reported through `failures` (word, message).
OrbitTable build_orbit_table(const DiscSystem& sys, Domain domain, int n_max,
                             int workers = 1,
                             std::vector<std::pair<std::string, std::string>>* failures = nullptr);

// ---- weights --------------------------------------------------------------

struct ConstantOne {};

/// exp(-|x - c|^2 / (2 w^2)) * exp(-wrap(theta - theta_c)^2 / (2 w_theta^2))
/// with theta the direction angle; w_theta <= 0 drops the angular factor.
struct PhaseGaussian {
  Vec2 center = Vec2::Zero();
  double angle = 0.0;
  double width = 0.1;
  double angle_width = 0.0;
  double amplitude = 1.0;
};

struct FlowDerivative {
  PhaseGaussian of;
};

/// Gaussian comb on the Birkhoff section of the reference disc.
struct SectionComb {
  double q0 = 0.0;
  double p0 = 0.0;
  double sigma = 0.1;
};

struct WeightSpec;

struct LinearCombination {
  std::vector<std::pair<double, WeightSpec>> terms;
};

struct WeightSpec {
  std::variant<ConstantOne, PhaseGaussian, FlowDerivative, SectionComb, LinearCombination>
      kind;
};

/// Widths (in units of `width`) of the ball that must avoid every disc for
/// the flow derivative of a Gaussian to telescope exactly.
inline constexpr double kSupportWidths = 8.0;

bool gaussian_support_clear(const DiscSystem& sys, const PhaseGaussian& g);

/// Integral of the weight over one primitive period of the orbit.
/// Phase-space Gaussians act through their C3v average (1/6) sum_g f(g x), so
/// a constant f gives T_p like ConstantOne.  Section combs accumulate every
/// group image of every bounce on the reference disc.
double orbit_weight(const DiscSystem& sys, const PeriodicOrbit& orbit, const WeightSpec& f);

std::vector<double> orbit_weights(const OrbitTable& table, const WeightSpec& f);

/// Periodic Gaussian on the section with three images in q.
double section_gaussian(double dq, double dp, double sigma);

}  // namespace ruelle
