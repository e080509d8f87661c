#pragma once

// Symmetric 3-disc scatterer: discs, billiard flow primitives, Birkhoff
// coordinates and the C3v symmetry folding.

#include <array>
#include <optional>
#include <stdexcept>

#include <Eigen/Dense>

namespace ruelle {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point of the unit sphere bundle: position plus unit direction.
struct PhasePoint {
  Vec2 position = Vec2::Zero();
  Vec2 direction = Vec2::UnitX();
};

/// Birkhoff coordinates on the boundary of one disc. q is the arc
/// coordinate in [-pi, pi] measured counterclockwise from the point closest
/// to the triangle centroid, p the tangential velocity component.
struct SectionPoint {
  double q = 0.0;
  double p = 0.0;
  int disc = 0;
};

/// Element of C3v acting on the plane (centroid at the origin) and on disc
/// labels.  Stored as R(2*pi*k/3) * S^reflect where S mirrors across the
/// axis through disc 0.
class GroupElement {
 public:
  GroupElement() = default;

  static GroupElement identity() { return {}; }
  /// Rotation by 2*pi*k/3; advances disc labels by k.
  static GroupElement rotation(int k);
  /// Mirror across the axis through the centre of `disc`.
  static GroupElement reflection_through(int disc);
  /// The unique element realising a permutation of disc labels.
  static GroupElement from_permutation(const std::array<int, 3>& image);
  static const std::array<GroupElement, 6>& all();

  bool is_reflection() const { return reflect_; }
  int rotation_index() const { return k_; }
  int order() const;
  double determinant() const { return reflect_ ? -1.0 : 1.0; }
  int disc_image(int disc) const;
  const Mat2& matrix() const;

  Vec2 apply(const Vec2& v) const { return matrix() * v; }
  PhasePoint apply(const PhasePoint& x) const {
    return {apply(x.position), apply(x.direction)};
  }

  /// Composition: (a * b)(x) = a(b(x)).
  GroupElement operator*(const GroupElement& other) const;
  GroupElement inverse() const;

  bool operator==(const GroupElement& other) const = default;

 private:
  GroupElement(int k, bool reflect) : k_(((k % 3) + 3) % 3), reflect_(reflect) {}

  int k_ = 0;
  bool reflect_ = false;
};

enum class RayOutcome { hit, escape, grazing };

struct Reflection {
  RayOutcome outcome = RayOutcome::escape;
  int disc = -1;
  double flight_length = 0.0;
  PhasePoint after;  // on the hit disc, reflected direction
};

class DiscSystem {
 public:
  explicit DiscSystem(double d_over_r, double r = 1.0, int reference_disc = 0);

  double d_over_r() const { return d_over_r_; }
  double radius() const { return r_; }
  double side() const { return d_over_r_ * r_; }
  int reference_disc() const { return reference_disc_; }
  const Vec2& center(int disc) const { return centers_.at(disc); }

  /// The binary fundamental-domain coding is only complete for well
  /// separated discs.
  bool grammar_warning() const { return d_over_r_ < 2.5; }

  /// Birkhoff origin angle of `disc` (polar angle around its centre).
  double origin_angle(int disc) const;

 private:
  double d_over_r_;
  double r_;
  int reference_disc_;
  std::array<Vec2, 3> centers_;
};

inline constexpr double kGrazingTolerance = 1e-12;

/// Follow the free flight from x to the next specular reflection.
Reflection next_reflection(const DiscSystem& sys, const PhasePoint& x);

SectionPoint to_birkhoff(const DiscSystem& sys, const PhasePoint& x, int disc);
SectionPoint to_birkhoff(const DiscSystem& sys, const PhasePoint& x);

/// Outgoing phase point for a section point; |p| must be < 1.
PhasePoint from_birkhoff(const DiscSystem& sys, const SectionPoint& s);

struct Folded {
  PhasePoint point;
  GroupElement element;  // element.apply(point) == original
};

/// Fold into the wedge 0 <= polar angle <= pi/3 around the centroid.
/// Points on a wall (and the centroid) resolve to the lowest-index wedge,
/// so the closed fundamental wedge maps to itself with the identity.
Folded fold_to_fundamental(const PhasePoint& x);

bool in_fundamental_wedge(const Vec2& position, double tol = 1e-12);

/// Wrap an angle to [-pi, pi].
double wrap_angle(double a);

}  // namespace ruelle
