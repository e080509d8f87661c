#include "ruelle/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ruelle {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt3Half = 0.86602540378443864676;

// cos/sin of 2*pi*k/3 with exact -1/2.
constexpr std::array<double, 3> kCos = {1.0, -0.5, -0.5};
constexpr std::array<double, 3> kSin = {0.0, kSqrt3Half, -kSqrt3Half};

const std::array<Mat2, 6>& group_matrices() {
  static const std::array<Mat2, 6> table = [] {
    std::array<Mat2, 6> t;
    for (int k = 0; k < 3; ++k) {
      Mat2 rot;
      rot << kCos[k], -kSin[k], kSin[k], kCos[k];
      Mat2 mirror;
      mirror << 1.0, 0.0, 0.0, -1.0;
      t[k] = rot;
      t[3 + k] = rot * mirror;
    }
    return t;
  }();
  return table;
}

}  // namespace

GroupElement GroupElement::rotation(int k) { return {k, false}; }

GroupElement GroupElement::reflection_through(int disc) {
  // R(2*pi*k/3) S mirrors across the axis at angle pi*k/3, which passes
  // through disc (2k mod 3); solve for k.
  const int d = ((disc % 3) + 3) % 3;
  return {(2 * d) % 3, true};
}

GroupElement GroupElement::from_permutation(const std::array<int, 3>& image) {
  for (const auto& g : all()) {
    if (g.disc_image(0) == image[0] && g.disc_image(1) == image[1] &&
        g.disc_image(2) == image[2]) {
      return g;
    }
  }
  throw GeometryError("not a permutation of disc labels");
}

const std::array<GroupElement, 6>& GroupElement::all() {
  static const std::array<GroupElement, 6> elements = {
      GroupElement{0, false}, GroupElement{1, false}, GroupElement{2, false},
      GroupElement{0, true},  GroupElement{1, true},  GroupElement{2, true}};
  return elements;
}

int GroupElement::order() const {
  if (reflect_) return 2;
  return k_ == 0 ? 1 : 3;
}

int GroupElement::disc_image(int disc) const {
  const int i = reflect_ ? -disc : disc;
  return (((i + k_) % 3) + 3) % 3;
}

const Mat2& GroupElement::matrix() const {
  return group_matrices()[(reflect_ ? 3 : 0) + k_];
}

GroupElement GroupElement::operator*(const GroupElement& other) const {
  // R(a) S^r R(b) S^s = R(a + (-1)^r b) S^(r xor s)
  const int k = k_ + (reflect_ ? -other.k_ : other.k_);
  return {k, reflect_ != other.reflect_};
}

GroupElement GroupElement::inverse() const {
  if (reflect_) return *this;
  return {-k_, false};
}

DiscSystem::DiscSystem(double d_over_r, double r, int reference_disc)
    : d_over_r_(d_over_r), r_(r), reference_disc_(reference_disc) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw GeometryError("disc radius must be positive");
  }
  if (!(d_over_r > 2.0) || !std::isfinite(d_over_r)) {
    throw GeometryError("d/r must exceed 2 (discs must be disjoint)");
  }
  if (reference_disc < 0 || reference_disc > 2) {
    throw GeometryError("reference disc must be 0, 1 or 2");
  }
  const double circumradius = side() / std::sqrt(3.0);
  for (int j = 0; j < 3; ++j) {
    centers_[j] = circumradius * Vec2(kCos[j], kSin[j]);
  }
}

double DiscSystem::origin_angle(int disc) const {
  return 2.0 * kPi * disc / 3.0 + kPi;
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w < -kPi) w += 2.0 * kPi;
  if (w > kPi) w -= 2.0 * kPi;
  return w;
}

Reflection next_reflection(const DiscSystem& sys, const PhasePoint& x) {
  const double r = sys.radius();
  const Vec2& v = x.direction;
  Reflection best;
  double best_t = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 3; ++j) {
    const Vec2 rel = x.position - sys.center(j);
    const double b = v.dot(rel);
    if (b >= 0.0) continue;  // moving away from (or tangent to) disc j
    const double c = rel.squaredNorm() - r * r;
    const double disc = b * b - c;
    if (disc < 0.0) continue;
    // Stable root: t = c / (-b + sqrt(disc)) avoids cancellation when c ~ 0.
    const double t = c / (-b + std::sqrt(disc));
    if (!(t > 0.0) || t >= best_t) continue;
    best_t = t;
    best.disc = j;
  }
  if (best.disc < 0) return best;

  // Snap the hit point onto the circle so the reflection uses a unit normal.
  const Vec2 normal = (x.position + best_t * v - sys.center(best.disc)).normalized();
  const Vec2 hit = sys.center(best.disc) + r * normal;
  const double vn = v.dot(normal);
  best.flight_length = best_t;
  if (std::abs(vn) < kGrazingTolerance) {
    best.outcome = RayOutcome::grazing;
    best.after = {hit, v};
    return best;
  }
  best.outcome = RayOutcome::hit;
  best.after = {hit, v - 2.0 * vn * normal};
  return best;
}

SectionPoint to_birkhoff(const DiscSystem& sys, const PhasePoint& x, int disc) {
  const double r = sys.radius();
  const Vec2 rel = x.position - sys.center(disc);
  if (std::abs(rel.norm() - r) > 1e-10 * r) {
    throw GeometryError("phase point is not on the disc boundary");
  }
  const double phi = std::atan2(rel.y(), rel.x());
  const Vec2 tangent(-std::sin(phi), std::cos(phi));
  return {wrap_angle(phi - sys.origin_angle(disc)), x.direction.dot(tangent),
          disc};
}

SectionPoint to_birkhoff(const DiscSystem& sys, const PhasePoint& x) {
  return to_birkhoff(sys, x, sys.reference_disc());
}

PhasePoint from_birkhoff(const DiscSystem& sys, const SectionPoint& s) {
  if (!(std::abs(s.p) < 1.0)) {
    throw GeometryError("|p| must be < 1 for an outgoing section point");
  }
  const double phi = sys.origin_angle(s.disc) + s.q;
  const Vec2 normal(std::cos(phi), std::sin(phi));
  const Vec2 tangent(-normal.y(), normal.x());
  return {sys.center(s.disc) + sys.radius() * normal,
          s.p * tangent + std::sqrt(1.0 - s.p * s.p) * normal};
}

bool in_fundamental_wedge(const Vec2& position, double tol) {
  if (position.norm() <= tol) return true;
  const double a = std::atan2(position.y(), position.x());
  return a >= -tol && a <= kPi / 3.0 + tol;
}

Folded fold_to_fundamental(const PhasePoint& x) {
  const Vec2& pos = x.position;
  double a = std::atan2(pos.y(), pos.x());
  if (pos.squaredNorm() == 0.0 || (a >= 0.0 && a <= kPi / 3.0)) {
    return {x, GroupElement::identity()};
  }
  if (a < 0.0) a += 2.0 * kPi;
  // Wedge index j covers (j*pi/3, (j+1)*pi/3]; walls go to the lower wedge.
  int j = static_cast<int>(std::ceil(a / (kPi / 3.0))) - 1;
  j = std::clamp(j, 1, 5);
  const GroupElement g = (j % 2 == 0)
                             ? GroupElement::rotation(j / 2)
                             // mirror axis at angle (j+1)*pi/6 = pi*k/3
                             : GroupElement::reflection_through((2 * ((j + 1) / 2)) % 3);
  return {g.inverse().apply(x), g};
}

}  // namespace ruelle
