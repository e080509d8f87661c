#include "ruelle/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "ruelle/parallel.hpp"

namespace ruelle {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxNewton = 100;

struct LengthModel {
  const DiscSystem& sys;
  const std::vector<int>& discs;

  Vec2 point(int i, double theta) const {
    return sys.center(discs[i]) + sys.radius() * Vec2(std::cos(theta), std::sin(theta));
  }

  double length(const Eigen::VectorXd& th) const {
    const int n = static_cast<int>(th.size());
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const int j = (i + 1) % n;
      total += (point(j, th[j]) - point(i, th[i])).norm();
    }
    return total;
  }

  // Gradient and Hessian of the closed-polygon length in the boundary angles.
  void derivatives(const Eigen::VectorXd& th, Eigen::VectorXd& g, Eigen::MatrixXd& H) const {
    const int n = static_cast<int>(th.size());
    const double r = sys.radius();
    g.setZero(n);
    H.setZero(n, n);
    for (int a = 0; a < n; ++a) {
      const int b = (a + 1) % n;
      const Vec2 xa = point(a, th[a]);
      const Vec2 xb = point(b, th[b]);
      const Vec2 d = xb - xa;
      const double ell = d.norm();
      const Vec2 u = d / ell;
      const Mat2 P = Mat2::Identity() - u * u.transpose();
      const Vec2 da = r * Vec2(-std::sin(th[a]), std::cos(th[a]));
      const Vec2 db = r * Vec2(-std::sin(th[b]), std::cos(th[b]));
      const Vec2 dda = -r * Vec2(std::cos(th[a]), std::sin(th[a]));
      const Vec2 ddb = -r * Vec2(std::cos(th[b]), std::sin(th[b]));
      g[a] -= u.dot(da);
      g[b] += u.dot(db);
      H(a, a) += da.dot(P * da) / ell - u.dot(dda);
      H(b, b) += db.dot(P * db) / ell + u.dot(ddb);
      const double cross = -da.dot(P * db) / ell;
      H(a, b) += cross;
      H(b, a) += cross;
    }
  }
};

// Polar angle on disc i pointing at the midpoint of the neighbouring centres.
Eigen::VectorXd centers_polygon_guess(const DiscSystem& sys, const std::vector<int>& discs) {
  const int n = static_cast<int>(discs.size());
  Eigen::VectorXd th(n);
  for (int i = 0; i < n; ++i) {
    const Vec2& prev = sys.center(discs[(i + n - 1) % n]);
    const Vec2& next = sys.center(discs[(i + 1) % n]);
    const Vec2 dir = 0.5 * (prev + next) - sys.center(discs[i]);
    th[i] = std::atan2(dir.y(), dir.x());
  }
  return th;
}

// The monodromy entries grow like |Lambda| while the determinant stays +-1,
// so the product is accumulated in 50-digit precision: in double the
// determinant would carry an error of order eps * Lambda^2.
using Quad = boost::multiprecision::cpp_bin_float_50;

struct QuadMat {
  Quad a = 1, b = 0, c = 0, d = 1;

  // Left-multiply by [[1, L], [0, 1]].
  void flight(double L) {
    a += L * c;
    b += L * d;
  }
  // Left-multiply by -[[1, 0], [k, 1]].
  void bounce(double k) {
    const Quad na = -a, nb = -b;
    c = -(k * a + c);
    d = -(k * b + d);
    a = na;
    b = nb;
  }
};

Monodromy classify(const QuadMat& Q, double wall_sign) {
  Mat2 M;
  M << static_cast<double>(Q.a), static_cast<double>(Q.b), static_cast<double>(Q.c),
      static_cast<double>(Q.d);
  M *= wall_sign;
  const Quad tq = wall_sign * (Q.a + Q.d);
  const Quad dq = Q.a * Q.d - Q.b * Q.c;  // wall_sign^2 = 1
  const Quad disc_q = tq * tq - 4 * dq;
  const double t = static_cast<double>(tq);
  if (!(disc_q > 0)) {
    throw OrbitError("monodromy is not hyperbolic (trace " + std::to_string(t) + ")");
  }
  const Quad lam_q = (tq + (tq >= 0 ? 1 : -1) * sqrt(disc_q)) / 2;
  const double lam = static_cast<double>(lam_q);
  if (!(std::abs(lam) > 1.0 + 1e-6)) {
    throw OrbitError("hyperbolicity violated: |Lambda| <= 1");
  }
  return {M, lam, lam > 0.0 ? 1 : -1, static_cast<double>(dq)};
}

Monodromy compose(const DiscSystem& sys, const PeriodicOrbit& o, int bounces, double wall_sign) {
  const int n = static_cast<int>(o.points.size());
  const double r = sys.radius();
  QuadMat M;
  for (int k = 1; k <= bounces; ++k) {
    const int i = k % n;
    const int prev = (k - 1) % n;
    const double flight = (o.points[i] - o.points[prev]).norm();
    const Vec2 normal = (o.points[i] - sys.center(o.discs[i])) / r;
    const double cos_phi = o.outgoing(i).dot(normal);
    M.flight(flight);
    M.bounce(2.0 / (r * cos_phi));
  }
  return classify(M, wall_sign);
}

}  // namespace

Vec2 PeriodicOrbit::outgoing(int i) const {
  const int n = static_cast<int>(points.size());
  return (points[(i + 1) % n] - points[i]).normalized();
}

Monodromy monodromy_of(const DiscSystem& sys, const PeriodicOrbit& orbit) {
  const double wall_sign = orbit.h.is_reflection() ? -1.0 : 1.0;
  return compose(sys, orbit, orbit.primitive_bounces(), wall_sign);
}

Monodromy closure_monodromy(const DiscSystem& sys, const PeriodicOrbit& orbit) {
  return compose(sys, orbit, static_cast<int>(orbit.points.size()), 1.0);
}

PeriodicOrbit find_orbit(const DiscSystem& sys, const PrimeCycle& cycle) {
  PeriodicOrbit o;
  o.cycle = cycle;
  if (cycle.domain == Domain::fundamental) {
    const UnfoldedItinerary u = unfold(cycle);
    o.discs = u.closure();
    o.h = u.h;
    o.m = u.m;
  } else {
    if (!is_valid_full_word(cycle.symbols)) {
      throw OrbitError("invalid full-domain word " + cycle.word());
    }
    o.discs.assign(cycle.symbols.begin(), cycle.symbols.end());
  }

  const LengthModel model{sys, o.discs};
  const int n = static_cast<int>(o.discs.size());
  Eigen::VectorXd th = centers_polygon_guess(sys, o.discs);
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
  const double tol = 1e-12 * sys.radius();
  bool converged = false;
  for (int it = 0; it < kMaxNewton; ++it) {
    model.derivatives(th, g, H);
    o.newton_iterations = it;
    if (g.lpNorm<Eigen::Infinity>() <= 0.1 * tol) {
      converged = true;
      break;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    Eigen::VectorXd step;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
        (ldlt.vectorD().array() > 0.0).all()) {
      step = -ldlt.solve(g);
    } else {
      step = -g;
    }
    if (g.lpNorm<Eigen::Infinity>() > 1e-8) {
      // Damped step while far from the minimum.
      const double L0 = model.length(th);
      double alpha = 1.0;
      while (alpha > 1e-10 && model.length(th + alpha * step) > L0 + 1e-4 * alpha * g.dot(step)) {
        alpha *= 0.5;
      }
      step *= alpha;
    }
    th += step;
  }
  model.derivatives(th, g, H);
  o.gradient_norm = g.lpNorm<Eigen::Infinity>();
  if (!converged && o.gradient_norm > tol) {
    throw OrbitError("Newton did not converge for " + cycle.word());
  }

  o.angles.resize(n);
  o.points.resize(n);
  for (int i = 0; i < n; ++i) {
    o.angles[i] = wrap_angle(th[i]);
    o.points[i] = model.point(i, th[i]);
  }

  // Every chord must leave its disc outward and reach the next disc first.
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec2 normal = (o.points[i] - sys.center(o.discs[i])) / sys.radius();
    const Vec2 u = o.outgoing(i);
    if (!(u.dot(normal) > kGrazingTolerance)) {
      throw OrbitError("segment enters its own disc; " + cycle.word() + " not realisable");
    }
    const Reflection hit = next_reflection(sys, {o.points[i], u});
    const double chord = (o.points[(i + 1) % n] - o.points[i]).norm();
    if (hit.outcome != RayOutcome::hit || hit.disc != o.discs[(i + 1) % n] ||
        std::abs(hit.flight_length - chord) > 1e-9 * sys.radius()) {
      throw OrbitError("shadowed segment; " + cycle.word() + " not realisable at this d/r");
    }
    total += chord;
  }
  o.period = total / o.m;

  const Monodromy mono = monodromy_of(sys, o);
  o.monodromy = mono.matrix;
  o.monodromy_det = mono.determinant;
  o.stability = mono.stability;
  o.sign = mono.sign;

  const int ref = sys.reference_disc();
  for (int i = 0; i < o.primitive_bounces(); ++i) {
    const PhasePoint x{o.points[i], o.outgoing(i)};
    for (const auto& el : GroupElement::all()) {
      if (el.disc_image(o.discs[i]) != ref) continue;
      o.section_bounces.push_back(to_birkhoff(sys, el.apply(x), ref));
    }
  }
  return o;
}

OrbitTable build_orbit_table(const DiscSystem& sys, Domain domain, int n_max, int workers,
                             std::vector<std::pair<std::string, std::string>>* failures) {
  const std::vector<PrimeCycle> cycles = enumerate_prime_cycles(domain, n_max);
  auto solved = parallel_map(cycles.size(), workers,
                             [&](std::size_t i) -> std::pair<std::optional<PeriodicOrbit>, std::string> {
                               try {
                                 return {find_orbit(sys, cycles[i]), {}};
                               } catch (const OrbitError& e) {
                                 return {std::nullopt, e.what()};
                               }
                             });
  OrbitTable table{sys, domain, n_max, {}};
  for (std::size_t i = 0; i < solved.size(); ++i) {
    if (solved[i].first) {
      table.orbits.push_back(std::move(*solved[i].first));
    } else if (failures) {
      failures->emplace_back(cycles[i].word(), solved[i].second);
    }
  }
  return table;
}

// ---- weights --------------------------------------------------------------

double section_gaussian(double dq, double dp, double sigma) {
  const double inv = 1.0 / (2.0 * sigma * sigma);
  const double base = wrap_angle(dq);
  double sum = 0.0;
  for (int j = -1; j <= 1; ++j) {
    const double q = base + 2.0 * kPi * j;
    const double e = -(q * q + dp * dp) * inv;
    if (e > -745.0) sum += std::exp(e);
  }
  return sum * inv / kPi;
}

bool gaussian_support_clear(const DiscSystem& sys, const PhaseGaussian& g) {
  for (int j = 0; j < 3; ++j) {
    if ((g.center - sys.center(j)).norm() <= sys.radius() + kSupportWidths * g.width) {
      return false;
    }
  }
  return true;
}

namespace {

struct Segment {
  Vec2 start;
  Vec2 dir;
  double length;
};

double angular_factor(const PhaseGaussian& g, const Vec2& dir) {
  if (g.angle_width <= 0.0) return 1.0;
  const double d = wrap_angle(std::atan2(dir.y(), dir.x()) - g.angle);
  return std::exp(-d * d / (2.0 * g.angle_width * g.angle_width));
}

// Integral over [0, L] of h(s) * exp(-|x(s) - c|^2 / 2w^2), split at the
// point of closest approach so narrow peaks are never straddled blindly.
template <class Integrand>
double segment_integral(const Segment& seg, const PhaseGaussian& g, Integrand&& h) {
  using boost::math::quadrature::gauss_kronrod;
  const double w = g.width;
  const double s_star = (g.center - seg.start).dot(seg.dir);
  const double miss = (seg.start + s_star * seg.dir - g.center).norm();
  if (miss > 40.0 * w) return 0.0;  // exp(-800) underflows
  std::vector<double> breaks = {0.0, seg.length};
  for (double k : {-6.0, -3.0, 0.0, 3.0, 6.0}) {
    const double s = s_star + k * w;
    if (s > 0.0 && s < seg.length) breaks.push_back(s);
  }
  std::sort(breaks.begin(), breaks.end());
  auto integrand = [&](double s) {
    const Vec2 x = seg.start + s * seg.dir;
    const double e = -(x - g.center).squaredNorm() / (2.0 * w * w);
    return e > -745.0 ? h(x) * std::exp(e) : 0.0;
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] <= breaks[i]) continue;
    double err = 0.0;
    total += gauss_kronrod<double, 15>::integrate(integrand, breaks[i], breaks[i + 1], 10,
                                                  1e-14, &err);
  }
  return total;
}

std::vector<Segment> primitive_segments(const PeriodicOrbit& o) {
  const int n = static_cast<int>(o.points.size());
  std::vector<Segment> segs;
  for (int i = 0; i < o.primitive_bounces(); ++i) {
    const Vec2 d = o.points[(i + 1) % n] - o.points[i];
    segs.push_back({o.points[i], d.normalized(), d.norm()});
  }
  return segs;
}

template <class PerSegment>
double symmetrised_average(const PeriodicOrbit& o, PerSegment&& per_segment) {
  const auto& group = GroupElement::all();
  double total = 0.0;
  for (const Segment& seg : primitive_segments(o)) {
    for (const auto& el : group) {
      total += per_segment(Segment{el.apply(seg.start), el.apply(seg.dir), seg.length});
    }
  }
  return total / static_cast<double>(group.size());
}

}  // namespace

double orbit_weight(const DiscSystem& sys, const PeriodicOrbit& orbit, const WeightSpec& f) {
  return std::visit(
      [&](const auto& w) -> double {
        using T = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<T, ConstantOne>) {
          return orbit.period;
        } else if constexpr (std::is_same_v<T, PhaseGaussian>) {
          return w.amplitude * symmetrised_average(orbit, [&](const Segment& seg) {
                   const double ang = angular_factor(w, seg.dir);
                   if (ang == 0.0) return 0.0;
                   return ang * segment_integral(seg, w, [](const Vec2&) { return 1.0; });
                 });
        } else if constexpr (std::is_same_v<T, FlowDerivative>) {
          const PhaseGaussian& g = w.of;
          if (!gaussian_support_clear(sys, g)) {
            throw std::invalid_argument("flow derivative weight: Gaussian support touches a disc");
          }
          return g.amplitude * symmetrised_average(orbit, [&](const Segment& seg) {
                   const double ang = angular_factor(g, seg.dir);
                   if (ang == 0.0) return 0.0;
                   // v . grad_x exp(-|x-c|^2/2w^2) = -<x - c, v>/w^2 * exp(...)
                   return ang * segment_integral(seg, g, [&](const Vec2& x) {
                            return -(x - g.center).dot(seg.dir) / (g.width * g.width);
                          });
                 });
        } else if constexpr (std::is_same_v<T, SectionComb>) {
          double total = 0.0;
          for (const SectionPoint& b : orbit.section_bounces) {
            total += section_gaussian(b.q - w.q0, b.p - w.p0, w.sigma);
          }
          return total;
        } else {
          double total = 0.0;
          for (const auto& [coef, term] : w.terms) total += coef * orbit_weight(sys, orbit, term);
          return total;
        }
      },
      f.kind);
}

std::vector<double> orbit_weights(const OrbitTable& table, const WeightSpec& f) {
  std::vector<double> out;
  out.reserve(table.orbits.size());
  for (const auto& o : table.orbits) out.push_back(orbit_weight(table.system, o, f));
  return out;
}

}  // namespace ruelle
