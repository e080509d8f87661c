#include "ruelle/resonances.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "ruelle/parallel.hpp"

namespace ruelle {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNearZero = 1e-6;  // Newton distance that counts as "on the edge"
constexpr int kMaxEdgeDepth = 40;

struct Sample {
  cplx z;
  cplx f;
};

struct EdgeArg {
  double delta = 0.0;
  bool near_zero = false;
};

class EdgeTracker {
 public:
  explicit EdgeTracker(const CycleExpansion& e) : e_(e) {
    double t_max = 0.0;
    for (const auto& t : e.terms()) t_max = std::max(t_max, t.period);
    step_ = t_max > 0.0 ? std::min(0.05, 0.3 / t_max) : 0.05;
  }

  EdgeArg track(cplx a, cplx b) const {
    EdgeArg out;
    const int n = std::max(2, static_cast<int>(std::ceil(std::abs(b - a) / step_)));
    Sample prev = sample(a, out);
    for (int i = 1; i <= n; ++i) {
      const cplx z = (i == n) ? b : a + (b - a) * (static_cast<double>(i) / n);
      const Sample next = sample(z, out);
      refine(prev, next, 0, out);
      prev = next;
    }
    return out;
  }

 private:
  Sample sample(cplx z, EdgeArg& out) const {
    const cplx f = e_.value(z);
    const cplx df = e_.d_lambda(z);
    if (std::abs(f) < kNearZero * std::abs(df)) out.near_zero = true;
    return {z, f};
  }

  void refine(const Sample& a, const Sample& b, int depth, EdgeArg& out) const {
    const double d = std::arg(b.f / a.f);
    if (std::abs(d) <= kPi / 4.0) {
      out.delta += d;
      return;
    }
    if (depth >= kMaxEdgeDepth) {
      out.near_zero = true;
      out.delta += d;
      return;
    }
    const Sample mid = sample(0.5 * (a.z + b.z), out);
    refine(a, mid, depth + 1, out);
    refine(mid, b, depth + 1, out);
  }

  const CycleExpansion& e_;
  double step_;
};

struct Winding {
  int count = 0;
  bool near_zero = false;
};

Winding rect_winding(const EdgeTracker& tr, const Rect& r) {
  const cplx bl(r.re0, r.im0), br(r.re1, r.im0), tr_(r.re1, r.im1), tl(r.re0, r.im1);
  double total = 0.0;
  bool flag = false;
  for (auto [a, b] : std::array<std::pair<cplx, cplx>, 4>{{{bl, br}, {br, tr_}, {tr_, tl}, {tl, bl}}}) {
    const EdgeArg e = tr.track(a, b);
    total += e.delta;
    flag = flag || e.near_zero;
  }
  return {static_cast<int>(std::lround(total / (2.0 * kPi))), flag};
}

double term_scale(const CycleExpansion& e, cplx z) {
  double s = 0.0;
  for (const auto& t : e.terms()) s += std::abs(t.coefficient) * std::exp(-z.real() * t.period);
  return s;
}

class ZeroLocator {
 public:
  ZeroLocator(const CycleExpansion& e, int max_depth) : e_(e), tracker_(e), max_depth_(max_depth) {}

  const EdgeTracker& tracker() const { return tracker_; }

  void locate(const Rect& cell, int winding, int depth, std::vector<Resonance>& out,
              std::vector<std::string>& failures) const {
    if (winding <= 0) return;
    const double size = std::max(cell.re1 - cell.re0, cell.im1 - cell.im0);
    if (winding == 1 || depth >= max_depth_) {
      const cplx center(0.5 * (cell.re0 + cell.re1), 0.5 * (cell.im0 + cell.im1));
      if (auto z = refine_zero(e_, center); z && cell.contains(z->value, 1e-9 * (1.0 + size))) {
        z->order = winding;
        out.push_back(*z);
        return;
      }
      if (depth >= max_depth_) {
        failures.push_back(fmt::format("band {}: unresolved zero in cell [{}, {}]x[{}, {}]i",
                                       e_.band(), cell.re0, cell.re1, cell.im0, cell.im1));
        return;
      }
    }
    for (double s : {0.5, 0.46, 0.53}) {
      const double xm = cell.re0 + s * (cell.re1 - cell.re0);
      const double ym = cell.im0 + s * (cell.im1 - cell.im0);
      const std::array<Rect, 4> sub = {Rect{cell.re0, xm, cell.im0, ym}, Rect{xm, cell.re1, cell.im0, ym},
                                       Rect{cell.re0, xm, ym, cell.im1}, Rect{xm, cell.re1, ym, cell.im1}};
      std::array<int, 4> w{};
      bool ok = true;
      int total = 0;
      for (int i = 0; i < 4 && ok; ++i) {
        const Winding wi = rect_winding(tracker_, sub[i]);
        ok = !wi.near_zero;
        w[i] = wi.count;
        total += wi.count;
      }
      if (!ok || total != winding) continue;
      for (int i = 0; i < 4; ++i) locate(sub[i], w[i], depth + 1, out, failures);
      return;
    }
    failures.push_back(fmt::format("band {}: could not dissect cell [{}, {}]x[{}, {}]i", e_.band(),
                                   cell.re0, cell.re1, cell.im0, cell.im1));
  }

 private:
  const CycleExpansion& e_;
  EdgeTracker tracker_;
  int max_depth_;
};

struct Grid {
  std::vector<double> xs, ys;
};

Grid make_grid(const Rect& rect, double cell, double offset) {
  Grid g;
  auto axis = [&](double lo, double hi, bool make_odd) {
    std::vector<double> v;
    if (offset == 0.0) {
      int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / cell - 1e-9)));
      if (make_odd && n % 2 == 0) ++n;
      for (int i = 0; i <= n; ++i) v.push_back(lo + (hi - lo) * i / n);
    } else {
      const double start = lo - offset * cell;
      const int n = static_cast<int>(std::ceil((hi - start) / cell)) + 1;
      for (int i = 0; i <= n; ++i) v.push_back(start + i * cell);
    }
    return v;
  };
  g.xs = axis(rect.re0, rect.re1, false);
  g.ys = axis(rect.im0, rect.im1, rect.conjugation_symmetric());
  return g;
}

}  // namespace

std::optional<Resonance> refine_zero(const CycleExpansion& e, cplx seed) {
  // The expansion has real coefficients, so zeros below the axis are
  // mirrored from above; conjugate pairs then agree exactly.
  if (seed.imag() < 0.0) {
    auto r = refine_zero(e, std::conj(seed));
    if (r) r->value = std::conj(r->value);
    return r;
  }
  cplx z = seed;
  for (int it = 0; it < 100; ++it) {
    const cplx f = e.value(z);
    const cplx d = e.d_lambda(z);
    if (f == 0.0) break;
    if (d == 0.0 || !std::isfinite(std::abs(f / d))) return std::nullopt;
    const cplx step = f / d;
    z -= step;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return std::nullopt;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) break;
  }
  // A stalled iteration is judged by its residual below.

  // The expansion is real on the real axis; pin numerically real zeros there.
  if (std::abs(z.imag()) < 1e-8) {
    double x = z.real();
    for (int it = 0; it < 100; ++it) {
      const double f = e.value(x).real();
      const double d = e.d_lambda(x).real();
      if (f == 0.0 || d == 0.0) break;
      const double step = f / d;
      x -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    if (std::abs(x - z) < 1e-8) z = x;
  }

  // Far left the terms cancel heavily and double evaluation stalls at a
  // residual of eps times the term scale; polish in extended precision.
  auto [fz, dz] = e.value_and_derivative_extended(z);
  for (int it = 0; it < 8 && fz != 0.0 && dz != 0.0; ++it) {
    cplx step = fz / dz;
    if (z.imag() == 0.0) step = step.real();
    const cplx next = z - step;
    const auto [fn, dn] = e.value_and_derivative_extended(next);
    if (!(std::abs(fn) < std::abs(fz))) break;
    z = next;
    fz = fn;
    dz = dn;
  }

  Resonance r;
  r.value = z;
  r.band = e.band();
  r.n_max = e.n_max();
  r.residual = std::abs(fz);
  r.derivative = std::abs(dz);
  const double scale = term_scale(e, z);
  if (!(r.residual <= 1e-10 * r.derivative) && !(r.residual <= 1e-12) &&
      !(r.residual <= 256.0 * std::numeric_limits<double>::epsilon() * scale)) {
    return std::nullopt;
  }
  return r;
}

int zero_count(const CycleExpansion& band, const Rect& rect) {
  const EdgeTracker tracker(band);
  const Winding w = rect_winding(tracker, rect);
  if (w.near_zero) throw NumericalError("zero within 1e-6 of the contour");
  return w.count;
}

std::vector<Resonance> scan_band(const CycleExpansion& band, const Rect& rect, const ScanOptions& opts,
                                 ScanLog* log) {
  if (!(opts.cell > 0.0) || opts.cell > 0.5) throw std::invalid_argument("scan cell size must be in (0, 0.5]");
  std::vector<Resonance> found;
  if (rect.empty()) return found;
  const ZeroLocator locator(band, opts.max_depth);
  const EdgeTracker& tracker = locator.tracker();

  constexpr std::array<double, 4> kOffsets = {0.0, 0.381966011250105, 0.618033988749895,
                                              0.236067977499790};
  for (std::size_t attempt = 0; attempt < kOffsets.size(); ++attempt) {
    const Grid g = make_grid(rect, opts.cell, kOffsets[attempt]);
    const std::size_t nx = g.xs.size() - 1, ny = g.ys.size() - 1;
    // Horizontal edges (nx * (ny + 1)) then vertical edges ((nx + 1) * ny).
    const std::size_t n_h = nx * (ny + 1), n_v = (nx + 1) * ny;
    const auto edges = parallel_map(n_h + n_v, opts.workers, [&](std::size_t k) {
      if (k < n_h) {
        const std::size_t i = k % nx, j = k / nx;
        return tracker.track({g.xs[i], g.ys[j]}, {g.xs[i + 1], g.ys[j]});
      }
      const std::size_t kv = k - n_h;
      const std::size_t i = kv % (nx + 1), j = kv / (nx + 1);
      return tracker.track({g.xs[i], g.ys[j]}, {g.xs[i], g.ys[j + 1]});
    });
    auto H = [&](std::size_t i, std::size_t j) -> const EdgeArg& { return edges[j * nx + i]; };
    auto V = [&](std::size_t i, std::size_t j) -> const EdgeArg& { return edges[n_h + j * (nx + 1) + i]; };

    struct Cell {
      Rect rect;
      int winding;
    };
    std::vector<Cell> cells;
    bool flagged = false;
    for (std::size_t j = 0; j < ny && !flagged; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        const bool near = H(i, j).near_zero || H(i, j + 1).near_zero || V(i, j).near_zero ||
                          V(i + 1, j).near_zero;
        const double total = H(i, j).delta + V(i + 1, j).delta - H(i, j + 1).delta - V(i, j).delta;
        const int w = static_cast<int>(std::lround(total / (2.0 * kPi)));
        const Rect cell{g.xs[i], g.xs[i + 1], g.ys[j], g.ys[j + 1]};
        if (near && attempt + 1 < kOffsets.size()) {
          flagged = true;
          break;
        }
        if (near && log) {
          log->messages.push_back(fmt::format("band {}: zero on boundary of cell [{}, {}]x[{}, {}]i",
                                              band.band(), cell.re0, cell.re1, cell.im0, cell.im1));
        }
        if (w > 0) cells.push_back({cell, w});
      }
    }
    if (flagged) {
      if (log) ++log->redissections;
      continue;
    }

    auto per_cell = parallel_map(cells.size(), opts.workers, [&](std::size_t c) {
      std::pair<std::vector<Resonance>, std::vector<std::string>> res;
      locator.locate(cells[c].rect, cells[c].winding, 0, res.first, res.second);
      return res;
    });
    for (auto& [zeros, failures] : per_cell) {
      found.insert(found.end(), zeros.begin(), zeros.end());
      if (log) log->messages.insert(log->messages.end(), failures.begin(), failures.end());
    }
    break;
  }

  std::vector<Resonance> out;
  for (const auto& z : found) {
    if (!rect.contains(z.value, 1e-9)) continue;
    const bool dup = std::any_of(out.begin(), out.end(),
                                 [&](const Resonance& o) { return std::abs(o.value - z.value) < 1e-8; });
    if (!dup) out.push_back(z);
  }
  std::sort(out.begin(), out.end(), [](const Resonance& a, const Resonance& b) {
    if (a.value.imag() != b.value.imag()) return a.value.imag() < b.value.imag();
    return a.value.real() < b.value.real();
  });
  return out;
}

std::vector<Resonance> scan(std::span<const CycleExpansion> bands, const Rect& rect,
                            const ScanOptions& opts, ScanLog* log) {
  std::vector<Resonance> all;
  for (const auto& b : bands) {
    auto z = scan_band(b, rect, opts, log);
    all.insert(all.end(), z.begin(), z.end());
  }
  std::stable_sort(all.begin(), all.end(), [](const Resonance& a, const Resonance& b) {
    if (a.value.imag() != b.value.imag()) return a.value.imag() < b.value.imag();
    if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
    return a.band < b.band;
  });
  return all;
}

namespace {

const CycleExpansion& simple_zero_band(std::span<const CycleExpansion> bands, const Resonance& res) {
  if (res.order != 1) {
    throw NumericalError("residue ratio formula needs a simple zero; use laurent_coefficient");
  }
  const CycleExpansion* target = nullptr;
  for (const auto& b : bands) {
    if (b.band() == res.band) {
      target = &b;
      continue;
    }
    const cplx v = b.value(res.value);
    if (std::abs(v) < 1e-6 * std::abs(b.d_lambda(res.value))) {
      throw NumericalError(fmt::format("band {} also vanishes at the resonance", b.band()));
    }
  }
  if (!target) throw std::invalid_argument("resonance band not among the expansions");
  return *target;
}

}  // namespace

cplx residue(std::span<const CycleExpansion> bands, const Resonance& res, std::span<const double> weights) {
  const CycleExpansion& e = simple_zero_band(bands, res);
  // Extended accumulation: far left the sums cancel heavily.
  return -static_cast<double>(e.band()) * e.d_beta_extended(res.value, weights) /
         e.value_and_derivative_extended(res.value).second;
}

cplx ResidueCoefficients::residue(std::span<const double> weights) const {
  CompensatedSum sum;
  for (std::size_t p = 0; p < per_prime.size(); ++p) {
    if (weights[p] != 0.0) sum.add(weights[p] * per_prime[p]);
  }
  return -static_cast<double>(band) * sum.result() / denominator;
}

ResidueCoefficients residue_coefficients(std::span<const CycleExpansion> bands, const Resonance& res) {
  const CycleExpansion& e = simple_zero_band(bands, res);
  std::size_t n = 0;
  for (const auto& t : e.terms()) {
    for (int p : t.primes) n = std::max<std::size_t>(n, p + 1);
  }
  using xcplx = std::complex<long double>;
  const xcplx l(res.value.real(), res.value.imag());
  std::vector<xcplx> sums(n, 0.0L);
  for (const auto& t : e.terms()) {
    const xcplx w = static_cast<long double>(t.coefficient) * std::exp(-l * static_cast<long double>(t.period));
    for (int p : t.primes) sums[p] += w;
  }
  ResidueCoefficients out;
  out.band = e.band();
  out.denominator = e.value_and_derivative_extended(res.value).second;
  out.per_prime.reserve(n);
  for (const auto& s : sums) out.per_prime.emplace_back(static_cast<double>(s.real()), static_cast<double>(s.imag()));
  return out;
}

LaurentResult laurent_coefficient(std::span<const CycleExpansion> bands, cplx lambda0, int order,
                                  std::span<const double> weights, double rho, int nodes) {
  if (order < 0) throw std::invalid_argument("Laurent order must be >= 0");
  if (nodes < 32) throw std::invalid_argument("contour needs at least 32 nodes");
  if (!(rho > 0.0)) throw std::invalid_argument("contour radius must be positive");

  constexpr int kMaxNodes = 1 << 14;
  std::vector<cplx> z_values;  // Z_f at the nodes, refined by interleaving

  auto node = [&](int j, int n) { return lambda0 + rho * std::polar(1.0, 2.0 * kPi * j / n); };
  auto eval = [&](cplx z) {
    cplx total = 0.0;
    for (const auto& e : bands) {
      total += static_cast<double>(e.band()) * (-e.d_beta(z, weights) / e.value(z));
    }
    return total;
  };
  auto integrate = [&](int n) {
    CompensatedSum sum;
    for (int j = 0; j < n; ++j) {
      const cplx dz = node(j, n) - lambda0;
      sum.add(z_values[j] * std::pow(dz, order) * dz);
    }
    return sum.result() / static_cast<double>(n);
  };

  auto winding = [&](const CycleExpansion& e, double radius, int n) {
    double total = 0.0;
    cplx prev = e.value(lambda0 + radius);
    for (int j = 1; j <= n; ++j) {
      const cplx cur = e.value(lambda0 + radius * std::polar(1.0, 2.0 * kPi * j / n));
      total += std::arg(cur / prev);
      prev = cur;
    }
    return std::lround(total / (2.0 * kPi));
  };
  // Only zeros sitting at lambda0 itself may lie inside the contour: the
  // winding on the contour must match the one on a much smaller circle.
  auto check_enclosed = [&](int n) {
    for (const auto& e : bands) {
      const long outer = winding(e, rho, n);
      const long inner = winding(e, 1e-3 * rho, 64);
      if (outer != inner) {
        throw NumericalError(fmt::format("contour around ({}, {}) encloses {} other zero(s) of band {}",
                                         lambda0.real(), lambda0.imag(), outer - inner, e.band()));
      }
    }
  };

  int n = nodes;
  for (int j = 0; j < n; ++j) z_values.push_back(eval(node(j, n)));
  check_enclosed(std::max(n, 256));
  cplx prev = integrate(n);
  LaurentResult out;
  while (true) {
    std::vector<cplx> refined(2 * n);
    for (int j = 0; j < n; ++j) {
      refined[2 * j] = z_values[j];
      refined[2 * j + 1] = eval(node(2 * j + 1, 2 * n));
    }
    z_values = std::move(refined);
    n *= 2;
    const cplx cur = integrate(n);
    out.value = cur;
    out.nodes = n;
    out.richardson_difference = std::abs(cur - prev);
    const double scale = std::max(1.0, std::abs(cur));
    if (out.richardson_difference <= 1e-8 * scale) {
      out.reliable = true;
      return out;
    }
    if (n >= kMaxNodes) return out;
    prev = cur;
  }
}

double default_contour_radius(cplx lambda0, std::span<const Resonance> zeros) {
  double rho = 0.1;
  for (const auto& z : zeros) {
    const double d = std::abs(z.value - lambda0);
    if (d > 1e-8) rho = std::min(rho, 0.5 * d);
  }
  return rho;
}

}  // namespace ruelle
