#include "ruelle/symbolic.hpp"

#include <algorithm>
#include <stdexcept>

namespace ruelle {

std::string_view to_string(Domain d) {
  return d == Domain::full ? "full" : "fundamental";
}

Domain domain_from_string(std::string_view s) {
  if (s == "full") return Domain::full;
  if (s == "fundamental") return Domain::fundamental;
  throw std::invalid_argument("unknown domain '" + std::string(s) + "'");
}

std::string PrimeCycle::word() const {
  std::string w;
  w.reserve(symbols.size());
  for (auto s : symbols) w.push_back(static_cast<char>('0' + s));
  return w;
}

PrimeCycle PrimeCycle::parse(Domain domain, std::string_view word) {
  const int alphabet = domain == Domain::full ? 3 : 2;
  PrimeCycle c{domain, {}};
  for (char ch : word) {
    const int s = ch - '0';
    if (s < 0 || s >= alphabet) {
      throw std::invalid_argument("invalid symbol in word '" + std::string(word) + "'");
    }
    c.symbols.push_back(static_cast<std::uint8_t>(s));
  }
  if (c.symbols.empty()) throw std::invalid_argument("empty word");
  if (domain == Domain::full && !is_valid_full_word(c.symbols)) {
    throw std::invalid_argument("full-domain word repeats a disc: " + std::string(word));
  }
  if (!is_primitive(c.symbols)) {
    throw std::invalid_argument("word is not primitive: " + std::string(word));
  }
  c.symbols = canonical_rotation(c.symbols);
  return c;
}

std::vector<std::uint8_t> canonical_rotation(std::span<const std::uint8_t> w) {
  const std::size_t n = w.size();
  std::vector<std::uint8_t> best(w.begin(), w.end());
  std::vector<std::uint8_t> rot(n);
  for (std::size_t s = 1; s < n; ++s) {
    for (std::size_t i = 0; i < n; ++i) rot[i] = w[(i + s) % n];
    if (rot < best) best = rot;
  }
  return best;
}

bool is_primitive(std::span<const std::uint8_t> w) {
  const std::size_t n = w.size();
  for (std::size_t d = 1; d < n; ++d) {
    if (n % d != 0) continue;
    bool periodic = true;
    for (std::size_t i = d; i < n && periodic; ++i) periodic = w[i] == w[i - d];
    if (periodic) return false;
  }
  return n > 0;
}

bool is_valid_full_word(std::span<const std::uint8_t> w) {
  const std::size_t n = w.size();
  if (n < 2) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] > 2 || w[i] == w[(i + 1) % n]) return false;
  }
  return true;
}

namespace {

// Fredricksen-Kessler-Maiorana generation of Lyndon words of length n in
// lexicographic order; prefixes repeating a disc are pruned in the
// full-domain alphabet.
class LyndonGenerator {
 public:
  LyndonGenerator(int alphabet, int n, bool no_repeats, Domain domain,
                  std::vector<PrimeCycle>& out)
      : k_(alphabet), n_(n), no_repeats_(no_repeats), domain_(domain),
        a_(n + 1, 0), out_(out) {}

  void run() { gen(1, 1); }

 private:
  void gen(int t, int p) {
    if (t > n_) {
      if (p != n_) return;
      if (no_repeats_ && (n_ < 2 || a_[n_] == a_[1])) return;
      out_.push_back({domain_, {a_.begin() + 1, a_.end()}});
      return;
    }
    a_[t] = a_[t - p];
    if (!(no_repeats_ && t > 1 && a_[t] == a_[t - 1])) gen(t + 1, p);
    for (int j = a_[t - p] + 1; j < k_; ++j) {
      a_[t] = static_cast<std::uint8_t>(j);
      if (no_repeats_ && t > 1 && a_[t] == a_[t - 1]) continue;
      gen(t + 1, t);
    }
  }

  int k_;
  int n_;
  bool no_repeats_;
  Domain domain_;
  std::vector<std::uint8_t> a_;
  std::vector<PrimeCycle>& out_;
};

}  // namespace

std::vector<PrimeCycle> enumerate_prime_cycles(Domain domain, int n_max) {
  if (n_max < 1 || n_max > kMaxCycleLength) {
    throw std::invalid_argument("n_max must lie in [1, 24]");
  }
  std::vector<PrimeCycle> out;
  const bool full = domain == Domain::full;
  for (int n = 1; n <= n_max; ++n) {
    LyndonGenerator(full ? 3 : 2, n, full, domain, out).run();
  }
  return out;
}

std::vector<int> UnfoldedItinerary::closure() const {
  std::vector<int> out;
  out.reserve(discs.size() * m);
  GroupElement g;
  for (int rep = 0; rep < m; ++rep) {
    for (int s : discs) out.push_back(g.disc_image(s));
    g = g * h;
  }
  return out;
}

UnfoldedItinerary unfold(const PrimeCycle& w) {
  if (w.domain != Domain::fundamental) {
    throw std::invalid_argument("unfold expects a fundamental-domain word");
  }
  // Each symbol maps the frame (0, 1) to the next ordered disc pair:
  // 0 -> (1, 0) swaps the pair, 1 -> (1, 2) rotates it.
  const GroupElement g0 = GroupElement::reflection_through(2);
  const GroupElement g1 = GroupElement::rotation(1);
  UnfoldedItinerary u;
  GroupElement frame;
  for (auto s : w.symbols) {
    u.discs.push_back(frame.disc_image(0));
    frame = frame * (s == 0 ? g0 : g1);
  }
  u.h = frame;
  u.m = frame.order();
  return u;
}

std::uint64_t necklace_count(int alphabet, int n) {
  // (1/n) sum_{d | n} mu(d) k^(n/d)
  auto mobius = [](int d) {
    int result = 1;
    for (int p = 2; p * p <= d; ++p) {
      if (d % p == 0) {
        d /= p;
        if (d % p == 0) return 0;
        result = -result;
      }
    }
    if (d > 1) result = -result;
    return result;
  };
  std::int64_t sum = 0;
  for (int d = 1; d <= n; ++d) {
    if (n % d != 0) continue;
    std::int64_t pw = 1;
    for (int i = 0; i < n / d; ++i) pw *= alphabet;
    sum += mobius(d) * pw;
  }
  return static_cast<std::uint64_t>(sum / n);
}

int count_by_period(std::span<const double> periods, double T) {
  return static_cast<int>(
      std::count_if(periods.begin(), periods.end(), [T](double t) { return t <= T; }));
}

}  // namespace ruelle
