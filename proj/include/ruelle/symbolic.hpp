#pragma once

// Symbolic dynamics of the 3-disc system: prime cycles in the disc-label
// alphabet (full domain) and in the binary alphabet of the C3v fundamental
// domain, plus unfolding of fundamental words to disc itineraries.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ruelle/geometry.hpp"

namespace ruelle {

enum class Domain { full, fundamental };

std::string_view to_string(Domain d);
Domain domain_from_string(std::string_view s);

struct PrimeCycle {
  Domain domain = Domain::fundamental;
  std::vector<std::uint8_t> symbols;

  int length() const { return static_cast<int>(symbols.size()); }
  std::string word() const;

  static PrimeCycle parse(Domain domain, std::string_view word);

  auto operator<=>(const PrimeCycle&) const = default;
};

/// Disc itinerary realising one period of a fundamental word.
struct UnfoldedItinerary {
  std::vector<int> discs;  // s_0 .. s_{n-1}; the flight s_0 -> s_1 starts it
  GroupElement h;          // maps (s_0, s_1) onto (s_n, s_{n+1})
  int m = 1;               // order of h

  /// m-fold repetition, i.e. the closed full-domain itinerary.
  std::vector<int> closure() const;
};

inline constexpr int kMaxCycleLength = 24;

/// All prime cycles of length <= n_max in canonical (least rotation) form,
/// sorted by (length, word).
std::vector<PrimeCycle> enumerate_prime_cycles(Domain domain, int n_max);

/// Least cyclic rotation of a word.
std::vector<std::uint8_t> canonical_rotation(std::span<const std::uint8_t> w);
bool is_primitive(std::span<const std::uint8_t> w);
bool is_valid_full_word(std::span<const std::uint8_t> w);

/// Symbol 1: flight to the third disc (label advance s -> s + 1 at the start
/// (0, 1)); symbol 0: flight back to the previous disc.
UnfoldedItinerary unfold(const PrimeCycle& w);

/// Number of binary (alphabet size k) primitive necklaces of length n.
std::uint64_t necklace_count(int alphabet, int n);

/// |{periods <= T}|.
int count_by_period(std::span<const double> periods, double T);

}  // namespace ruelle
