#pragma once

// Run configuration and the file-producing commands behind the `ruelle`
// executable.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ruelle/distribution.hpp"

namespace ruelle {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  double d_over_r = 6.0;
  int n_max = 8;
  int k_max = 2;
  Domain domain = Domain::fundamental;
  Rect rect{-1.0, 0.5, 0.0, 20.0};
  double cell = 0.25;
  std::vector<double> sigmas{0.1, 0.001};
  GridSpec grid{400, 200};
  std::vector<cplx> lambdas{{2.0, 0.0}, {3.0, 1.0}};
  std::string selector = "leading";  // leading | index:N | near:RE,IM
  std::filesystem::path out = "out";
  int workers = 1;
};

inline constexpr int kMaxCliNmax = 16;
inline constexpr int kMaxCliKmax = 4;

/// Throws ConfigError describing the first invalid field.
void validate(const RunConfig& cfg);

nlohmann::json to_json(const RunConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& file);

/// The fields that determine the numerical results (no output directory or
/// worker count), serialised canonically.
nlohmann::json scientific_config(const RunConfig& cfg);
/// FNV-1a 64 of the canonical scientific configuration.
std::uint64_t config_hash(const RunConfig& cfg);

/// Selection of one resonance from a sorted list; throws ConfigError when
/// nothing matches.
std::size_t select_resonance(const std::vector<Resonance>& zeros, const std::string& selector);

/// Row-major PGM bytes for the real part of a distribution grid (row 0 is
/// p = +1, column 0 is q = -pi).
std::string pgm_bytes(const DistributionGrid& grid);

/// Each command writes its files into cfg.out and returns their paths.
std::vector<std::filesystem::path> cmd_orbits(const RunConfig& cfg, std::ostream& log);
std::vector<std::filesystem::path> cmd_zeta(const RunConfig& cfg, std::ostream& log);
std::vector<std::filesystem::path> cmd_resonances(const RunConfig& cfg, std::ostream& log);
std::vector<std::filesystem::path> cmd_distribution(const RunConfig& cfg, std::ostream& log);

}  // namespace ruelle
