#include "ruelle/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "ruelle/version.hpp"

namespace ruelle {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double x) { return fmt::format("{:.17g}", x == 0.0 ? 0.0 : x); }

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(fmt::format("bad number '{}' in {}", s, what));
  return v;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

void write_sidecar(const RunConfig& cfg, const fs::path& file, json extra = json::object()) {
  json j = std::move(extra);
  j["file"] = file.filename().string();
  j["version"] = kVersion;
  j["config_hash"] = fmt::format("{:016x}", config_hash(cfg));
  j["n_max"] = cfg.n_max;
  j["config"] = scientific_config(cfg);
  auto f = open_output(fs::path(file.string() + ".json"));
  f << j.dump(2) << '\n';
}

struct Pipeline {
  DiscSystem system;
  OrbitTable table;
  std::vector<CycleData> cycles;
  std::vector<CycleExpansion> bands;
};

Pipeline build_pipeline(const RunConfig& cfg, std::ostream& log) {
  DiscSystem sys(cfg.d_over_r);
  if (sys.grammar_warning()) log << "warning: d/r < 2.5, symbolic coding may be incomplete\n";
  std::vector<std::pair<std::string, std::string>> failures;
  OrbitTable table = build_orbit_table(sys, cfg.domain, cfg.n_max, cfg.workers, &failures);
  if (!failures.empty()) {
    throw NumericalError(fmt::format("{} prime cycle(s) could not be realised, first: {} ({})",
                                     failures.size(), failures.front().first, failures.front().second));
  }
  auto cycles = cycle_data(table);
  auto bands = build_expansions(cycles, cfg.k_max, cfg.n_max);
  return {sys, std::move(table), std::move(cycles), std::move(bands)};
}

std::vector<Resonance> scan_resonances(const RunConfig& cfg, const Pipeline& pl, std::ostream& log) {
  ScanLog scan_log;
  auto zeros = scan(pl.bands, cfg.rect, {cfg.cell, cfg.workers}, &scan_log);
  for (const auto& m : scan_log.messages) log << m << '\n';
  return zeros;
}

void prepare_out(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + cfg.out.string());
}

}  // namespace

void validate(const RunConfig& cfg) {
  require(std::isfinite(cfg.d_over_r) && cfg.d_over_r > 2.0 && cfg.d_over_r <= 1e3,
          "d_over_r must lie in (2, 1000]");
  require(cfg.n_max >= 1 && cfg.n_max <= kMaxCliNmax, fmt::format("n_max must lie in [1, {}]", kMaxCliNmax));
  require(cfg.k_max >= 1 && cfg.k_max <= kMaxCliKmax, fmt::format("k_max must lie in [1, {}]", kMaxCliKmax));
  const Rect& r = cfg.rect;
  require(std::isfinite(r.re0) && std::isfinite(r.re1) && std::isfinite(r.im0) && std::isfinite(r.im1),
          "rect must be finite");
  require(!r.empty(), "rect must satisfy re0 < re1 and im0 < im1");
  require(cfg.cell > 0.0 && cfg.cell <= 0.5, "cell must lie in (0, 0.5]");
  require(!cfg.sigmas.empty(), "at least one sigma is required");
  for (double s : cfg.sigmas) require(s > 0.0 && s <= kMaxSigma, "sigma must lie in (0, 10]");
  require(cfg.grid.n_q >= 2 && cfg.grid.n_q <= 2000 && cfg.grid.n_p >= 2 && cfg.grid.n_p <= 1000,
          "grid must be between 2x2 and 2000x1000");
  for (const cplx& l : cfg.lambdas) {
    require(std::isfinite(l.real()) && std::isfinite(l.imag()), "lambdas must be finite");
  }
  require(cfg.workers >= 1 && cfg.workers <= 256, "workers must lie in [1, 256]");
  require(cfg.selector == "leading" || cfg.selector.starts_with("index:") || cfg.selector.starts_with("near:"),
          "selector must be leading, index:N or near:RE,IM");
  if (cfg.selector.starts_with("index:")) {
    const double v = parse_double(std::string_view(cfg.selector).substr(6), "selector");
    require(v >= 0.0 && v == std::floor(v), "selector index must be a non-negative integer");
  }
  if (cfg.selector.starts_with("near:")) {
    const std::string_view s = std::string_view(cfg.selector).substr(5);
    const auto comma = s.find(',');
    require(comma != std::string_view::npos, "selector near: needs RE,IM");
    parse_double(s.substr(0, comma), "selector");
    parse_double(s.substr(comma + 1), "selector");
  }
}

json scientific_config(const RunConfig& cfg) {
  json lambdas = json::array();
  for (const cplx& l : cfg.lambdas) lambdas.push_back({l.real(), l.imag()});
  return json{{"d_over_r", cfg.d_over_r},
              {"n_max", cfg.n_max},
              {"k_max", cfg.k_max},
              {"domain", std::string(to_string(cfg.domain))},
              {"rect", {cfg.rect.re0, cfg.rect.re1, cfg.rect.im0, cfg.rect.im1}},
              {"cell", cfg.cell},
              {"sigmas", cfg.sigmas},
              {"grid", {cfg.grid.n_q, cfg.grid.n_p}},
              {"lambdas", lambdas},
              {"selector", cfg.selector}};
}

json to_json(const RunConfig& cfg) {
  json j = scientific_config(cfg);
  j["out"] = cfg.out.string();
  j["workers"] = cfg.workers;
  return j;
}

RunConfig config_from_json(const json& j, RunConfig base) {
  require(j.is_object(), "config must be a JSON object");
  RunConfig c = std::move(base);
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "d_over_r") {
        c.d_over_r = v.get<double>();
      } else if (key == "n_max") {
        c.n_max = v.get<int>();
      } else if (key == "k_max") {
        c.k_max = v.get<int>();
      } else if (key == "domain") {
        c.domain = domain_from_string(v.get<std::string>());
      } else if (key == "rect") {
        const auto r = v.get<std::vector<double>>();
        require(r.size() == 4, "rect needs four numbers");
        c.rect = {r[0], r[1], r[2], r[3]};
      } else if (key == "cell") {
        c.cell = v.get<double>();
      } else if (key == "sigmas") {
        c.sigmas = v.get<std::vector<double>>();
      } else if (key == "grid") {
        const auto g = v.get<std::vector<int>>();
        require(g.size() == 2, "grid needs two integers");
        c.grid = {g[0], g[1]};
      } else if (key == "lambdas") {
        c.lambdas.clear();
        for (const auto& l : v) {
          const auto p = l.get<std::vector<double>>();
          require(p.size() == 2, "each lambda needs [re, im]");
          c.lambdas.emplace_back(p[0], p[1]);
        }
      } else if (key == "selector") {
        c.selector = v.get<std::string>();
      } else if (key == "out") {
        c.out = v.get<std::string>();
      } else if (key == "workers") {
        c.workers = v.get<int>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig load_config(const fs::path& file) {
  std::ifstream f(file);
  if (!f) throw ConfigError("cannot read config file " + file.string());
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

std::uint64_t config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : scientific_config(cfg).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t select_resonance(const std::vector<Resonance>& zeros, const std::string& selector) {
  if (selector == "leading") {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < zeros.size(); ++i) {
      const auto& z = zeros[i];
      if (z.band != 1) continue;
      if (!best) {
        best = i;
        continue;
      }
      const auto& b = zeros[*best];
      if (z.value.real() > b.value.real() ||
          (z.value.real() == b.value.real() && std::abs(z.value.imag()) < std::abs(b.value.imag()))) {
        best = i;
      }
    }
    if (!best) throw ConfigError("no band-1 resonance in the scan rectangle");
    return *best;
  }
  if (selector.starts_with("index:")) {
    const auto idx = static_cast<std::size_t>(parse_double(std::string_view(selector).substr(6), "selector"));
    if (idx >= zeros.size()) {
      throw ConfigError(fmt::format("selector {} but only {} resonance(s) found", selector, zeros.size()));
    }
    return idx;
  }
  if (selector.starts_with("near:")) {
    const std::string_view s = std::string_view(selector).substr(5);
    const auto comma = s.find(',');
    if (comma == std::string_view::npos) throw ConfigError("selector near: needs RE,IM");
    const cplx target(parse_double(s.substr(0, comma), "selector"), parse_double(s.substr(comma + 1), "selector"));
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < zeros.size(); ++i) {
      if (!best || std::abs(zeros[i].value - target) < std::abs(zeros[*best].value - target)) best = i;
    }
    if (!best || std::abs(zeros[*best].value - target) > 0.05) {
      throw ConfigError("no resonance within 0.05 of " + std::string(s));
    }
    return *best;
  }
  throw ConfigError("unknown selector " + selector);
}

std::string pgm_bytes(const DistributionGrid& grid) {
  const GridSpec& g = grid.grid;
  std::string out = fmt::format("P5\n{} {}\n255\n", g.n_q, g.n_p);
  const double lo = grid.re_min, hi = grid.re_max;
  const bool flat = !(hi > lo);
  out.reserve(out.size() + g.size());
  for (int row = 0; row < g.n_p; ++row) {
    const int j = g.n_p - 1 - row;
    for (int i = 0; i < g.n_q; ++i) {
      int px = 128;
      if (!flat) {
        const double v = grid.values[g.index(i, j)].real();
        px = static_cast<int>(std::lround(255.0 * (v - lo) / (hi - lo)));
        px = std::clamp(px, 0, 255);
      }
      out.push_back(static_cast<char>(static_cast<unsigned char>(px)));
    }
  }
  return out;
}

std::vector<fs::path> cmd_orbits(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  prepare_out(cfg);
  DiscSystem sys(cfg.d_over_r);
  std::vector<std::pair<std::string, std::string>> failures;
  const OrbitTable table = build_orbit_table(sys, cfg.domain, cfg.n_max, cfg.workers, &failures);

  std::vector<std::pair<PrimeCycle, std::string>> rows;
  const std::string dom(to_string(cfg.domain));
  for (const auto& o : table.orbits) {
    rows.emplace_back(o.cycle, fmt::format("{},{},{},{},{},{},{}\n", o.cycle.word(), dom, o.m, num(o.period),
                                           num(o.stability), o.sign, num(o.gradient_norm)));
  }
  for (const auto& [word, message] : failures) {
    log << "orbit " << word << ": " << message << '\n';
    rows.emplace_back(PrimeCycle::parse(cfg.domain, word), fmt::format("{},{},,,,,nan\n", word, dom));
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.first.length() != b.first.length()) return a.first.length() < b.first.length();
    return a.first.word() < b.first.word();
  });

  const fs::path path = cfg.out / "orbits.csv";
  {
    auto f = open_output(path);
    f << "word,domain,m,T,Lambda,sign,residual\n";
    for (const auto& r : rows) f << r.second;
  }
  write_sidecar(cfg, path, {{"rows", rows.size()}, {"failures", failures.size()}});
  log << fmt::format("{} orbits ({} failed) -> {}\n", rows.size(), failures.size(), path.string());
  return {path};
}

std::vector<fs::path> cmd_zeta(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  prepare_out(cfg);
  const Pipeline pl = build_pipeline(cfg, log);
  const auto weights = orbit_weights(pl.table, WeightSpec{ConstantOne{}});
  const fs::path path = cfg.out / "zeta.csv";
  {
    auto f = open_output(path);
    f << "re,im,Z1_re,Z1_im,tail_bound\n";
    for (const cplx& l : cfg.lambdas) {
      try {
        const ZetaValue z = weighted_zeta(pl.bands, l, weights);
        f << fmt::format("{},{},{},{},{}\n", num(l.real()), num(l.imag()), num(z.value.real()),
                         num(z.value.imag()), num(z.tail_bound));
      } catch (const PoleProximity& e) {
        log << e.what() << '\n';
        f << fmt::format("{},{},nan,nan,nan\n", num(l.real()), num(l.imag()));
      }
    }
  }
  write_sidecar(cfg, path);
  log << fmt::format("{} evaluations -> {}\n", cfg.lambdas.size(), path.string());
  return {path};
}

std::vector<fs::path> cmd_resonances(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  prepare_out(cfg);
  const Pipeline pl = build_pipeline(cfg, log);
  const auto zeros = scan_resonances(cfg, pl, log);
  const auto ones = orbit_weights(pl.table, WeightSpec{ConstantOne{}});

  const fs::path path = cfg.out / "resonances.csv";
  {
    auto f = open_output(path);
    f << "re,im,band,order,residual,res_Z1_re,res_Z1_im\n";
    for (const auto& z : zeros) {
      cplx r;
      try {
        r = residue(pl.bands, z, ones);
      } catch (const NumericalError&) {
        const double rho = default_contour_radius(z.value, zeros);
        r = laurent_coefficient(pl.bands, z.value, 0, ones, rho).value;
      }
      f << fmt::format("{},{},{},{},{},{},{}\n", num(z.value.real()), num(z.value.imag()), z.band, z.order,
                       num(z.residual), num(r.real()), num(r.imag()));
    }
  }
  write_sidecar(cfg, path, {{"rows", zeros.size()}});
  log << fmt::format("{} resonances -> {}\n", zeros.size(), path.string());
  return {path};
}

std::vector<fs::path> cmd_distribution(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const Pipeline pl = build_pipeline(cfg, log);
  const auto zeros = scan_resonances(cfg, pl, log);
  const std::size_t idx = select_resonance(zeros, cfg.selector);
  const Resonance& res = zeros[idx];
  prepare_out(cfg);

  const ResidueCoefficients coeffs = residue_coefficients(pl.bands, res);
  const auto mask = sigma1_mask(pl.system, cfg.grid, cfg.workers);
  std::vector<fs::path> written;
  for (double sigma : cfg.sigmas) {
    const DistributionGrid grid = distribution_grid(pl.table, coeffs, res.value, cfg.grid, sigma, cfg.workers);
    const std::string stem = fmt::format("distribution_{}_sigma_{:g}", idx, sigma);
    const fs::path csv = cfg.out / (stem + ".csv");
    const fs::path pgm = cfg.out / (stem + ".pgm");
    {
      auto f = open_output(csv);
      f << "q,p,value_re,value_im,in_sigma1\n";
      const GridSpec& g = cfg.grid;
      for (int j = 0; j < g.n_p; ++j) {
        for (int i = 0; i < g.n_q; ++i) {
          const std::size_t k = g.index(i, j);
          f << fmt::format("{},{},{},{},{}\n", num(g.q(i)), num(g.p(j)), num(grid.values[k].real()),
                           num(grid.values[k].imag()), mask[k] ? 1 : 0);
        }
      }
    }
    {
      auto f = open_output(pgm);
      f << pgm_bytes(grid);
    }
    const json norm{{"v_min", grid.re_min},
                    {"v_max", grid.re_max},
                    {"lambda0", {res.value.real(), res.value.imag()}},
                    {"band", res.band},
                    {"sigma", sigma},
                    {"localization_delta2", localization_metric(grid, mask, 2)}};
    write_sidecar(cfg, csv, norm);
    write_sidecar(cfg, pgm, norm);
    log << fmt::format("sigma {:g}: lambda0 = ({:.12g}, {:.12g}) -> {}\n", sigma, res.value.real(),
                       res.value.imag(), pgm.string());
    written.push_back(csv);
    written.push_back(pgm);
  }
  return written;
}

}  // namespace ruelle
