// ruelle: periodic orbits, zeta functions, resonances and smoothed invariant
// Ruelle distributions of the symmetric 3-disc scatterer.

#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ruelle/cli.hpp"
#include "ruelle/version.hpp"

namespace {

std::vector<double> split_numbers(const std::string& s, std::size_t expected, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ruelle::ConfigError(std::string("bad number in ") + what + ": " + item);
    }
  }
  if (expected && out.size() != expected) {
    throw ruelle::ConfigError(std::string(what) + " needs " + std::to_string(expected) + " values");
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pollicott-Ruelle resonances and invariant Ruelle distributions of the 3-disc system"};
  app.set_version_flag("--version", ruelle::kVersion);
  app.require_subcommand(1);

  std::string config_file, domain, rect, grid, out, selector;
  double d_over_r = 0.0, cell = 0.0;
  int n_max = 0, k_max = 0, workers = 0;
  std::vector<double> sigmas;
  std::vector<std::string> lambdas;

  app.add_option("--config", config_file, "JSON configuration file (flags override it)");
  app.add_option("--d-over-r", d_over_r, "Disc separation over radius");
  app.add_option("--nmax", n_max, "Maximal topological length of prime cycles");
  app.add_option("--kmax", k_max, "Number of zeta bands");
  app.add_option("--domain", domain, "fundamental or full");
  app.add_option("--rect", rect, "Scan rectangle re0,re1,im0,im1");
  app.add_option("--cell", cell, "Scan cell size");
  app.add_option("--sigma", sigmas, "Smoothing widths (repeatable)");
  app.add_option("--grid", grid, "Section grid NQxNP");
  app.add_option("--lambda", lambdas, "Evaluation point RE,IM for `zeta` (repeatable)");
  app.add_option("--select", selector, "Resonance selector: leading, index:N or near:RE,IM");
  app.add_option("--out", out, "Output directory");
  app.add_option("--workers", workers, "Worker threads");

  auto* orbits = app.add_subcommand("orbits", "Solve prime cycles and write orbits.csv");
  auto* zeta = app.add_subcommand("zeta", "Evaluate Z_1 on a list of lambdas and write zeta.csv");
  auto* resonances = app.add_subcommand("resonances", "Scan for resonances and write resonances.csv");
  auto* distribution =
      app.add_subcommand("distribution", "Smoothed invariant distribution of one resonance (CSV + PGM)");
  for (auto* sub : {orbits, zeta, resonances, distribution}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ruelle::RunConfig cfg;
  try {
    cfg = config_file.empty() ? ruelle::RunConfig{} : ruelle::load_config(config_file);
    if (app.count("--d-over-r")) cfg.d_over_r = d_over_r;
    if (app.count("--nmax")) cfg.n_max = n_max;
    if (app.count("--kmax")) cfg.k_max = k_max;
    if (app.count("--domain")) {
      try {
        cfg.domain = ruelle::domain_from_string(domain);
      } catch (const std::invalid_argument& e) {
        throw ruelle::ConfigError(e.what());
      }
    }
    if (app.count("--rect")) {
      const auto r = split_numbers(rect, 4, "--rect");
      cfg.rect = {r[0], r[1], r[2], r[3]};
    }
    if (app.count("--cell")) cfg.cell = cell;
    if (app.count("--sigma")) cfg.sigmas = sigmas;
    if (app.count("--grid")) {
      const auto x = grid.find('x');
      if (x == std::string::npos) throw ruelle::ConfigError("--grid expects NQxNP");
      const auto q = split_numbers(grid.substr(0, x), 1, "--grid");
      const auto p = split_numbers(grid.substr(x + 1), 1, "--grid");
      cfg.grid = {static_cast<int>(q[0]), static_cast<int>(p[0])};
      if (cfg.grid.n_q != q[0] || cfg.grid.n_p != p[0]) throw ruelle::ConfigError("--grid expects integers");
    }
    if (app.count("--lambda")) {
      cfg.lambdas.clear();
      for (const auto& l : lambdas) {
        const auto v = split_numbers(l, 2, "--lambda");
        cfg.lambdas.emplace_back(v[0], v[1]);
      }
    }
    if (app.count("--select")) cfg.selector = selector;
    if (app.count("--out")) cfg.out = out;
    if (app.count("--workers")) cfg.workers = workers;
    ruelle::validate(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*orbits) ruelle::cmd_orbits(cfg, std::cerr);
    if (*zeta) ruelle::cmd_zeta(cfg, std::cerr);
    if (*resonances) ruelle::cmd_resonances(cfg, std::cerr);
    if (*distribution) ruelle::cmd_distribution(cfg, std::cerr);
  } catch (const ruelle::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
