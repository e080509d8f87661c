#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "ruelle/cli.hpp"
#include "ruelle/version.hpp"

namespace py = pybind11;
using namespace ruelle;

namespace {

std::shared_ptr<OrbitTable> make_table(double d_over_r, const std::string& domain, int n_max, int workers) {
  std::vector<std::pair<std::string, std::string>> failures;
  auto t = std::make_shared<OrbitTable>(
      build_orbit_table(DiscSystem(d_over_r), domain_from_string(domain), n_max, workers, &failures));
  if (!failures.empty()) {
    throw NumericalError("orbit " + failures.front().first + ": " + failures.front().second);
  }
  return t;
}

std::vector<double> table_periods(const OrbitTable& t) {
  std::vector<double> out;
  for (const auto& o : t.orbits) out.push_back(o.period);
  return out;
}

std::vector<double> weights_or_periods(const OrbitTable& t, const std::optional<std::vector<double>>& w) {
  if (!w) return table_periods(t);
  if (w->size() != t.orbits.size()) throw std::invalid_argument("one weight per orbit is required");
  return *w;
}

Rect to_rect(const std::tuple<double, double, double, double>& r) {
  return {std::get<0>(r), std::get<1>(r), std::get<2>(r), std::get<3>(r)};
}

py::array_t<std::complex<double>> grid_array(const DistributionGrid& g) {
  py::array_t<std::complex<double>> a({g.grid.n_p, g.grid.n_q});
  auto v = a.mutable_unchecked<2>();
  for (int j = 0; j < g.grid.n_p; ++j) {
    for (int i = 0; i < g.grid.n_q; ++i) v(j, i) = g.values[g.grid.index(i, j)];
  }
  return a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Resonances and invariant distributions of the three-disc billiard";
  m.attr("__version__") = kVersion;

  static py::exception<NumericalError> numerical(m, "NumericalError", PyExc_ArithmeticError);
  static py::exception<ConfigError> config(m, "ConfigError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config, e.what());
    } catch (const NumericalError& e) {
      py::set_error(numerical, e.what());
    }
  });

  m.def(
      "enumerate_prime_cycles",
      [](const std::string& domain, int n_max) {
        std::vector<std::string> out;
        for (const auto& c : enumerate_prime_cycles(domain_from_string(domain), n_max)) out.push_back(c.word());
        return out;
      },
      py::arg("domain"), py::arg("n_max"), "Canonical prime cycle words up to length n_max.");

  py::class_<PeriodicOrbit>(m, "PeriodicOrbit")
      .def_property_readonly("word", [](const PeriodicOrbit& o) { return o.cycle.word(); })
      .def_property_readonly("length", &PeriodicOrbit::length)
      .def_readonly("period", &PeriodicOrbit::period)
      .def_readonly("stability", &PeriodicOrbit::stability)
      .def_readonly("sign", &PeriodicOrbit::sign)
      .def_readonly("m", &PeriodicOrbit::m)
      .def_readonly("monodromy_det", &PeriodicOrbit::monodromy_det)
      .def_readonly("gradient_norm", &PeriodicOrbit::gradient_norm)
      .def("__repr__", [](const PeriodicOrbit& o) {
        std::ostringstream s;
        s.precision(12);
        s << "<PeriodicOrbit " << o.cycle.word() << " T=" << o.period << " Lambda=" << o.stability << ">";
        return s.str();
      });

  m.def(
      "find_orbit",
      [](double d_over_r, const std::string& domain, const std::string& word) {
        return find_orbit(DiscSystem(d_over_r), PrimeCycle::parse(domain_from_string(domain), word));
      },
      py::arg("d_over_r"), py::arg("domain"), py::arg("word"));

  py::class_<OrbitTable, std::shared_ptr<OrbitTable>>(m, "OrbitTable")
      .def(py::init(&make_table), py::arg("d_over_r") = 6.0, py::arg("domain") = "fundamental",
           py::arg("n_max") = 8, py::arg("workers") = 1)
      .def_readonly("n_max", &OrbitTable::n_max)
      .def_readonly("orbits", &OrbitTable::orbits)
      .def("periods", &table_periods)
      .def("__len__", [](const OrbitTable& t) { return t.orbits.size(); });

  py::class_<CycleExpansion>(m, "CycleExpansion")
      .def_property_readonly("band", &CycleExpansion::band)
      .def_property_readonly("n_max", &CycleExpansion::n_max)
      .def_property_readonly("term_count", [](const CycleExpansion& e) { return e.terms().size(); })
      .def("value", &CycleExpansion::value, py::arg("lam"))
      .def("d_lambda", &CycleExpansion::d_lambda, py::arg("lam"));

  m.def(
      "build_expansions",
      [](const OrbitTable& t, int k_max, std::optional<int> n_max) {
        return build_expansions(cycle_data(t), k_max, n_max.value_or(t.n_max));
      },
      py::arg("table"), py::arg("k_max") = 2, py::arg("n_max") = py::none());

  m.def(
      "weighted_zeta",
      [](const OrbitTable& t, const std::vector<CycleExpansion>& bands, cplx lam,
         const std::optional<std::vector<double>>& weights) {
        const ZetaValue z = weighted_zeta(bands, lam, weights_or_periods(t, weights));
        return py::make_tuple(z.value, z.tail_bound);
      },
      py::arg("table"), py::arg("bands"), py::arg("lam"), py::arg("weights") = py::none(),
      "Z_f(lam) and the bound on the dropped bands; the default weights are f = 1.");

  py::class_<Resonance>(m, "Resonance")
      .def_readonly("value", &Resonance::value)
      .def_readonly("band", &Resonance::band)
      .def_readonly("order", &Resonance::order)
      .def_readonly("residual", &Resonance::residual)
      .def("__repr__", [](const Resonance& r) {
        std::ostringstream s;
        s.precision(12);
        s << "<Resonance " << r.value.real() << (r.value.imag() < 0 ? "" : "+") << r.value.imag()
          << "i band=" << r.band << ">";
        return s.str();
      });

  m.def(
      "scan",
      [](const std::vector<CycleExpansion>& bands, const std::tuple<double, double, double, double>& rect,
         double cell, int workers) {
        py::gil_scoped_release release;
        return scan(bands, to_rect(rect), {cell, workers});
      },
      py::arg("bands"), py::arg("rect"), py::arg("cell") = 0.25, py::arg("workers") = 1,
      "Zeros of every band in the rectangle (re0, re1, im0, im1).");

  m.def(
      "residue",
      [](const OrbitTable& t, const std::vector<CycleExpansion>& bands, const Resonance& res,
         const std::optional<std::vector<double>>& weights) {
        return residue(bands, res, weights_or_periods(t, weights));
      },
      py::arg("table"), py::arg("bands"), py::arg("resonance"), py::arg("weights") = py::none());

  m.def(
      "distribution",
      [](const OrbitTable& t, const std::vector<CycleExpansion>& bands, const Resonance& res,
         std::pair<int, int> grid, double sigma, int workers) {
        DistributionGrid g;
        {
          py::gil_scoped_release release;
          g = distribution_grid(t, bands, res, GridSpec{grid.first, grid.second}, sigma, workers);
        }
        return grid_array(g);
      },
      py::arg("table"), py::arg("bands"), py::arg("resonance"), py::arg("grid") = std::pair{400, 200},
      py::arg("sigma") = 0.1, py::arg("workers") = 1,
      "Smoothed distribution on the section, shape (n_p, n_q); row j is p_j ascending.");

  m.def(
      "sigma1_mask",
      [](double d_over_r, std::pair<int, int> grid) {
        const GridSpec g{grid.first, grid.second};
        const auto mask = sigma1_mask(DiscSystem(d_over_r), g);
        py::array_t<std::uint8_t> a({g.n_p, g.n_q});
        auto v = a.mutable_unchecked<2>();
        for (int j = 0; j < g.n_p; ++j) {
          for (int i = 0; i < g.n_q; ++i) v(j, i) = mask[g.index(i, j)];
        }
        return a;
      },
      py::arg("d_over_r") = 6.0, py::arg("grid") = std::pair{400, 200});

  m.def(
      "localization_metric",
      [](py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast> values,
         py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> mask, int delta) {
        if (values.ndim() != 2 || mask.ndim() != 2 || values.shape(0) != mask.shape(0) ||
            values.shape(1) != mask.shape(1)) {
          throw std::invalid_argument("values and mask must be 2D arrays of equal shape");
        }
        DistributionGrid g;
        g.grid = {static_cast<int>(values.shape(1)), static_cast<int>(values.shape(0))};
        g.values.assign(values.data(), values.data() + values.size());
        return localization_metric(g, std::span(mask.data(), mask.size()), delta);
      },
      py::arg("values"), py::arg("mask"), py::arg("delta") = 2);

  m.def(
      "run",
      [](const std::string& command, const std::string& config_json) {
        const RunConfig cfg = config_from_json(nlohmann::json::parse(config_json));
        std::ostringstream log;
        std::vector<std::filesystem::path> files;
        if (command == "orbits") {
          files = cmd_orbits(cfg, log);
        } else if (command == "zeta") {
          files = cmd_zeta(cfg, log);
        } else if (command == "resonances") {
          files = cmd_resonances(cfg, log);
        } else if (command == "distribution") {
          files = cmd_distribution(cfg, log);
        } else {
          throw ConfigError("unknown command " + command);
        }
        std::vector<std::string> out;
        for (const auto& f : files) out.push_back(f.string());
        return out;
      },
      py::arg("command"), py::arg("config_json"));
}
