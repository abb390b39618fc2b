#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "eqpert/burgers.hpp"
#include "eqpert/chain.hpp"
#include "eqpert/config.hpp"
#include "eqpert/experiments.hpp"
#include "eqpert/flow.hpp"
#include "eqpert/gep.hpp"
#include "eqpert/kernels.hpp"
#include "eqpert/observables.hpp"
#include "eqpert/potential.hpp"
#include "eqpert/profiles.hpp"
#include "eqpert/psystem.hpp"
#include "eqpert/rng.hpp"
#include "eqpert/thermo.hpp"
#include "eqpert/torus.hpp"

namespace py = pybind11;
using namespace eqpert;

PYBIND11_MODULE(_eqpert, m) {
  m.doc() = "equilibrium-perturbation simulation toolkit";

  // ---- shared numerics ----------------------------------------------------------
  py::class_<RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream_id"))
      .def("uniform", &RngStream::uniform)
      .def("gaussian", py::overload_cast<>(&RngStream::gaussian))
      .def("gaussian", py::overload_cast<double, double>(&RngStream::gaussian),
           py::arg("mean"), py::arg("stddev"));

  py::class_<Profile>(m, "Profile")
      .def(py::init<>())
      .def_static("named", &Profile::named, py::arg("name"), py::arg("amplitude"),
                  py::arg("center") = 0.5, py::arg("width") = 0.5,
                  py::arg("zero_mean") = false)
      .def("value", &Profile::value)
      .def("min_value", &Profile::min_value)
      .def("max_value", &Profile::max_value)
      .def("__call__", &Profile::value);

  py::class_<Torus>(m, "Torus").def(py::init<int, int>(), py::arg("dim"), py::arg("side"));

  // ---- scalar conservation law ----------------------------------------------------
  py::class_<Wave>(m, "Wave")
      .def(py::init<Profile, double>(), py::arg("initial"), py::arg("coefficient"))
      .def("value", &Wave::value, py::arg("s"), py::arg("zeta"))
      .def("shock",
           [](const Wave& w) { return py::make_tuple(w.shock().finite, w.shock().t); });

  m.def("burgers_fv", &burgers_fv, py::arg("field"), py::arg("dim"), py::arg("cells"),
        py::arg("c"), py::arg("t"), py::arg("cfl") = 0.45);
  m.def("planar_field", &planar_field, py::arg("rho0"), py::arg("normal"), py::arg("dim"),
        py::arg("cells"));
  m.def("l1_error", &l1_error);

  // ---- generalized exclusion -------------------------------------------------------
  py::class_<GepParams>(m, "GepParams")
      .def(py::init<Torus, int, std::vector<double>>(), py::arg("torus"), py::arg("k_max"),
           py::arg("rates"));

  py::class_<GepState>(m, "GepState")
      .def(py::init<>())
      .def_readwrite("params", &GepState::params)
      .def_readwrite("eta", &GepState::eta)
      .def_readwrite("clock", &GepState::clock)
      .def("rebuild_rates", &GepState::rebuild_rates)
      .def("particles", &GepState::particles)
      .def("rate_drift", &GepState::rate_drift);

  m.def("sample_initial", &sample_initial, py::arg("params"), py::arg("rho"), py::arg("rng"));
  m.def("simulate_to", &simulate_to, py::arg("state"), py::arg("t_macro"), py::arg("speed"),
        py::arg("rng"), py::arg("audit_every") = 0);
  m.def("state_count", &state_count);
  m.def("state_index", &state_index);
  m.def("state_unpack", &state_unpack);
  m.def("master_equation", &master_equation, py::arg("params"), py::arg("mu0"), py::arg("t"),
        py::arg("speed"), py::arg("tol") = 1e-12);
  m.def("product_binomial_pmf", &product_binomial_pmf);
  m.def("generator_residual", &generator_residual);
  m.def("total_variation", &total_variation);

  py::class_<GepMacro>(m, "GepMacro")
      .def_readonly("rho_star", &GepMacro::rho_star)
      .def_readonly("lambda_", &GepMacro::lambda);
  m.def("make_gep_macro", &make_gep_macro, py::arg("rho_star"), py::arg("k_max"),
        py::arg("drift"), py::arg("normal"), py::arg("rho0"));
  m.def("gep_profile", &gep_profile, py::arg("macro"), py::arg("n_sites"), py::arg("alpha"),
        py::arg("kappa"), py::arg("t"), py::arg("u"));
  m.def("gep_frame_shift", &gep_frame_shift, py::arg("params"), py::arg("rho_star"),
        py::arg("kappa"), py::arg("t"));
  m.def("gep_pairing", &gep_pairing, py::arg("state"), py::arg("rho_star"), py::arg("alpha"),
        py::arg("shift"), py::arg("phi"));

  // ---- anharmonic chain -------------------------------------------------------------
  py::class_<Potential>(m, "Potential")
      .def_static("named", &Potential::named)
      .def("V", &Potential::V)
      .def("dV", &Potential::dV)
      .def("d2V", &Potential::d2V)
      .def("curvature_bounds", &Potential::curvature_bounds, py::arg("R"),
           py::arg("grid") = 4096)
      .def_property_readonly("name", &Potential::name);

  py::class_<GibbsTable>(m, "GibbsTable");

  py::class_<Thermodynamics>(m, "Thermodynamics")
      .def(py::init<const Potential&, double, double>(), py::arg("potential"),
           py::arg("beta"), py::arg("range") = 8.0)
      .def("partition", &Thermodynamics::partition)
      .def("rbar", &Thermodynamics::rbar)
      .def("variance", &Thermodynamics::variance)
      .def("tension", &Thermodynamics::tension)
      .def("tension_full",
           [](const Thermodynamics& th, double r) {
             auto td = th.tension_full(r);
             return py::make_tuple(td.tau, td.d1, td.d2);
           })
      .def("density", &Thermodynamics::density, py::arg("tau"), py::arg("r"))
      .def("build_table", &Thermodynamics::build_table, py::arg("tau"),
           py::arg("nodes") = 4096);

  py::class_<ChainState>(m, "ChainState")
      .def(py::init<>())
      .def_readwrite("p", &ChainState::p)
      .def_readwrite("r", &ChainState::r)
      .def_readwrite("clock", &ChainState::clock);

  m.def("sample_gibbs", &sample_gibbs, py::arg("th"), py::arg("table"), py::arg("pbar"),
        py::arg("sites"), py::arg("rng"));
  m.def(
      "integrate",
      [](ChainState& s, const Potential& pot, double beta, double gamma, double t_micro,
         RngStream& rng, double dt_micro, double guard) {
        IntegrateOptions opt;
        opt.dt_micro = dt_micro;
        opt.guard = guard;
        integrate(s, pot, beta, gamma, t_micro, rng, opt);
      },
      py::arg("state"), py::arg("potential"), py::arg("beta"), py::arg("gamma"),
      py::arg("t_micro"), py::arg("rng"), py::arg("dt_micro") = 0.0, py::arg("guard") = 1e6);
  m.def("micro_step_policy", &micro_step_policy);
  m.def("gamma_window_midpoint", &gamma_window_midpoint);

  py::class_<PerturbedProfile>(m, "PerturbedProfile")
      .def_readonly("pbar", &PerturbedProfile::pbar)
      .def_readonly("rbar", &PerturbedProfile::rbar);
  m.def("build_perturbed_profile", &build_perturbed_profile, py::arg("th"), py::arg("p_star"),
        py::arg("r_star"), py::arg("sigma_minus"), py::arg("sigma_plus"), py::arg("alpha"),
        py::arg("sites"));
  m.def("sample_perturbed", &sample_perturbed, py::arg("th"), py::arg("profile"),
        py::arg("rng"));
  m.def("chain_pairing", &chain_pairing, py::arg("state"), py::arg("p_star"),
        py::arg("r_star"), py::arg("tau_prime_star"), py::arg("alpha"), py::arg("kappa"),
        py::arg("t"), py::arg("phi"));

  // ---- two-family geometric optics ---------------------------------------------------
  py::class_<ChainMacro>(m, "ChainMacro")
      .def_readonly("minus", &ChainMacro::minus)
      .def_readonly("plus", &ChainMacro::plus);
  m.def("make_chain_macro", &make_chain_macro, py::arg("p_star"), py::arg("r_star"),
        py::arg("tau_prime"), py::arg("tau_second"), py::arg("sigma_minus"),
        py::arg("sigma_plus"));
  m.def("chain_bracket", &chain_bracket, py::arg("macro"), py::arg("s"), py::arg("u1"),
        py::arg("u2"));
  m.def("chain_profile", &chain_profile, py::arg("macro"), py::arg("n_sites"),
        py::arg("alpha"), py::arg("kappa"), py::arg("t"), py::arg("u"));
  m.def("epsilon_lattice", &epsilon_lattice, py::arg("macro"), py::arg("tension"),
        py::arg("n_sites"), py::arg("alpha"), py::arg("kappa"), py::arg("t"));

  // ---- discrete flow -----------------------------------------------------------------
  py::class_<Flow>(m, "Flow")
      .def("divergence_residual", &Flow::divergence_residual)
      .def("nonnegative", &Flow::nonnegative)
      .def("sum_abs", &Flow::sum_abs)
      .def("sum_sq", &Flow::sum_sq);
  m.def("construct_flow", &construct_flow, py::arg("ell"), py::arg("d"));
  m.def("flow_cost_rate", &flow_cost_rate, py::arg("ell"), py::arg("d"));

  // ---- concentration and entropy -------------------------------------------------------
  m.def("relative_entropy_exact", &relative_entropy_exact);
  m.def("default_theta_grid", &default_theta_grid, py::arg("points_per_side") = 40);
  m.def("subgaussian_order_pmf", &subgaussian_order_pmf);
  m.def("subgaussian_order_density", &subgaussian_order_density);
  m.def("check_square_exponential_pmf", [](const std::vector<double>& v,
                                           const std::vector<double>& p, double gamma) {
    auto r = check_square_exponential_pmf(v, p, gamma);
    return py::make_tuple(r.value, r.within_bound);
  });
  m.def("check_chain_observable_subgaussian",
        [](const Potential& pot, double beta, double tau,
           const std::function<double(double)>& F, double c) {
          auto r = check_chain_observable_subgaussian(pot, beta, tau, F, c);
          py::dict d;
          d["order"] = r.order;
          d["c_minus"] = r.c_minus;
          d["c_plus"] = r.c_plus;
          d["two_sided"] = r.two_sided;
          d["moment_value"] = r.moment_value;
          d["moment_bound"] = r.moment_bound;
          return d;
        });

  // ---- experiment driver ----------------------------------------------------------------
  m.def("experiment_catalog", [] {
    py::list out;
    for (const auto& [id, desc] : experiment_catalog()) out.append(py::make_tuple(id, desc));
    return out;
  });
  m.def("seed_from_id", &seed_from_id);
  m.def(
      "validate_config",
      [](const std::string& text) {
        ConfigIssues issues;
        ExperimentConfig cfg = normalize(parse_key_values(text), issues);
        py::dict d;
        d["errors"] = issues.errors;
        d["warnings"] = issues.warnings;
        d["effective"] = issues.errors.empty() ? render_effective(cfg) : std::string();
        return d;
      },
      py::arg("text"), "Parse and normalize a flat key = value config given as text.");
  m.def(
      "run_config",
      [](const std::string& text) {
        ConfigIssues issues;
        ExperimentConfig cfg = normalize(parse_key_values(text), issues);
        if (!issues.errors.empty()) {
          std::string all = "config rejected:";
          for (const auto& e : issues.errors) all += "\n  " + e;
          throw std::invalid_argument(all);
        }
        RunReport rep = run_experiment(cfg, issues.warnings);
        py::dict d;
        d["ok"] = rep.ok();
        d["output"] = cfg.output;
        d["notes"] = rep.notes;
        d["failures"] = rep.failures;
        d["artifacts"] = rep.artifacts;
        return d;
      },
      py::arg("text"),
      "Run an experiment from config text; artifacts land in its output directory.");
}
