#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mvem/acceptance.hpp"
#include "mvem/cli.hpp"
#include "mvem/engine.hpp"
#include "mvem/experiments.hpp"
#include "mvem/measure.hpp"
#include "mvem/model.hpp"
#include "mvem/yamada.hpp"

namespace py = pybind11;
using namespace mvem;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (n,) or (n, d) array as an owned empirical measure.
EmpiricalMeasure to_measure(const Array& a) {
  if (a.ndim() != 1 && a.ndim() != 2) {
    throw std::invalid_argument("atoms must have shape (n,) or (n, d)");
  }
  const std::size_t dim = a.ndim() == 2 ? static_cast<std::size_t>(a.shape(1)) : 1;
  std::vector<double> data(a.data(), a.data() + a.size());
  return EmpiricalMeasure(std::move(data), dim);
}

InitialLaw make_law(const std::string& law, double a, double b) {
  return {initial_kind_from_string(law), a, b};
}

py::dict sweep_dict(const SweepResult& res) {
  py::list aggs;
  for (const auto& a : res.aggregates) {
    py::dict d;
    d["key"] = a.key;
    d["delta"] = a.delta;
    d["n"] = a.n;
    d["mean"] = a.mean;
    d["std_error"] = a.std_error;
    d["median"] = a.median;
    d["n_ok"] = a.n_ok;
    d["n_diverged"] = a.n_diverged;
    aggs.append(d);
  }
  py::dict out;
  out["kind"] = res.kind;
  out["aggregates"] = aggs;
  out["divergences"] = res.divergences;
  out["csv"] = sweep_results_csv(res);
  try {
    out["fit"] = res.fit();
  } catch (const std::exception&) {
    out["fit"] = py::none();
  }
  return out;
}

SweepPlan make_plan(const std::string& family, const ParamMap& params,
                    const std::vector<std::size_t>& n_list,
                    const std::vector<std::size_t>& factors, double horizon,
                    std::size_t steps, std::size_t replications,
                    std::size_t factor_ref, std::size_t n_extra, double q,
                    std::uint64_t seed, const std::string& law, double a,
                    double b, std::size_t workers) {
  SweepPlan plan;
  plan.family = family;
  plan.params = params;
  plan.n_list = n_list;
  plan.factor_list = factors;
  plan.horizon = horizon;
  plan.steps = steps;
  plan.replications = replications;
  plan.reference = {factor_ref, n_extra};
  plan.q = q;
  plan.seed = seed;
  plan.initial = make_law(law, a, b);
  plan.workers = workers;
  return plan;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Particle simulator and convergence laboratory for mean-field SDEs";

  py::register_exception<std::length_error>(m, "CapacityError", PyExc_ValueError);

  m.def("builtin_families", &builtin_families);
  m.def("builtin_defaults",
        [](const std::string& family) { return builtin_defaults(family); },
        py::arg("family"));

  m.def(
      "validate_model",
      [](const std::string& family, const ParamMap& params, std::size_t n_pairs,
         std::uint64_t seed) {
        ProbeConfig probe;
        probe.n_pairs = n_pairs;
        probe.seed = seed;
        const auto rep = validate_model(make_builtin_model(family, params), probe);
        py::list entries;
        for (const auto& e : rep.entries) {
          py::dict d;
          d["check"] = e.check;
          d["observed"] = e.observed;
          d["declared"] = e.declared;
          d["pass"] = e.pass;
          d["note"] = e.note;
          entries.append(d);
        }
        py::dict out;
        out["model"] = rep.model;
        out["pass"] = rep.pass();
        out["entries"] = entries;
        return out;
      },
      py::arg("family"), py::arg("params") = ParamMap{}, py::arg("n_pairs") = 1000,
      py::arg("seed") = 1);

  m.def(
      "wasserstein_1d",
      [](double p, const Array& a, const Array& b) {
        return wasserstein_1d(p, to_measure(a), to_measure(b));
      },
      py::arg("p"), py::arg("a"), py::arg("b"));
  m.def(
      "wasserstein_matching",
      [](double p, const Array& a, const Array& b) {
        return wasserstein_matching(p, to_measure(a), to_measure(b));
      },
      py::arg("p"), py::arg("a"), py::arg("b"));
  m.def(
      "wasserstein_sliced",
      [](double p, const Array& a, const Array& b, std::size_t n_proj,
         std::uint64_t seed) {
        return wasserstein_sliced(p, to_measure(a), to_measure(b), n_proj, seed);
      },
      py::arg("p"), py::arg("a"), py::arg("b"), py::arg("n_proj") = 64,
      py::arg("seed") = 0);
  m.def(
      "coupling_upper_bound",
      [](double p, const Array& a, const Array& b) {
        return coupling_upper_bound(p, to_measure(a), to_measure(b));
      },
      py::arg("p"), py::arg("a"), py::arg("b"));

  py::class_<ParticlePaths>(m, "ParticlePaths")
      .def_readonly("model_name", &ParticlePaths::model_name)
      .def_readonly("dim", &ParticlePaths::dim)
      .def_readonly("n_particles", &ParticlePaths::n_particles)
      .def_readonly("n_steps", &ParticlePaths::n_steps)
      .def_readonly("dt", &ParticlePaths::dt)
      .def_readonly("record_stride", &ParticlePaths::record_stride)
      .def_readonly("seed", &ParticlePaths::seed)
      .def_readonly("diverged", &ParticlePaths::diverged)
      .def_readonly("divergence_step", &ParticlePaths::divergence_step)
      .def_property_readonly("times",
                             [](const ParticlePaths& p) {
                               std::vector<double> t(p.n_records());
                               for (std::size_t k = 0; k < t.size(); ++k) t[k] = p.time(k);
                               return t;
                             })
      .def_property_readonly(
          "states",
          [](const ParticlePaths& p) {
            Array out({p.n_records(), p.n_particles, p.dim});
            std::copy(p.states.begin(), p.states.end(), out.mutable_data());
            return out;
          })
      .def("to_bytes", [](const ParticlePaths& p) {
        std::ostringstream os(std::ios::binary);
        write_paths_binary(os, p);
        return py::bytes(os.str());
      });

  m.def(
      "simulate",
      [](const std::string& family, const ParamMap& params, std::size_t n,
         std::size_t steps, double horizon, std::uint64_t seed, std::size_t factor,
         const std::string& law, double a, double b, std::size_t record_stride,
         std::size_t workers) {
        const ModelSpec model = make_builtin_model(family, params);
        const BrownianGrid grid(model.dim(), n, horizon, steps, seed);
        const auto x0 = sample_initial(make_law(law, a, b), model.dim(), n, seed);
        SimulationOptions opts;
        opts.record_stride = record_stride;
        opts.workers = workers;
        py::gil_scoped_release release;
        return simulate_interacting_em(model, grid, factor, x0, opts);
      },
      py::arg("family"), py::arg("params") = ParamMap{}, py::arg("n") = 1024,
      py::arg("steps") = 1024, py::arg("horizon") = 1.0, py::arg("seed") = kDefaultSeed,
      py::arg("factor") = 1, py::arg("law") = "gaussian", py::arg("a") = 1.0,
      py::arg("b") = 0.25, py::arg("record_stride") = 1, py::arg("workers") = 0);

  m.def("strong_error", &strong_error_sup, py::arg("a"), py::arg("b"),
        py::arg("q") = 2.0);

  py::class_<RateFit>(m, "RateFit")
      .def_readonly("slope", &RateFit::slope)
      .def_readonly("intercept", &RateFit::intercept)
      .def_readonly("r_squared", &RateFit::r_squared)
      .def_readonly("n_points", &RateFit::n_points)
      .def_readonly("residual_max", &RateFit::residual_max);
  m.def("fit_rate", &fit_rate, py::arg("xs"), py::arg("ys"));

  m.def(
      "oracle_linear_gaussian",
      [](double a, double c, double s, double m0, double v0, double t) {
        const auto g = oracle_linear_gaussian(a, c, s, m0, v0, t);
        return py::make_tuple(g.mean, g.variance);
      },
      py::arg("a"), py::arg("c"), py::arg("s"), py::arg("m0"), py::arg("v0"),
      py::arg("t"));

  py::class_<Smoothing>(m, "Smoothing")
      .def(py::init<double, double>(), py::arg("gamma"), py::arg("eps"))
      .def_static("from_eps", &make_smoothing_eps, py::arg("eps"))
      .def_property_readonly("gamma", &Smoothing::gamma)
      .def_property_readonly("eps", &Smoothing::eps)
      .def("psi", &Smoothing::psi)
      .def("psi_integral", &Smoothing::psi_integral)
      .def("v", &Smoothing::v)
      .def("v_prime", &Smoothing::v_prime)
      .def("v_double_prime", &Smoothing::v_double_prime)
      .def(
          "check",
          [](const Smoothing& s, std::size_t n_probe, double tol, double fd_tol) {
            const auto rep = check_smoothing(s, n_probe, tol, fd_tol);
            py::dict out;
            for (const auto& c : rep.checks) out[py::str(c.name)] = c.pass;
            return py::make_tuple(rep.pass(), out);
          },
          py::arg("n_probe") = 1000, py::arg("tol") = 1e-8, py::arg("fd_tol") = 1e-6);

  m.def(
      "picard",
      [](const std::string& family, const ParamMap& params, std::size_t n,
         std::size_t steps, double horizon, std::size_t k_max, std::uint64_t seed,
         std::size_t factor) {
        const ModelSpec model = make_builtin_model(family, params);
        const BrownianGrid grid(model.dim(), n, horizon, steps, seed);
        const auto x0 =
            sample_initial({InitialKind::kGaussian, 1.0, 0.25}, model.dim(), n, seed);
        py::gil_scoped_release release;
        return picard_mean_field(model, grid, factor, k_max, x0).distances;
      },
      py::arg("family"), py::arg("params") = ParamMap{}, py::arg("n") = 512,
      py::arg("steps") = 256, py::arg("horizon") = 1.0, py::arg("k_max") = 8,
      py::arg("seed") = kDefaultSeed, py::arg("factor") = 1);

  m.def(
      "timestep_sweep",
      [](const std::string& family, const ParamMap& params, std::size_t n,
         const std::vector<std::size_t>& factors, double horizon, std::size_t steps,
         std::size_t replications, std::size_t factor_ref, double q,
         std::uint64_t seed, std::size_t workers) {
        const SweepPlan plan =
            make_plan(family, params, {n}, factors, horizon, steps, replications,
                      factor_ref, 0, q, seed, "gaussian", 1.0, 0.25, workers);
        SweepResult res;
        {
          py::gil_scoped_release release;
          res = run_timestep_sweep(make_builtin_model(family, params), plan);
        }
        return sweep_dict(res);
      },
      py::arg("family"), py::arg("params") = ParamMap{}, py::arg("n") = 256,
      py::arg("factors") = std::vector<std::size_t>{8, 16, 32, 64},
      py::arg("horizon") = 1.0, py::arg("steps") = 1024, py::arg("replications") = 4,
      py::arg("factor_ref") = 1, py::arg("q") = 2.0, py::arg("seed") = kDefaultSeed,
      py::arg("workers") = 0);

  m.def(
      "chaos_sweep",
      [](const std::string& family, const ParamMap& params,
         const std::vector<std::size_t>& n_list, std::size_t factor, double horizon,
         std::size_t steps, std::size_t replications, std::size_t n_extra, double q,
         std::uint64_t seed, std::size_t workers) {
        const SweepPlan plan =
            make_plan(family, params, n_list, {factor}, horizon, steps, replications,
                      factor, n_extra, q, seed, "gaussian", 1.0, 0.25, workers);
        SweepResult res;
        {
          py::gil_scoped_release release;
          res = run_chaos_sweep(make_builtin_model(family, params), plan);
        }
        return sweep_dict(res);
      },
      py::arg("family"), py::arg("params") = ParamMap{},
      py::arg("n_list") = std::vector<std::size_t>{64, 128, 256},
      py::arg("factor") = 4, py::arg("horizon") = 1.0, py::arg("steps") = 256,
      py::arg("replications") = 4, py::arg("n_extra") = 768, py::arg("q") = 2.0,
      py::arg("seed") = kDefaultSeed, py::arg("workers") = 0);

  m.def(
      "glivenko_sweep",
      [](const std::string& law, double a, double b, std::size_t dim,
         const std::vector<std::size_t>& n_list, std::size_t replications, double p,
         std::uint64_t seed) {
        GlivenkoPlan plan;
        plan.dim = dim;
        plan.n_list = n_list;
        plan.replications = replications;
        plan.p = p;
        plan.seed = seed;
        const auto res =
            run_glivenko_sweep(initial_law_sampler(make_law(law, a, b), dim), plan);
        return sweep_dict(res);
      },
      py::arg("law") = "uniform", py::arg("a") = 0.0, py::arg("b") = 1.0,
      py::arg("dim") = 1, py::arg("n_list") = std::vector<std::size_t>{32, 64, 128, 256},
      py::arg("replications") = 16, py::arg("p") = 1.0, py::arg("seed") = kDefaultSeed);

  m.def(
      "run_criterion",
      [](int id, const std::string& budget, std::uint64_t seed) {
        AcceptanceConfig config;
        config.budget = budget_from_string(budget);
        config.seed = seed;
        CriterionResult r;
        {
          py::gil_scoped_release release;
          r = run_criterion(id, config);
        }
        py::dict out;
        out["id"] = r.id;
        out["name"] = r.name;
        out["pass"] = r.pass;
        out["tolerance"] = r.tolerance;
        out["measured"] = r.measured.dump();
        out["seed"] = r.seed;
        out["error"] = r.error;
        return out;
      },
      py::arg("id"), py::arg("budget") = "quick", py::arg("seed") = kDefaultSeed);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
