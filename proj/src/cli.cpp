#include "mvem/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvem/acceptance.hpp"
#include "mvem/config.hpp"
#include "mvem/engine.hpp"
#include "mvem/experiments.hpp"
#include "mvem/io.hpp"
#include "mvem/numerics.hpp"
#include "mvem/svg.hpp"
#include "mvem/yamada.hpp"

namespace mvem {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct Override {
  CLI::Option* option;
  std::function<void(RunConfig&)> apply;
};

class Overrides {
 public:
  template <typename T, typename F>
  CLI::Option* add(CLI::App* app, const std::string& name,
                   const std::string& help, F&& apply) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *value, help);
    list_.push_back({opt, [value, apply](RunConfig& c) { apply(c, *value); }});
    return opt;
  }

  CLI::Option* flag(CLI::App* app, const std::string& name,
                    const std::string& help,
                    std::function<void(RunConfig&)> apply) {
    CLI::Option* opt = app->add_flag(name, help);
    list_.push_back({opt, std::move(apply)});
    return opt;
  }

  void apply(RunConfig& c) const {
    for (const auto& o : list_) {
      if (o.option->count() > 0) o.apply(c);
    }
  }

 private:
  std::vector<Override> list_;
};

ParamMap parse_params(const std::vector<std::string>& items) {
  ParamMap out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("flag --param: expected KEY=VALUE, got '" + item + "'");
    }
    const std::string key = item.substr(0, eq);
    try {
      std::size_t used = 0;
      const std::string text = item.substr(eq + 1);
      out[key] = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      throw ConfigError("flag --param: value for '" + key + "' is not a number");
    }
  }
  return out;
}

// LAW[:A[:B]], e.g. gaussian:1:0.25, uniform:0:1, point:0.
InitialLaw parse_initial(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  InitialLaw law;
  try {
    law.kind = initial_kind_from_string(parts.at(0));
    if (parts.size() > 1) law.a = std::stod(parts[1]);
    if (parts.size() > 2) law.b = std::stod(parts[2]);
    if (parts.size() > 3) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw ConfigError("flag --initial: expected LAW[:A[:B]], got '" + text + "'");
  }
  return law;
}

void add_model_flags(CLI::App* app, Overrides& ov) {
  ov.add<std::string>(app, "--model", "Built-in model family",
                      [](RunConfig& c, const std::string& v) {
                        if (v != c.family) c.params.clear();
                        c.family = v;
                      });
  ov.add<std::vector<std::string>>(
      app, "--param", "Model parameter KEY=VALUE (repeatable)",
      [](RunConfig& c, const std::vector<std::string>& v) {
        for (const auto& [k, x] : parse_params(v)) c.params[k] = x;
      });
}

void add_initial_flag(CLI::App* app, Overrides& ov) {
  ov.add<std::string>(app, "--initial", "Initial law LAW[:A[:B]]",
                      [](RunConfig& c, const std::string& v) {
                        c.initial = parse_initial(v);
                      });
}

void add_grid_flags(CLI::App* app, Overrides& ov) {
  ov.add<std::size_t>(app, "--M", "Finest grid steps (power of two)",
                      [](RunConfig& c, std::size_t v) { c.sweep.M = v; });
  ov.add<double>(app, "--T", "Horizon",
                 [](RunConfig& c, double v) { c.sweep.T = v; });
}

void write_outputs_dir(const RunConfig& c) { fs::create_directories(c.out); }

json fit_or_null(const SweepResult& res) {
  try {
    const RateFit f = res.fit();
    return {{"slope", f.slope},
            {"intercept", f.intercept},
            {"r_squared", f.r_squared},
            {"n_points", f.n_points},
            {"residual_max", f.residual_max}};
  } catch (const std::exception&) {
    return nullptr;
  }
}

json sweep_json(const SweepResult& res) {
  json aggs = json::array();
  for (const auto& a : res.aggregates) {
    aggs.push_back({{"key", a.key},
                    {"delta", a.delta},
                    {"n", a.n},
                    {"mean", a.mean},
                    {"std_error", a.std_error},
                    {"median", a.median},
                    {"n_ok", a.n_ok},
                    {"n_diverged", a.n_diverged}});
  }
  return {{"kind", res.kind},
          {"fit", fit_or_null(res)},
          {"aggregates", aggs},
          {"divergences", res.divergences},
          {"wall_seconds", res.wall_seconds}};
}

void write_summary(const RunConfig& c, const json& result) {
  if (!c.outputs.json) return;
  const json doc = {{"schema_version", kSchemaVersion},
                    {"subcommand", c.subcommand},
                    {"config", config_to_json(c)},
                    {"result", result}};
  write_file_atomic(fs::path(c.out) / "summary.json", doc.dump(2) + "\n");
}

void write_sweep_outputs(const RunConfig& c, const SweepResult& res,
                         const std::string& title) {
  if (c.outputs.csv) {
    write_file_atomic(fs::path(c.out) / "results.csv", sweep_results_csv(res));
  }
  if (c.outputs.svg) {
    write_file_atomic(fs::path(c.out) / (res.kind + ".svg"),
                      render_loglog_svg(sweep_plot(res, title)));
  }
  write_summary(c, sweep_json(res));
}

void print_sweep(std::ostream& out, const SweepResult& res) {
  for (const auto& a : res.aggregates) {
    out << res.kind << " key=" << a.key << " n=" << a.n
        << " delta=" << format_double(a.delta) << " mean=" << format_double(a.mean)
        << " se=" << format_double(a.std_error) << " diverged=" << a.n_diverged
        << '\n';
  }
  const json fit = fit_or_null(res);
  if (fit.is_null()) {
    out << "fit: unavailable\n";
  } else {
    out << "fit: slope=" << format_double(fit["slope"].get<double>())
        << " r2=" << format_double(fit["r_squared"].get<double>()) << '\n';
  }
}

SweepPlan base_plan(const RunConfig& c) {
  SweepPlan plan;
  plan.family = c.family;
  plan.params = c.effective_params();
  plan.initial = c.initial;
  plan.horizon = c.sweep.T;
  plan.steps = c.sweep.M;
  plan.replications = c.sweep.R;
  plan.seed = c.seed;
  plan.q = c.sweep.q;
  plan.workers = c.workers;
  plan.independent_grids = c.sweep.independent_grids;
  return plan;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
  const ModelSpec model = make_builtin_model(c.family, c.effective_params());
  const std::size_t d = model.dim();
  const BrownianGrid grid = generate_brownian_grid(d, c.simulate.N, c.sweep.T,
                                                   c.sweep.M, c.seed);
  const auto x0 = sample_initial(c.initial, d, c.simulate.N, c.seed);
  SimulationOptions opts;
  opts.record_stride = c.simulate.record_stride;
  opts.workers = c.workers;
  const ParticlePaths paths =
      simulate_interacting_em(model, grid, c.simulate.factor, x0, opts);

  if (c.outputs.csv) {
    std::ostringstream os;
    write_paths_csv(os, paths);
    write_file_atomic(fs::path(c.out) / "paths.csv", os.str());
  }
  if (c.outputs.binary) {
    std::ostringstream os(std::ios::binary);
    write_paths_binary(os, paths);
    write_file_atomic(fs::path(c.out) / "paths.bin", os.str());
  }
  json result = {{"model", paths.model_name},
                 {"dim", paths.dim},
                 {"n_particles", paths.n_particles},
                 {"n_steps", paths.n_steps},
                 {"dt", paths.dt},
                 {"n_records", paths.n_records()},
                 {"diverged", paths.diverged},
                 {"divergence_step", paths.divergence_step
                                         ? json(*paths.divergence_step)
                                         : json(nullptr)},
                 {"step_warning", paths.step_warning}};
  if (!paths.diverged) {
    const AtomSpan last = paths.snapshot(paths.n_records() - 1);
    std::vector<double> means(d), vars(d);
    std::vector<double> comp(paths.n_particles);
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t i = 0; i < paths.n_particles; ++i) comp[i] = last.atom(i)[k];
      means[k] = mean_of(comp);
      double ss = 0.0;
      for (double v : comp) ss += (v - means[k]) * (v - means[k]);
      vars[k] = paths.n_particles > 1
                    ? ss / static_cast<double>(paths.n_particles - 1)
                    : 0.0;
    }
    result["terminal_mean"] = means;
    result["terminal_variance"] = vars;
    result["sup_second_moment"] = sup_second_moment(paths);
  }
  write_summary(c, result);
  out << "simulate: " << paths.model_name << " N=" << paths.n_particles
      << " steps=" << paths.n_steps << " diverged=" << (paths.diverged ? "yes" : "no")
      << '\n';
  return kExitOk;
}

int cmd_sweep_dt(const RunConfig& c, std::ostream& out) {
  SweepPlan plan = base_plan(c);
  plan.n_list = {c.sweep.N};
  plan.factor_list = c.sweep.factor_list;
  plan.reference = {c.sweep.factor_ref, c.sweep.n_extra.value_or(0)};
  const auto res =
      run_timestep_sweep(make_builtin_model(plan.family, plan.params), plan);
  write_sweep_outputs(c, res, "strong error vs step size (" + c.family + ")");
  print_sweep(out, res);
  return kExitOk;
}

int cmd_sweep_n(const RunConfig& c, std::ostream& out) {
  SweepPlan plan = base_plan(c);
  plan.n_list = c.sweep.N_list;
  plan.factor_list = {c.sweep.factor};
  const std::size_t n_max =
      *std::max_element(c.sweep.N_list.begin(), c.sweep.N_list.end());
  plan.reference = {c.sweep.factor_ref, c.sweep.n_extra.value_or(3 * n_max)};
  const auto res =
      run_chaos_sweep(make_builtin_model(plan.family, plan.params), plan);
  write_sweep_outputs(c, res, "strong error vs particle count (" + c.family + ")");
  print_sweep(out, res);
  return kExitOk;
}

int cmd_glivenko(const RunConfig& c, std::ostream& out) {
  GlivenkoPlan plan;
  plan.dim = c.glivenko.dim;
  plan.p = c.glivenko.p;
  plan.n_list = c.glivenko.N_list;
  plan.replications = c.glivenko.R;
  plan.truth_multiple = c.glivenko.truth_multiple;
  plan.n_proj = c.glivenko.n_proj;
  plan.seed = c.seed;
  const auto res =
      run_glivenko_sweep(initial_law_sampler(c.initial, plan.dim), plan);
  write_sweep_outputs(c, res, "empirical measure convergence");
  print_sweep(out, res);
  return kExitOk;
}

int cmd_picard(const RunConfig& c, std::ostream& out) {
  const ModelSpec model = make_builtin_model(c.family, c.effective_params());
  const std::size_t d = model.dim();
  const BrownianGrid grid =
      generate_brownian_grid(d, c.picard.N, c.sweep.T, c.sweep.M, c.seed);
  const auto x0 = sample_initial(c.initial, d, c.picard.N, c.seed);
  SimulationOptions opts;
  opts.workers = c.workers;
  const PicardResult res =
      picard_mean_field(model, grid, c.picard.factor, c.picard.k_max, x0, opts);
  std::vector<double> ratios;
  for (std::size_t k = 1; k < res.distances.size(); ++k) {
    ratios.push_back(res.distances[k - 1] > 0.0
                         ? res.distances[k] / res.distances[k - 1]
                         : 0.0);
  }
  if (c.outputs.csv) {
    std::string csv = "k,distance\n";
    for (std::size_t k = 0; k < res.distances.size(); ++k) {
      csv += std::to_string(k + 1) + "," + format_double(res.distances[k]) + "\n";
    }
    write_file_atomic(fs::path(c.out) / "results.csv", csv);
  }
  if (c.outputs.svg) {
    LogLogPlot plot;
    plot.title = "Picard iteration distances (" + c.family + ")";
    plot.x_label = "iteration k";
    plot.y_label = "max_t W1(mu^k, mu^(k-1))";
    PlotSeries s;
    s.label = "d_k";
    for (std::size_t k = 0; k < res.distances.size(); ++k) {
      s.xs.push_back(static_cast<double>(k + 1));
      s.ys.push_back(res.distances[k]);
    }
    plot.series.push_back(std::move(s));
    write_file_atomic(fs::path(c.out) / "picard.svg", render_loglog_svg(plot));
  }
  write_summary(c, {{"distances", res.distances},
                    {"ratios", ratios},
                    {"diverged", res.diverged}});
  for (std::size_t k = 0; k < res.distances.size(); ++k) {
    out << "picard k=" << k + 1 << " d=" << format_double(res.distances[k]) << '\n';
  }
  return kExitOk;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

int cmd_validate(const RunConfig& c, std::ostream& out) {
  const ModelSpec model = make_builtin_model(c.family, c.effective_params());
  const ValidationReport rep = validate_model(model, c.probe);
  std::string csv = "check,observed,declared,pass,note\n";
  json entries = json::array();
  for (const auto& e : rep.entries) {
    csv += csv_quote(e.check) + "," + format_double(e.observed) + "," +
           format_double(e.declared) + "," + (e.pass ? "1" : "0") + "," +
           csv_quote(e.note) + "\n";
    entries.push_back({{"check", e.check},
                       {"observed", e.observed},
                       {"declared", e.declared},
                       {"pass", e.pass},
                       {"note", e.note}});
    out << (e.pass ? "[PASS] " : "[FAIL] ") << e.check
        << " observed=" << format_double(e.observed)
        << " declared=" << format_double(e.declared) << '\n';
  }
  if (c.outputs.csv) write_file_atomic(fs::path(c.out) / "results.csv", csv);
  write_summary(c, {{"model", rep.model}, {"pass", rep.pass()}, {"entries", entries}});
  return kExitOk;
}

int cmd_yamada(const RunConfig& c, std::ostream& out) {
  const Smoothing s = c.yamada.gamma ? make_smoothing(*c.yamada.gamma, c.yamada.eps)
                                     : make_smoothing_eps(c.yamada.eps);
  const SmoothingReport rep =
      check_smoothing(s, c.yamada.n_probe, c.yamada.tol, c.yamada.fd_tol);
  if (c.outputs.csv) {
    std::string csv =
        "x,v,v_prime,v_double_prime,lower_bound,upper_bound,curvature_bound\n";
    auto samples = rep.samples;
    std::sort(samples.begin(), samples.end(),
              [](const auto& a, const auto& b) { return a.x < b.x; });
    for (const auto& p : samples) {
      csv += format_double(p.x) + "," + format_double(p.v) + "," +
             format_double(p.v_prime) + "," + format_double(p.v_double_prime) +
             "," + format_double(p.lower_bound) + "," +
             format_double(p.upper_bound) + "," +
             format_double(p.curvature_bound) + "\n";
    }
    write_file_atomic(fs::path(c.out) / "results.csv", csv);
  }
  json checks = json::array();
  for (const auto& k : rep.checks) {
    checks.push_back({{"name", k.name},
                      {"worst", k.worst},
                      {"tolerance", k.tolerance},
                      {"pass", k.pass}});
    out << (k.pass ? "[PASS] " : "[FAIL] ") << k.name
        << " worst=" << format_double(k.worst) << '\n';
  }
  write_summary(c, {{"gamma", rep.gamma},
                    {"eps", rep.eps},
                    {"pass", rep.pass()},
                    {"checks", checks}});
  return rep.pass() ? kExitOk : kExitCriterionFailed;
}

int cmd_accept(const RunConfig& c, std::ostream& out) {
  AcceptanceConfig ac;
  ac.budget = c.accept.budget;
  ac.seed = c.seed;
  ac.workers = c.workers;
  ac.only = c.accept.only;
  ac.zero_tolerance = c.accept.zero_tolerance;
  const AcceptanceReport rep = run_acceptance_suite(ac);
  for (const auto& r : rep.criteria) {
    out << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << " " << r.name << " ("
        << format_double(r.wall_seconds) << " s)";
    if (!r.error.empty()) out << " error: " << r.error;
    out << '\n';
  }
  write_summary(c, rep.to_json());
  out << (rep.pass() ? "acceptance: PASS" : "acceptance: FAIL") << '\n';
  return rep.pass() ? kExitOk : kExitCriterionFailed;
}

int dispatch(const RunConfig& c, std::ostream& out) {
  write_outputs_dir(c);
  const std::string& s = c.subcommand;
  if (s == "simulate") return cmd_simulate(c, out);
  if (s == "sweep-dt") return cmd_sweep_dt(c, out);
  if (s == "sweep-n") return cmd_sweep_n(c, out);
  if (s == "glivenko") return cmd_glivenko(c, out);
  if (s == "picard") return cmd_picard(c, out);
  if (s == "validate-model") return cmd_validate(c, out);
  if (s == "yamada-check") return cmd_yamada(c, out);
  return cmd_accept(c, out);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Particle simulator and convergence laboratory for mean-field SDEs",
               "mvem"};
  app.require_subcommand(1);
  Overrides ov;
  std::string config_path;

  std::map<std::string, CLI::App*> subs;
  const std::map<std::string, std::string> help{
      {"simulate", "Simulate the interacting particle system"},
      {"sweep-dt", "Strong error against step size"},
      {"sweep-n", "Strong error against particle count"},
      {"glivenko", "Empirical measure convergence in Wasserstein distance"},
      {"picard", "Picard distribution iteration"},
      {"validate-model", "Probe a model against its declared regularity"},
      {"yamada-check", "Tabulate and check the Yamada-Watanabe smoothing"},
      {"accept", "Run the acceptance suite"}};
  for (const auto& name : subcommands()) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    subs[name] = sub;
    sub->add_option("--config", config_path, "JSON config file");
    ov.add<std::uint64_t>(sub, "--seed", "Master seed",
                          [](RunConfig& c, std::uint64_t v) { c.seed = v; });
    ov.add<std::size_t>(sub, "--workers", "Worker threads (0 = default)",
                        [](RunConfig& c, std::size_t v) { c.workers = v; });
    ov.add<std::string>(sub, "--out", "Output directory",
                        [](RunConfig& c, const std::string& v) { c.out = v; });
    ov.flag(sub, "--no-csv", "Skip CSV output",
            [](RunConfig& c) { c.outputs.csv = false; });
    ov.flag(sub, "--no-json", "Skip summary.json",
            [](RunConfig& c) { c.outputs.json = false; });
    ov.flag(sub, "--no-svg", "Skip SVG plots",
            [](RunConfig& c) { c.outputs.svg = false; });
  }

  CLI::App* sim = subs["simulate"];
  add_model_flags(sim, ov);
  add_initial_flag(sim, ov);
  add_grid_flags(sim, ov);
  ov.add<std::size_t>(sim, "--N", "Particles",
                      [](RunConfig& c, std::size_t v) { c.simulate.N = v; });
  ov.add<std::size_t>(sim, "--factor", "Step as a multiple of T/M",
                      [](RunConfig& c, std::size_t v) { c.simulate.factor = v; });
  ov.add<std::size_t>(sim, "--record-stride", "Steps per recorded state",
                      [](RunConfig& c, std::size_t v) { c.simulate.record_stride = v; });
  ov.flag(sim, "--binary", "Also write paths.bin",
          [](RunConfig& c) { c.outputs.binary = true; });

  for (const char* name : {"sweep-dt", "sweep-n"}) {
    CLI::App* sub = subs[name];
    add_model_flags(sub, ov);
    add_initial_flag(sub, ov);
    add_grid_flags(sub, ov);
    ov.add<std::size_t>(sub, "--R", "Replications",
                        [](RunConfig& c, std::size_t v) { c.sweep.R = v; });
    ov.add<std::size_t>(sub, "--factor-ref", "Reference step multiple",
                        [](RunConfig& c, std::size_t v) { c.sweep.factor_ref = v; });
    ov.add<std::size_t>(sub, "--n-extra", "Extra reference particles",
                        [](RunConfig& c, std::size_t v) { c.sweep.n_extra = v; });
    ov.add<double>(sub, "--q", "Error moment (1 or 2)",
                   [](RunConfig& c, double v) { c.sweep.q = v; });
  }
  CLI::App* sdt = subs["sweep-dt"];
  ov.add<std::size_t>(sdt, "--N", "Particles",
                      [](RunConfig& c, std::size_t v) { c.sweep.N = v; });
  ov.add<std::vector<std::size_t>>(sdt, "--factors", "Step multiples, comma separated",
                                   [](RunConfig& c, const std::vector<std::size_t>& v) {
                                     c.sweep.factor_list = v;
                                   })
      ->delimiter(',');
  ov.flag(sdt, "--independent-grids", "Fresh noise per step size",
          [](RunConfig& c) { c.sweep.independent_grids = true; });
  CLI::App* sn = subs["sweep-n"];
  ov.add<std::vector<std::size_t>>(sn, "--N-list", "Particle counts, comma separated",
                                   [](RunConfig& c, const std::vector<std::size_t>& v) {
                                     c.sweep.N_list = v;
                                   })
      ->delimiter(',');
  ov.add<std::size_t>(sn, "--factor", "Step as a multiple of T/M",
                      [](RunConfig& c, std::size_t v) { c.sweep.factor = v; });

  CLI::App* gl = subs["glivenko"];
  add_initial_flag(gl, ov);
  ov.add<std::size_t>(gl, "--dim", "Dimension",
                      [](RunConfig& c, std::size_t v) { c.glivenko.dim = v; });
  ov.add<double>(gl, "--p", "Wasserstein order",
                 [](RunConfig& c, double v) { c.glivenko.p = v; });
  ov.add<std::vector<std::size_t>>(gl, "--N-list", "Sample sizes, comma separated",
                                   [](RunConfig& c, const std::vector<std::size_t>& v) {
                                     c.glivenko.N_list = v;
                                   })
      ->delimiter(',');
  ov.add<std::size_t>(gl, "--R", "Replications",
                      [](RunConfig& c, std::size_t v) { c.glivenko.R = v; });
  ov.add<std::size_t>(gl, "--truth-multiple", "Surrogate size multiple",
                      [](RunConfig& c, std::size_t v) { c.glivenko.truth_multiple = v; });
  ov.add<std::size_t>(gl, "--n-proj", "Sliced projections for dim > 1",
                      [](RunConfig& c, std::size_t v) { c.glivenko.n_proj = v; });

  CLI::App* pc = subs["picard"];
  add_model_flags(pc, ov);
  add_initial_flag(pc, ov);
  add_grid_flags(pc, ov);
  ov.add<std::size_t>(pc, "--N", "Particles",
                      [](RunConfig& c, std::size_t v) { c.picard.N = v; });
  ov.add<std::size_t>(pc, "--factor", "Step as a multiple of T/M",
                      [](RunConfig& c, std::size_t v) { c.picard.factor = v; });
  ov.add<std::size_t>(pc, "--k-max", "Iterations",
                      [](RunConfig& c, std::size_t v) { c.picard.k_max = v; });

  CLI::App* vm = subs["validate-model"];
  add_model_flags(vm, ov);
  ov.add<double>(vm, "--box-radius", "Probe box radius",
                 [](RunConfig& c, double v) { c.probe.box_radius = v; });
  ov.add<std::size_t>(vm, "--n-pairs", "Probe pairs",
                      [](RunConfig& c, std::size_t v) { c.probe.n_pairs = v; });
  ov.add<std::uint64_t>(vm, "--probe-seed", "Probe seed",
                        [](RunConfig& c, std::uint64_t v) { c.probe.seed = v; });

  CLI::App* ym = subs["yamada-check"];
  ov.add<double>(ym, "--gamma", "gamma > 1 (default e^(1/eps))",
                 [](RunConfig& c, double v) { c.yamada.gamma = v; });
  ov.add<double>(ym, "--eps", "eps > 0",
                 [](RunConfig& c, double v) { c.yamada.eps = v; });
  ov.add<std::size_t>(ym, "--n-probe", "Probe points",
                      [](RunConfig& c, std::size_t v) { c.yamada.n_probe = v; });

  CLI::App* ac = subs["accept"];
  ov.add<std::string>(ac, "--budget", "full or quick",
                      [](RunConfig& c, const std::string& v) {
                        try {
                          c.accept.budget = budget_from_string(v);
                        } catch (const std::exception& e) {
                          throw ConfigError(std::string("flag --budget: ") + e.what());
                        }
                      });
  ov.add<std::vector<int>>(ac, "--only", "Criterion ids, comma separated",
                           [](RunConfig& c, const std::vector<int>& v) {
                             c.accept.only = {v.begin(), v.end()};
                           })
      ->delimiter(',');
  ov.add<std::vector<int>>(ac, "--zero-tolerance",
                           "Criterion ids whose tolerance is set to zero",
                           [](RunConfig& c, const std::vector<int>& v) {
                             c.accept.zero_tolerance = {v.begin(), v.end()};
                           })
      ->delimiter(',');

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  RunConfig config;
  try {
    if (!config_path.empty()) config = load_config(config_path);
    for (const auto& [name, sub] : subs) {
      if (sub->parsed()) config.subcommand = name;
    }
    ov.apply(config);
    config.validate();
  } catch (const ConfigError& e) {
    err << "mvem: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "mvem: config: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    return dispatch(config, out);
  } catch (const std::invalid_argument& e) {
    err << "mvem: invalid configuration: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "mvem: " << e.what() << '\n';
    return kExitRuntimeError;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace mvem
