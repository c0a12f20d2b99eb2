#include "mvem/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include "mvem/cli.hpp"
#include "mvem/engine.hpp"
#include "mvem/experiments.hpp"
#include "mvem/io.hpp"
#include "mvem/measure.hpp"
#include "mvem/numerics.hpp"
#include "mvem/rng.hpp"
#include "mvem/yamada.hpp"

namespace mvem {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Context {
  const AcceptanceConfig& config;
  int id;
  std::uint64_t seed;
  bool quick() const { return config.budget == Budget::kQuick; }
  bool zero_tol() const { return config.zero_tolerance.contains(id); }
};

std::vector<std::size_t> powers_of_two(int lo, int hi) {
  std::vector<std::size_t> out;
  for (int e = lo; e <= hi; ++e) out.push_back(std::size_t{1} << e);
  return out;
}

json aggregates_json(const SweepResult& res) {
  json rows = json::array();
  for (const auto& a : res.aggregates) {
    rows.push_back({{"key", a.key},
                    {"delta", a.delta},
                    {"n", a.n},
                    {"mean", a.mean},
                    {"std_error", a.std_error},
                    {"median", a.median},
                    {"n_ok", a.n_ok},
                    {"n_diverged", a.n_diverged}});
  }
  return rows;
}

json fit_json(const RateFit& f) {
  return {{"slope", f.slope},
          {"intercept", f.intercept},
          {"r_squared", f.r_squared},
          {"n_points", f.n_points},
          {"residual_max", f.residual_max}};
}

// Medians ordered from the largest step to the smallest.
std::vector<double> medians_coarse_to_fine(const SweepResult& res) {
  std::vector<std::pair<double, double>> by_delta;
  for (const auto& a : res.aggregates) by_delta.emplace_back(a.delta, a.median);
  std::sort(by_delta.begin(), by_delta.end(),
            [](const auto& x, const auto& y) { return x.first > y.first; });
  std::vector<double> out;
  for (const auto& [d, m] : by_delta) out.push_back(m);
  return out;
}

SweepPlan holder_timestep_plan(const Context& ctx, double alpha) {
  SweepPlan plan;
  plan.family = "holder_diffusion_1d";
  plan.params = {{"alpha", alpha}, {"beta", 1.0},   {"kappa", 1.0},
                 {"S", 10.0},      {"lambda", 1.0}, {"K1", 0.5}};
  plan.initial = {InitialKind::kGaussian, 1.0, 0.25};
  plan.n_list = {ctx.quick() ? std::size_t{512} : std::size_t{4096}};
  plan.steps = std::size_t{1} << 14;
  plan.horizon = 1.0;
  plan.factor_list = powers_of_two(5, 10);
  plan.reference = {4, 0};
  plan.replications = ctx.quick() ? 4 : 16;
  plan.q = 2.0;
  plan.seed = ctx.seed;
  plan.workers = ctx.config.workers;
  return plan;
}

void lipschitz_timestep(const Context& ctx, CriterionResult& out) {
  const SweepPlan plan = holder_timestep_plan(ctx, 1.0);
  const auto res = run_timestep_sweep(
      make_builtin_model(plan.family, plan.params), plan);
  const RateFit fit = res.fit();
  const double lo = ctx.zero_tol() ? 1.0 : 0.7;
  const double hi = ctx.zero_tol() ? 1.0 : 1.6;
  out.tolerance = "slope in [" + format_double(lo) + ", " + format_double(hi) + "]";
  out.measured = {{"fit", fit_json(fit)},
                  {"aggregates", aggregates_json(res)},
                  {"divergences", res.divergences}};
  out.pass = fit.slope >= lo && fit.slope <= hi && res.divergences == 0;
}

void holder_three_quarter(const Context& ctx, CriterionResult& out) {
  const SweepPlan plan = holder_timestep_plan(ctx, 0.75);
  const auto res = run_timestep_sweep(
      make_builtin_model(plan.family, plan.params), plan);
  const RateFit fit = res.fit();
  const auto med = medians_coarse_to_fine(res);
  bool monotone = true;
  for (std::size_t i = 1; i < med.size(); ++i) monotone = monotone && med[i] <= med[i - 1];
  const double min_slope = ctx.zero_tol() ? 0.5 : 0.3;
  out.tolerance = "median non-increasing as delta decreases; slope >= " +
                  format_double(min_slope) + (ctx.zero_tol() ? " (exact)" : "");
  out.measured = {{"fit", fit_json(fit)},
                  {"medians_coarse_to_fine", med},
                  {"monotone", monotone},
                  {"aggregates", aggregates_json(res)}};
  out.pass = monotone && (ctx.zero_tol() ? fit.slope == min_slope
                                         : fit.slope >= min_slope) &&
             res.divergences == 0;
}

void holder_half(const Context& ctx, CriterionResult& out) {
  const SweepPlan plan = holder_timestep_plan(ctx, 0.5);
  const auto res = run_timestep_sweep(
      make_builtin_model(plan.family, plan.params), plan);
  const auto med = medians_coarse_to_fine(res);
  bool strict = true;
  for (std::size_t i = 1; i < med.size(); ++i) {
    // Zero tolerance demands a drop by the full factor 2 per level.
    strict = strict && (ctx.zero_tol() ? med[i] <= 0.5 * med[i - 1]
                                       : med[i] < med[i - 1]);
  }
  const RateFit fit = res.fit();
  out.tolerance = "median strictly decreasing from largest to smallest delta; "
                  "slope reported only";
  out.measured = {{"fit", fit_json(fit)},
                  {"medians_coarse_to_fine", med},
                  {"aggregates", aggregates_json(res)}};
  out.pass = strict && res.divergences == 0;
}

void chaos_1d(const Context& ctx, CriterionResult& out) {
  SweepPlan plan;
  plan.family = "linear_mf";
  plan.params = {{"a", -1.0}, {"c", 0.5}, {"s", 1.0}};
  plan.initial = {InitialKind::kGaussian, 1.0, 0.25};
  plan.n_list = powers_of_two(6, ctx.quick() ? 10 : 12);
  plan.steps = std::size_t{1} << 12;
  plan.factor_list = {4};
  plan.reference = {4, 3 * plan.n_list.back()};
  plan.replications = ctx.quick() ? 4 : 8;
  plan.seed = ctx.seed;
  plan.workers = ctx.config.workers;
  const auto res = run_chaos_sweep(make_builtin_model(plan.family, plan.params),
                                   plan);
  const RateFit fit = res.fit();
  const double bound = ctx.zero_tol() ? -1e9 : -0.2;
  out.tolerance = "slope <= " + format_double(bound);
  out.measured = {{"fit", fit_json(fit)}, {"aggregates", aggregates_json(res)}};
  out.pass = fit.slope <= bound && res.divergences == 0;
}

void chaos_multid(const Context& ctx, CriterionResult& out) {
  SweepPlan plan;
  plan.family = "bounded_holder_multid";
  plan.params = {{"d", 5.0}, {"A", -1.0}, {"alpha", 0.5}, {"c", 1.0},
                 {"eps", 0.1}};
  plan.initial = {InitialKind::kGaussian, 0.5, 0.25};
  plan.n_list = powers_of_two(6, ctx.quick() ? 9 : 10);
  plan.steps = std::size_t{1} << 10;
  plan.factor_list = {4};
  plan.reference = {4, 3 * plan.n_list.back()};
  plan.replications = 4;
  plan.seed = ctx.seed;
  plan.workers = ctx.config.workers;
  const auto res = run_chaos_sweep(make_builtin_model(plan.family, plan.params),
                                   plan);
  const RateFit fit = res.fit();
  const double bound = ctx.zero_tol() ? -1e9 : -0.15;
  out.tolerance = "slope <= " + format_double(bound);
  out.measured = {{"fit", fit_json(fit)}, {"aggregates", aggregates_json(res)}};
  out.pass = fit.slope <= bound && res.divergences == 0;
}

void closed_form_oracle(const Context& ctx, CriterionResult& out) {
  const double a = -1.0, c = 0.5, s = 1.0, m0 = 1.0, v0 = 0.25, T = 1.0;
  const std::size_t n = ctx.quick() ? 2000 : 10000;
  const std::size_t M = 1024;
  const auto model = make_builtin_model("linear_mf", {{"a", a}, {"c", c}, {"s", s}});
  const BrownianGrid grid(1, n, T, M, ctx.seed);
  const auto x0 = sample_initial({InitialKind::kGaussian, m0, v0}, 1, n, ctx.seed);
  SimulationOptions opts;
  opts.record_stride = M;
  opts.workers = ctx.config.workers;
  const auto paths = simulate_interacting_em(model, grid, 1, x0, opts);
  const auto last = paths.snapshot(paths.n_records() - 1).data;
  const double mean = mean_of(last);
  double ss = 0.0;
  for (double v : last) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(n - 1);
  const auto oracle = oracle_linear_gaussian(a, c, s, m0, v0, T);
  const double mean_tol = ctx.zero_tol() ? 0.0 : 5.0 * std::sqrt(var / static_cast<double>(n));
  const double var_tol = ctx.zero_tol() ? 0.0 : 0.1;
  const double mean_err = std::abs(mean - oracle.mean);
  const double var_rel = std::abs(var - oracle.variance) / oracle.variance;
  out.tolerance = "|mean - m_T| <= 5 sd/sqrt(N) (= " + format_double(mean_tol) +
                  "), |var - v_T| / v_T <= " + format_double(var_tol);
  out.measured = {{"sample_mean", mean},   {"oracle_mean", oracle.mean},
                  {"sample_variance", var}, {"oracle_variance", oracle.variance},
                  {"mean_error", mean_err}, {"variance_rel_error", var_rel},
                  {"N", n}};
  out.pass = !paths.diverged && mean_err <= mean_tol && var_rel <= var_tol;
}

void glivenko(const Context& ctx, CriterionResult& out) {
  GlivenkoPlan plan;
  plan.dim = 1;
  plan.p = 1.0;
  plan.n_list = powers_of_two(5, ctx.quick() ? 10 : 12);
  plan.replications = ctx.quick() ? 8 : 32;
  plan.seed = ctx.seed;
  const auto res = run_glivenko_sweep(
      initial_law_sampler({InitialKind::kUniform, 0.0, 1.0}, 1), plan);
  const RateFit fit = res.fit();
  const double bound = ctx.zero_tol() ? -1e9 : -0.25;
  out.tolerance = "slope <= " + format_double(bound);
  out.measured = {{"fit", fit_json(fit)}, {"aggregates", aggregates_json(res)}};
  out.pass = fit.slope <= bound;
}

void picard(const Context& ctx, CriterionResult& out) {
  const std::size_t n = ctx.quick() ? 512 : 2048;
  const std::size_t k_max = 8;
  const auto model = make_builtin_model("linear_mf", {{"a", -1.0}, {"c", 0.5}, {"s", 1.0}});
  const BrownianGrid grid(1, n, 1.0, 512, ctx.seed);
  const auto x0 = sample_initial({InitialKind::kGaussian, 1.0, 0.25}, 1, n, ctx.seed);
  SimulationOptions opts;
  opts.workers = ctx.config.workers;
  const auto res = picard_mean_field(model, grid, 1, k_max, x0, opts);
  const auto& d = res.distances;
  bool contracting = d.size() == k_max;
  std::vector<double> ratios;
  for (std::size_t k = 1; k + 1 < d.size(); ++k) {  // d_{k+1}/d_k for k >= 2
    const double r = d[k] > 0.0 ? d[k + 1] / d[k] : 0.0;
    ratios.push_back(r);
    contracting = contracting && d[k] > 0.0 && r < (ctx.zero_tol() ? 0.0 : 1.0);
  }
  const double overall = d.size() == k_max ? d[7] / d[1] : 1.0;
  const double overall_bound = ctx.zero_tol() ? 0.0 : 0.1;
  out.tolerance = "d_{k+1}/d_k < 1 for k >= 2 and d_8/d_2 < " +
                  format_double(overall_bound);
  out.measured = {{"distances", d}, {"ratios_from_k2", ratios},
                  {"d8_over_d2", overall}};
  out.pass = !res.diverged && contracting && overall < overall_bound;
}

void yamada(const Context& ctx, CriterionResult& out) {
  const double tol = ctx.zero_tol() ? 0.0 : 1e-8;
  const double fd_tol = ctx.zero_tol() ? 0.0 : 1e-6;
  json cases = json::array();
  bool pass = true;
  double last_gap = 0.0;
  for (double lg : {1.0, 2.0, 10.0}) {
    last_gap = std::numeric_limits<double>::infinity();
    for (double eps : {0.5, 0.1, 0.01}) {
      const Smoothing s(std::exp(lg), eps);
      const auto rep = check_smoothing(s, 1000, tol, fd_tol);
      json checks = json::array();
      for (const auto& c : rep.checks) {
        checks.push_back({{"name", c.name}, {"worst", c.worst},
                          {"tolerance", c.tolerance}, {"pass", c.pass}});
      }
      // sup(|x| - V) must shrink with eps at fixed gamma.
      double gap = 0.0;
      for (const auto& smp : rep.samples) gap = std::max(gap, std::abs(smp.x) - smp.v);
      const bool shrinking = gap < last_gap;
      last_gap = gap;
      pass = pass && rep.pass() && shrinking;
      cases.push_back({{"gamma", s.gamma()}, {"eps", eps}, {"pass", rep.pass()},
                       {"approximation_gap", gap}, {"gap_shrinks", shrinking},
                       {"checks", checks}});
    }
  }
  out.tolerance = "bounds within " + format_double(tol) +
                  ", finite differences within " + format_double(fd_tol);
  out.measured = {{"cases", cases}};
  out.pass = pass;
}

// Exhaustive minimum over all permutations; independent of the assignment
// solver.
double brute_force_wp(double p, AtomSpan a, AtomSpan b) {
  const std::size_t n = a.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += std::pow(euclidean_distance(a.atom(i), b.atom(perm[i])), p);
    }
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::pow(best / static_cast<double>(n), 1.0 / p);
}

void ot_exactness(const Context& ctx, CriterionResult& out) {
  const double tol = ctx.zero_tol() ? -1.0 : 1e-12;
  const CounterRng rng(ctx.seed, StreamTag::kProbe);
  double worst_match = 0.0, worst_1d = 0.0, worst_dominance = 0.0;
  std::size_t instances = 0;
  for (std::size_t k = 0; k < 200; ++k) {
    double u[3];
    rng.uniforms(k, 0, u);
    const std::size_t n = 1 + static_cast<std::size_t>(u[0] * 6.0) % 6;
    const std::size_t d = 1 + static_cast<std::size_t>(u[1] * 3.0) % 3;
    const double p = u[2] < 0.5 ? 1.0 : 2.0;
    std::vector<double> xa(n * d), xb(n * d);
    rng.normals(k, 1, xa);
    rng.normals(k, 2, xb);
    const EmpiricalMeasure a(xa, d), b(xb, d);
    const double exact = wasserstein_matching(p, a, b);
    const double brute = brute_force_wp(p, a, b);
    worst_match = std::max(worst_match, std::abs(exact - brute));
    if (d == 1) {
      worst_1d = std::max(worst_1d, std::abs(exact - wasserstein_1d(p, a, b)));
    }
    worst_dominance =
        std::max(worst_dominance, exact - coupling_upper_bound(p, a, b));
    ++instances;
  }
  out.tolerance = "|matching - brute force| <= 1e-12, |matching - 1d| <= 1e-12, "
                  "coupling bound >= exact";
  out.measured = {{"instances", instances},
                  {"max_matching_vs_brute", worst_match},
                  {"max_matching_vs_1d", worst_1d},
                  {"max_exact_minus_bound", worst_dominance}};
  out.pass = worst_match <= tol && worst_1d <= tol && worst_dominance <= tol;
}

void determinism(const Context& ctx, CriterionResult& out) {
  namespace fs = std::filesystem;
  fs::path root = ctx.config.scratch;
  if (root.empty()) {
    root = fs::temp_directory_path() /
           ("mvem-accept-" + std::to_string(::getpid()));
  }
  fs::create_directories(root);
  const std::size_t n = ctx.quick() ? 128 : 512;
  auto run = [&](int workers) {
    const fs::path dir = root / ("workers" + std::to_string(workers));
    std::ostringstream sink;
    const std::vector<std::string> args{
        "sweep-dt",  "--model",  "holder_diffusion_1d",
        "--N",       std::to_string(n),
        "--M",       "4096",     "--T", "1",
        "--factors", "8,16,32,64", "--factor-ref", "1",
        "--R",       "2",        "--seed", std::to_string(ctx.seed),
        "--workers", std::to_string(workers), "--out", dir.string(),
        "--no-svg"};
    const int status = run_cli(args, sink, sink);
    if (status != 0) {
      throw std::runtime_error("sweep-dt exited with " + std::to_string(status) +
                               ": " + sink.str());
    }
    return read_file(dir / "results.csv");
  };
  const std::string one = run(1);
  const std::string eight = run(8);
  const bool same = one == eight && !one.empty();
  out.tolerance = "byte-identical results.csv";
  out.measured = {{"bytes_workers1", one.size()},
                  {"bytes_workers8", eight.size()},
                  {"identical", same}};
  out.pass = same && !ctx.zero_tol();
  std::error_code ec;
  if (ctx.config.scratch.empty()) fs::remove_all(root, ec);
}

struct Criterion {
  int id;
  const char* name;
  void (*run)(const Context&, CriterionResult&);
};

constexpr Criterion kCriteria[] = {
    {1, "lipschitz_timestep_rate", lipschitz_timestep},
    {2, "holder_diffusion_alpha_3_4", holder_three_quarter},
    {3, "holder_diffusion_alpha_1_2", holder_half},
    {4, "propagation_of_chaos_1d", chaos_1d},
    {5, "propagation_of_chaos_multid", chaos_multid},
    {6, "linear_gaussian_oracle", closed_form_oracle},
    {7, "glivenko_decay", glivenko},
    {8, "picard_contraction", picard},
    {9, "yamada_invariants", yamada},
    {10, "ot_exactness", ot_exactness},
    {11, "determinism_across_workers", determinism},
};

}  // namespace

Budget budget_from_string(const std::string& s) {
  if (s == "full") return Budget::kFull;
  if (s == "quick") return Budget::kQuick;
  throw std::invalid_argument("unknown budget '" + s + "' (full, quick)");
}

std::string to_string(Budget b) { return b == Budget::kFull ? "full" : "quick"; }

bool AcceptanceReport::pass() const {
  return std::all_of(criteria.begin(), criteria.end(),
                     [](const CriterionResult& c) { return c.pass; });
}

json AcceptanceReport::to_json() const {
  json rows = json::array();
  for (const auto& c : criteria) {
    json row = {{"id", c.id},
                {"name", c.name},
                {"pass", c.pass},
                {"tolerance", c.tolerance},
                {"measured", c.measured},
                {"seed", c.seed},
                {"wall_seconds", c.wall_seconds}};
    if (!c.error.empty()) row["error"] = c.error;
    rows.push_back(std::move(row));
  }
  return {{"budget", to_string(budget)},
          {"seed", seed},
          {"pass", pass()},
          {"wall_seconds", wall_seconds},
          {"criteria", rows}};
}

CriterionResult run_criterion(int id, const AcceptanceConfig& config) {
  const auto it = std::find_if(std::begin(kCriteria), std::end(kCriteria),
                               [id](const Criterion& c) { return c.id == id; });
  if (it == std::end(kCriteria)) {
    throw std::invalid_argument("unknown criterion " + std::to_string(id));
  }
  CriterionResult out;
  out.id = id;
  out.name = it->name;
  out.seed = derive_seed(config.seed, static_cast<std::uint64_t>(id));
  const Context ctx{config, id, out.seed};
  const auto start = Clock::now();
  try {
    it->run(ctx, out);
  } catch (const std::exception& e) {
    out.pass = false;
    out.error = e.what();
  }
  out.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

AcceptanceReport run_acceptance_suite(const AcceptanceConfig& config) {
  for (int id : config.only) {
    if (id < 1 || id > kCriterionCount) {
      throw std::invalid_argument("unknown criterion " + std::to_string(id));
    }
  }
  AcceptanceReport report;
  report.budget = config.budget;
  report.seed = config.seed;
  const auto start = Clock::now();
  for (const auto& c : kCriteria) {
    if (!config.only.empty() && !config.only.contains(c.id)) continue;
    report.criteria.push_back(run_criterion(c.id, config));
  }
  report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

}  // namespace mvem
