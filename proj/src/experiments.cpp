#include "mvem/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mvem/io.hpp"
#include "mvem/numerics.hpp"
#include "mvem/rng.hpp"

namespace mvem {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("sweep plan: " + what);
}

void aggregate(SweepResult& result, const std::vector<std::size_t>& keys) {
  result.aggregates.clear();
  result.divergences = 0;
  for (std::size_t key : keys) {
    SweepAggregate agg;
    agg.key = key;
    std::vector<double> errors;
    for (const auto& cell : result.cells) {
      if (cell.key != key) continue;
      agg.delta = cell.delta;
      agg.n = cell.n;
      if (cell.diverged) {
        ++agg.n_diverged;
      } else {
        errors.push_back(cell.error);
      }
    }
    agg.n_ok = errors.size();
    if (!errors.empty()) {
      agg.mean = mean_of(errors);
      agg.std_error = standard_error_of(errors);
      agg.median = median_of(errors);
    } else {
      agg.mean = agg.median = std::numeric_limits<double>::quiet_NaN();
    }
    result.divergences += agg.n_diverged;
    result.aggregates.push_back(agg);
  }
}

struct TimestepRun {
  ParticlePaths reference;
  std::vector<ParticlePaths> em;  // one per factor
};

}  // namespace

std::uint64_t replication_seed(std::uint64_t seed, std::size_t r) {
  return derive_seed(seed, r);
}

void SweepPlan::validate() const {
  require(!n_list.empty(), "N_list is empty");
  require(std::all_of(n_list.begin(), n_list.end(),
                      [](std::size_t n) { return n >= 1; }),
          "N must be >= 1");
  require(!factor_list.empty(), "factor_list is empty");
  require(is_power_of_two(steps), "M must be a power of two");
  require(horizon > 0.0 && std::isfinite(horizon), "T must be > 0");
  require(replications >= 1, "R must be >= 1");
  require(q > 0.0, "q must be > 0");
  require(reference.factor_ref >= 1, "factor_ref must be >= 1");
  for (std::size_t f : factor_list) {
    require(f >= 1 && steps % f == 0,
            "factor " + std::to_string(f) + " does not divide M");
    require(f % reference.factor_ref == 0,
            "factor_ref does not divide factor " + std::to_string(f));
  }
  require(steps % reference.factor_ref == 0, "factor_ref does not divide M");
}

RateFit fit_rate(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("fit_rate: x and y sizes differ");
  }
  if (xs.size() < 2) {
    throw std::invalid_argument("fit_rate: need at least two points");
  }
  const std::size_t n = xs.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
      throw std::invalid_argument("fit_rate: coordinates must be positive");
    }
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  const double mx = mean_of(lx), my = mean_of(ly);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate: all x are equal");
  RateFit fit;
  fit.n_points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    sse += r * r;
    fit.residual_max = std::max(fit.residual_max, std::abs(r));
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  return fit;
}

RateFit SweepResult::fit() const {
  std::vector<double> xs, ys;
  for (const auto& agg : aggregates) {
    if (agg.n_diverged > 0 || !(agg.mean > 0.0)) continue;
    xs.push_back(kind == "timestep" ? agg.delta : static_cast<double>(agg.n));
    ys.push_back(agg.mean);
  }
  return fit_rate(xs, ys);
}

std::vector<double> SweepResult::medians() const {
  std::vector<double> out;
  for (const auto& agg : aggregates) out.push_back(agg.median);
  return out;
}

namespace {

// Reference plus EM runs for one noise realization at the given factors.
void timestep_cells(const ModelSpec& model, const SweepPlan& plan,
                    std::size_t replication, std::uint64_t seed,
                    const std::vector<std::size_t>& factors,
                    std::vector<SweepCell>& out) {
  const std::size_t n = plan.n_list.front();
  const std::size_t d = model.dim();
  const std::size_t fref = plan.reference.factor_ref;
  const auto start = Clock::now();
  const BrownianGrid grid(d, n, plan.horizon, plan.steps, seed);
  const auto x0 = sample_initial(plan.initial, d, n, seed);
  const IncrementView ref_view = coarsen(grid, fref, plan.workers);
  const std::size_t min_factor =
      *std::min_element(factors.begin(), factors.end());
  SimulationOptions ref_opts;
  ref_opts.record_stride = min_factor / fref;
  ref_opts.workers = plan.workers;
  const ParticlePaths reference =
      simulate_reference(model, ref_view, x0, plan.reference.n_extra,
                         derive_seed(seed, 1), plan.initial, ref_opts);
  const double ref_seconds = seconds_since(start);

  SimulationOptions em_opts;
  em_opts.workers = plan.workers;
  for (std::size_t f : factors) {
    const auto cell_start = Clock::now();
    SweepCell cell;
    cell.key = f;
    cell.delta = plan.horizon * static_cast<double>(f) /
                 static_cast<double>(plan.steps);
    cell.n = n;
    cell.replication = replication;
    cell.seed = seed;
    if (reference.diverged) {
      cell.diverged = true;
    } else {
      const IncrementView view = coarsen(ref_view, f / fref);
      const ParticlePaths em = simulate_interacting_em(model, view, x0, em_opts);
      if (em.diverged) {
        cell.diverged = true;
      } else {
        cell.error = strong_error_sup(reference, em, plan.q);
      }
    }
    if (cell.diverged) cell.error = std::numeric_limits<double>::quiet_NaN();
    cell.wall_seconds = seconds_since(cell_start) +
                        ref_seconds / static_cast<double>(factors.size());
    out.push_back(cell);
  }
}

}  // namespace

SweepResult run_timestep_sweep(const ModelSpec& model, const SweepPlan& plan) {
  plan.validate();
  const auto start = Clock::now();
  SweepResult result;
  result.kind = "timestep";
  for (std::size_t r = 0; r < plan.replications; ++r) {
    const std::uint64_t seed = replication_seed(plan.seed, r);
    if (!plan.independent_grids) {
      timestep_cells(model, plan, r, seed, plan.factor_list, result.cells);
      continue;
    }
    for (std::size_t fi = 0; fi < plan.factor_list.size(); ++fi) {
      timestep_cells(model, plan, r, derive_seed(seed, 1000 + fi),
                     {plan.factor_list[fi]}, result.cells);
    }
  }
  aggregate(result, plan.factor_list);
  result.wall_seconds = seconds_since(start);
  return result;
}

SweepResult run_chaos_sweep(const ModelSpec& model, const SweepPlan& plan) {
  plan.validate();
  const auto start = Clock::now();
  const std::size_t d = model.dim();
  const std::size_t factor = plan.factor_list.front();
  const std::size_t n_max =
      *std::max_element(plan.n_list.begin(), plan.n_list.end());
  const double delta =
      plan.horizon * static_cast<double>(factor) / static_cast<double>(plan.steps);

  SweepResult result;
  result.kind = "chaos";
  for (std::size_t r = 0; r < plan.replications; ++r) {
    const std::uint64_t seed = replication_seed(plan.seed, r);
    const auto rep_start = Clock::now();
    const BrownianGrid grid(d, n_max, plan.horizon, plan.steps, seed);
    const auto x0 = sample_initial(plan.initial, d, n_max, seed);
    SimulationOptions ref_opts;
    ref_opts.record_stride = factor / plan.reference.factor_ref;
    ref_opts.workers = plan.workers;
    const ParticlePaths reference = simulate_reference(
        model, grid, x0, plan.reference.n_extra, plan.reference.factor_ref,
        derive_seed(seed, 1), plan.initial, ref_opts);
    const double ref_seconds = seconds_since(rep_start);

    SimulationOptions em_opts;
    em_opts.workers = plan.workers;
    for (std::size_t n : plan.n_list) {
      const auto cell_start = Clock::now();
      SweepCell cell;
      cell.key = n;
      cell.delta = delta;
      cell.n = n;
      cell.replication = r;
      cell.seed = seed;
      if (reference.diverged) {
        cell.diverged = true;
      } else {
        const BrownianGrid sub(d, n, plan.horizon, plan.steps, seed);
        const ParticlePaths em = simulate_interacting_em(
            model, sub, factor,
            std::span<const double>(x0).first(n * d), em_opts);
        if (em.diverged) {
          cell.diverged = true;
        } else {
          cell.error = strong_error_sup(head(reference, n), em, plan.q);
        }
      }
      if (cell.diverged) cell.error = std::numeric_limits<double>::quiet_NaN();
      cell.wall_seconds = seconds_since(cell_start) +
                          ref_seconds / static_cast<double>(plan.n_list.size());
      result.cells.push_back(cell);
    }
  }
  aggregate(result, plan.n_list);
  result.wall_seconds = seconds_since(start);
  return result;
}

Sampler initial_law_sampler(const InitialLaw& law, std::size_t dim) {
  return [law, dim](std::size_t n, std::uint64_t seed) {
    return sample_initial(law, dim, n, seed);
  };
}

Sampler snapshot_sampler(AtomSpan surrogate) {
  const EmpiricalMeasure cloud(surrogate);
  return [cloud](std::size_t n, std::uint64_t seed) {
    const CounterRng rng(seed, StreamTag::kSample);
    const std::size_t d = cloud.dim();
    std::vector<double> out;
    out.reserve(n * d);
    double u = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      rng.uniforms(i, 0, std::span<double>(&u, 1));
      const auto j = std::min(
          cloud.size() - 1,
          static_cast<std::size_t>(u * static_cast<double>(cloud.size())));
      const auto x = cloud.atom(j);
      out.insert(out.end(), x.begin(), x.end());
    }
    return out;
  };
}

SweepResult run_glivenko_sweep(const Sampler& sampler,
                               const GlivenkoPlan& plan) {
  if (plan.n_list.empty()) throw std::invalid_argument("N_list is empty");
  if (plan.replications < 1) throw std::invalid_argument("R must be >= 1");
  if (plan.truth_multiple < 1) {
    throw std::invalid_argument("truth_multiple must be >= 1");
  }
  const auto start = Clock::now();
  SweepResult result;
  result.kind = "glivenko";
  for (std::size_t n : plan.n_list) {
    for (std::size_t r = 0; r < plan.replications; ++r) {
      const auto cell_start = Clock::now();
      const std::uint64_t seed = derive_seed(replication_seed(plan.seed, r), n);
      const EmpiricalMeasure sample(sampler(n, derive_seed(seed, 0)), plan.dim);
      const EmpiricalMeasure truth(
          sampler(n * plan.truth_multiple, derive_seed(seed, 1)), plan.dim);
      const EmpiricalMeasure lifted = repeat_atoms(sample, plan.truth_multiple);
      SweepCell cell;
      cell.key = n;
      cell.n = n;
      cell.replication = r;
      cell.seed = seed;
      cell.error = plan.dim == 1
                       ? wasserstein_1d(plan.p, lifted, truth)
                       : wasserstein_sliced(plan.p, lifted, truth, plan.n_proj,
                                            derive_seed(seed, 2));
      cell.wall_seconds = seconds_since(cell_start);
      result.cells.push_back(cell);
    }
  }
  aggregate(result, plan.n_list);
  result.wall_seconds = seconds_since(start);
  return result;
}

GaussianMoments oracle_linear_gaussian(double a, double c, double s, double m0,
                                       double v0, double t) {
  GaussianMoments out;
  out.mean = m0 * std::exp((a + c) * t);
  if (a == 0.0) {
    out.variance = v0 + s * s * t;
  } else {
    const double e = std::exp(2.0 * a * t);
    out.variance = e * v0 + s * s * std::expm1(2.0 * a * t) / (2.0 * a);
  }
  return out;
}

namespace {

std::vector<double> per_replication_slopes(const SweepResult& res,
                                           std::size_t replications) {
  std::vector<double> slopes;
  for (std::size_t r = 0; r < replications; ++r) {
    std::vector<double> xs, ys;
    for (const auto& cell : res.cells) {
      if (cell.replication == r && !cell.diverged && cell.error > 0.0) {
        xs.push_back(cell.delta);
        ys.push_back(cell.error);
      }
    }
    if (xs.size() >= 2) slopes.push_back(fit_rate(xs, ys).slope);
  }
  return slopes;
}

}  // namespace

CouplingComparison compare_coupling_variance(const ModelSpec& model,
                                             SweepPlan plan) {
  CouplingComparison out;
  plan.independent_grids = false;
  out.shared_slopes =
      per_replication_slopes(run_timestep_sweep(model, plan), plan.replications);
  plan.independent_grids = true;
  out.independent_slopes =
      per_replication_slopes(run_timestep_sweep(model, plan), plan.replications);
  out.shared_slope_se = standard_error_of(out.shared_slopes);
  out.independent_slope_se = standard_error_of(out.independent_slopes);
  return out;
}

std::string sweep_results_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "kind,key,delta,n,replication,seed,error,diverged\n";
  for (const auto& c : result.cells) {
    out << result.kind << ',' << c.key << ',' << format_double(c.delta) << ','
        << c.n << ',' << c.replication << ',' << c.seed << ','
        << format_double(c.error) << ',' << (c.diverged ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace mvem
