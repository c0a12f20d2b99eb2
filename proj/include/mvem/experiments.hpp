#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mvem/engine.hpp"
#include "mvem/model.hpp"

namespace mvem {

struct ReferencePolicy {
  std::size_t factor_ref = 1;
  std::size_t n_extra = 0;
};

struct SweepPlan {
  std::string family = "linear_mf";
  ParamMap params;
  InitialLaw initial{InitialKind::kGaussian, 1.0, 0.25};
  // Particle counts (chaos sweep) or the single N (timestep sweep).
  std::vector<std::size_t> n_list{1024};
  // Step sizes as multiples of T / M.
  std::vector<std::size_t> factor_list{1};
  double horizon = 1.0;
  std::size_t steps = 1024;  // M
  std::size_t replications = 4;
  std::uint64_t seed = 20240607;
  ReferencePolicy reference;
  double q = 2.0;
  std::size_t workers = 0;
  // Timestep sweep only: draw a fresh grid per (factor, replication) instead
  // of sharing one per replication.
  bool independent_grids = false;

  // Throws std::invalid_argument on an inconsistent plan.
  void validate() const;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n_points = 0;
  double residual_max = 0.0;
};

// Least squares on (log x, log y). Needs >= 2 points with x, y > 0 and at
// least two distinct x.
RateFit fit_rate(const std::vector<double>& xs, const std::vector<double>& ys);

struct SweepCell {
  std::size_t key = 0;  // factor (timestep) or N (chaos, Glivenko)
  double delta = 0.0;
  std::size_t n = 0;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  double error = 0.0;
  bool diverged = false;
  double wall_seconds = 0.0;
};

struct SweepAggregate {
  std::size_t key = 0;
  double delta = 0.0;
  std::size_t n = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double median = 0.0;
  std::size_t n_ok = 0;
  std::size_t n_diverged = 0;
};

struct SweepResult {
  std::string kind;  // "timestep", "chaos", "glivenko"
  std::vector<SweepCell> cells;
  std::vector<SweepAggregate> aggregates;  // in key order of the plan
  std::size_t divergences = 0;
  double wall_seconds = 0.0;

  // Fit of mean error against delta (timestep) or N (chaos, Glivenko),
  // skipping aggregates with any divergence or a non-positive mean.
  RateFit fit() const;
  // Medians per key, in plan order.
  std::vector<double> medians() const;
};

// Per replication r: one grid (seed derived from plan.seed and r), one
// reference at factor_ref, one EM run per factor on coarsenings of the same
// noise; error = strong_error_sup(reference, em, q).
SweepResult run_timestep_sweep(const ModelSpec& model, const SweepPlan& plan);

// Per replication: one reference with max(N) + n_extra particles at
// factor_ref, then an N-particle EM run at factor_list[0] for each N sharing
// the first N noise paths and initial atoms.
SweepResult run_chaos_sweep(const ModelSpec& model, const SweepPlan& plan);

// Draws n atoms (n * dim values) for replication seed `seed`.
using Sampler =
    std::function<std::vector<double>(std::size_t n, std::uint64_t seed)>;

struct GlivenkoPlan {
  std::size_t dim = 1;
  std::vector<std::size_t> n_list;
  std::size_t replications = 32;
  double p = 1.0;
  std::size_t truth_multiple = 64;
  std::size_t n_proj = 64;  // sliced projections when dim > 1
  std::uint64_t seed = 20240607;
};

Sampler initial_law_sampler(const InitialLaw& law, std::size_t dim);
// Uniform resampling of a fixed surrogate-truth cloud.
Sampler snapshot_sampler(AtomSpan surrogate);

// Mean W_p between an N-sample and a truth_multiple * N surrogate sample;
// exact in one dimension, sliced otherwise.
SweepResult run_glivenko_sweep(const Sampler& sampler, const GlivenkoPlan& plan);

struct GaussianMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// Mean and variance at time t of dX = (aX + c E[X]) dt + s dW.
GaussianMoments oracle_linear_gaussian(double a, double c, double s, double m0,
                                       double v0, double t);

struct CouplingComparison {
  double shared_slope_se = 0.0;
  double independent_slope_se = 0.0;
  std::vector<double> shared_slopes;
  std::vector<double> independent_slopes;
};

// Standard error of per-replication slopes with shared vs independent grids.
CouplingComparison compare_coupling_variance(const ModelSpec& model,
                                             SweepPlan plan);

// Seeds used for replication r of a sweep.
std::uint64_t replication_seed(std::uint64_t seed, std::size_t r);

// results.csv: header row, one row per cell, LF line ends. Wall times are
// left out so the file is reproducible byte for byte.
std::string sweep_results_csv(const SweepResult& result);

}  // namespace mvem
