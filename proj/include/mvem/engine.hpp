#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvem/measure.hpp"
#include "mvem/model.hpp"
#include "mvem/rng.hpp"

namespace mvem {

// Driving noise for N particles on [0, T] at the finest step T/M.
//
// Increments are not stored: increment (i, k) is a pure function of
// (seed, i, k), so a grid with more particles extends one with fewer and
// any thread may produce any increment.
class BrownianGrid {
 public:
  BrownianGrid(std::size_t dim, std::size_t n_particles, double horizon,
               std::size_t steps, std::uint64_t seed);

  std::size_t dim() const { return dim_; }
  std::size_t n_particles() const { return n_particles_; }
  double horizon() const { return horizon_; }
  std::size_t steps() const { return steps_; }
  std::uint64_t seed() const { return seed_; }
  double fine_dt() const { return horizon_ / static_cast<double>(steps_); }

  void fine_increment(std::size_t particle, std::size_t step,
                      std::span<double> out) const;
  // Pairwise sum of the fine increments [block*factor, (block+1)*factor).
  // factor must be a power of two.
  void block_increment(std::size_t particle, std::size_t block,
                       std::size_t factor, std::span<double> out) const;

 private:
  std::size_t dim_;
  std::size_t n_particles_;
  double horizon_;
  std::size_t steps_;
  std::uint64_t seed_;
  double scale_;
  CounterRng rng_;
};

// Throws unless M is a power of two and N, d >= 1, T > 0.
BrownianGrid generate_brownian_grid(std::size_t dim, std::size_t n_particles,
                                    double horizon, std::size_t steps,
                                    std::uint64_t seed);

// Materialized increments at step dt = factor * T / M, laid out
// [step][particle][component].
class IncrementView {
 public:
  IncrementView(std::size_t dim, std::size_t n_particles, std::size_t n_steps,
                double horizon, std::size_t factor, std::vector<double> data);

  std::size_t dim() const { return dim_; }
  std::size_t n_particles() const { return n_particles_; }
  std::size_t n_steps() const { return n_steps_; }
  double horizon() const { return horizon_; }
  // Multiple of the finest grid step.
  std::size_t factor() const { return factor_; }
  double dt() const { return horizon_ / static_cast<double>(n_steps_); }

  std::span<const double> at(std::size_t step, std::size_t particle) const {
    return std::span<const double>(data_).subspan(
        (step * n_particles_ + particle) * dim_, dim_);
  }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t dim_;
  std::size_t n_particles_;
  std::size_t n_steps_;
  double horizon_;
  std::size_t factor_;
  std::vector<double> data_;
};

// Increments at factor * T / M; factor must divide M. The result is
// bitwise identical however the factor is split across repeated coarsening.
IncrementView coarsen(const BrownianGrid& grid, std::size_t factor,
                      std::size_t workers = 0);
IncrementView coarsen(const IncrementView& view, std::size_t factor);

enum class InitialKind { kPoint, kUniform, kGaussian };

// i.i.d. initial law, applied independently to each component.
// Point: mass at `a`. Uniform: on [a, b]. Gaussian: mean a, variance b.
struct InitialLaw {
  InitialKind kind = InitialKind::kPoint;
  double a = 0.0;
  double b = 0.0;
};

std::string_view to_string(InitialKind kind);
InitialKind initial_kind_from_string(std::string_view s);

// Atoms for particles [first, first + n); particle i's value depends only on
// (law, seed, i).
std::vector<double> sample_initial(const InitialLaw& law, std::size_t dim,
                                   std::size_t n, std::uint64_t seed,
                                   std::size_t first = 0);

struct SimulationOptions {
  // Record every `record_stride`-th state; must divide the step count.
  std::size_t record_stride = 1;
  // 0 = OpenMP default. Results never depend on this.
  std::size_t workers = 0;
};

// States X^i at recorded times t_k = k * record_dt, k = 0..n_records-1,
// stored [record][particle][component].
struct ParticlePaths {
  std::string model_name;
  std::size_t dim = 1;
  std::size_t n_particles = 0;
  std::size_t n_steps = 0;        // scheme steps
  double dt = 0.0;                // scheme step
  std::size_t record_stride = 1;  // scheme steps per record
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> states;
  bool diverged = false;
  std::optional<std::size_t> divergence_step;
  // dt >= 1/e, outside the step range the convergence theory covers.
  bool step_warning = false;

  std::size_t n_records() const { return n_steps / record_stride + 1; }
  double record_dt() const { return dt * static_cast<double>(record_stride); }
  double time(std::size_t record) const {
    return static_cast<double>(record) * record_dt();
  }
  std::span<const double> state(std::size_t record, std::size_t particle) const {
    return std::span<const double>(states).subspan(
        (record * n_particles + particle) * dim, dim);
  }
  AtomSpan snapshot(std::size_t record) const {
    return {std::span<const double>(states).subspan(
                record * n_particles * dim, n_particles * dim),
            dim};
  }
};

// The first n particles of `paths`.
ParticlePaths head(const ParticlePaths& paths, std::size_t n);

// Euler-Maruyama for the N-particle system: each step freezes the empirical
// measure of the current states and moves every particle with
// X <- X + b(X, mu) dt + sigma(X) dW, dW the factor-coarsened increments.
ParticlePaths simulate_interacting_em(const ModelSpec& model,
                                      const BrownianGrid& grid,
                                      std::size_t factor,
                                      std::span<const double> x0,
                                      const SimulationOptions& opts = {});
ParticlePaths simulate_interacting_em(const ModelSpec& model,
                                      const IncrementView& increments,
                                      std::span<const double> x0,
                                      const SimulationOptions& opts = {});

// Proxy for the non-interacting particles: an (N + n_extra)-particle system at
// step factor_ref * T / M whose first N particles reuse `grid`'s noise and
// initial atoms x0. Extra particles draw noise and initial values (from
// extra_law) using seed_extra. Only the first N paths are returned.
ParticlePaths simulate_reference(const ModelSpec& model,
                                 const BrownianGrid& grid,
                                 std::span<const double> x0,
                                 std::size_t n_extra, std::size_t factor_ref,
                                 std::uint64_t seed_extra,
                                 const InitialLaw& extra_law,
                                 const SimulationOptions& opts = {});
// Same, with the first N particles' increments already materialized at the
// reference step.
ParticlePaths simulate_reference(const ModelSpec& model,
                                 const IncrementView& increments,
                                 std::span<const double> x0,
                                 std::size_t n_extra, std::uint64_t seed_extra,
                                 const InitialLaw& extra_law,
                                 const SimulationOptions& opts = {});

// One empirical measure per time of a uniform grid.
struct MeasureFlow {
  std::size_t dim = 1;
  std::size_t n = 0;
  std::vector<double> times;
  std::vector<double> atoms;  // [time][atom][component]

  AtomSpan at(std::size_t k) const {
    return {std::span<const double>(atoms).subspan(k * n * dim, n * dim), dim};
  }
};

struct PicardResult {
  std::vector<MeasureFlow> flows;   // mu^(0), ..., mu^(k_max)
  std::vector<double> distances;    // d_1, ..., d_k_max
  bool diverged = false;
};

// Distribution iteration: iterate k moves N independent particles with drift
// b(x, mu^(k-1)_{t_delta}) on the same noise; mu^(0) is the empirical measure
// of x0 at all times. d_k = max over grid times of W1(mu^(k), mu^(k-1)).
PicardResult picard_mean_field(const ModelSpec& model, const BrownianGrid& grid,
                               std::size_t factor, std::size_t k_max,
                               std::span<const double> x0,
                               const SimulationOptions& opts = {});

// (1/N) sum_i max_k |a^i(t_k) - b^i(t_k)|^q over b's record times; a's record
// grid must refine b's.
double strong_error_sup(const ParticlePaths& a, const ParticlePaths& b,
                        double q);

// Mean over particles and consecutive records of |X(t_{k+1}) - X(t_k)|^q.
double time_increment_moments(const ParticlePaths& paths, double q);

// (1/N) sum_i max_k |X^i(t_k)|^2.
double sup_second_moment(const ParticlePaths& paths);

// Columnar CSV: header "t,particle,x0[,x1...]", one row per (time, particle).
void write_paths_csv(std::ostream& out, const ParticlePaths& paths);

// Binary dump, little-endian:
//   char[8] "MVEMPATH", u32 version (=1), u32 d, u64 N, u64 m (= records - 1),
//   f64 record step, u64 seed, then (m+1) * N * d f64 states.
void write_paths_binary(std::ostream& out, const ParticlePaths& paths);
ParticlePaths read_paths_binary(std::istream& in);

}  // namespace mvem
