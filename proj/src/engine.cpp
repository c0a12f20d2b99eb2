#include "mvem/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <omp.h>

#include "mvem/io.hpp"
#include "mvem/numerics.hpp"

namespace mvem {
namespace {

int thread_count(std::size_t workers) {
  return workers == 0 ? omp_get_max_threads() : static_cast<int>(workers);
}

// Pairwise (balanced tree) accumulation of `count` d-vectors produced by
// leaf(j, out). For power-of-two counts this is the same tree as recursive
// halving, so nested block sums agree bitwise.
template <class Leaf>
void tree_sum(std::size_t count, std::size_t d, std::span<double> out,
              Leaf&& leaf) {
  thread_local std::vector<double> stack;
  stack.resize(66 * d);
  std::size_t depth = 0;
  for (std::size_t j = 0; j < count; ++j) {
    leaf(j, std::span<double>(stack).subspan(depth * d, d));
    ++depth;
    for (std::size_t c = j + 1; (c & 1) == 0; c >>= 1) {
      double* right = &stack[(depth - 1) * d];
      double* left = &stack[(depth - 2) * d];
      for (std::size_t k = 0; k < d; ++k) left[k] += right[k];
      --depth;
    }
  }
  // Non-power-of-two tails: fold remaining partials right to left.
  while (depth > 1) {
    double* right = &stack[(depth - 1) * d];
    double* left = &stack[(depth - 2) * d];
    for (std::size_t k = 0; k < d; ++k) left[k] += right[k];
    --depth;
  }
  std::copy_n(stack.begin(), d, out.begin());
}

void check_factor(std::size_t total_steps, std::size_t factor) {
  if (factor == 0 || total_steps % factor != 0) {
    throw std::invalid_argument("factor " + std::to_string(factor) +
                                " does not divide " +
                                std::to_string(total_steps) + " steps");
  }
}

template <class Increment, class Measure>
ParticlePaths integrate(const ModelSpec& model, std::size_t n_total,
                        std::size_t n_keep, std::size_t n_steps, double horizon,
                        std::vector<double> state, Increment&& increment,
                        Measure&& measure_at, const SimulationOptions& opts) {
  const std::size_t d = model.dim();
  if (state.size() != n_total * d) {
    throw std::invalid_argument("initial atoms do not match N * d");
  }
  if (opts.record_stride == 0 || n_steps % opts.record_stride != 0) {
    throw std::invalid_argument("record_stride must divide the step count");
  }
  ParticlePaths paths;
  paths.model_name = model.name;
  paths.dim = d;
  paths.n_particles = n_keep;
  paths.n_steps = n_steps;
  paths.dt = horizon / static_cast<double>(n_steps);
  paths.record_stride = opts.record_stride;
  paths.horizon = horizon;
  paths.step_warning = paths.dt >= std::exp(-1.0);
  paths.states.reserve(paths.n_records() * n_keep * d);
  auto record = [&](const std::vector<double>& s) {
    paths.states.insert(paths.states.end(), s.begin(),
                        s.begin() + static_cast<std::ptrdiff_t>(n_keep * d));
  };
  record(state);

  const double dt = paths.dt;
  const int threads = thread_count(opts.workers);
  std::vector<double> next(state.size());
  const auto n = static_cast<std::ptrdiff_t>(n_total);

  for (std::size_t k = 0; k < n_steps; ++k) {
    const MeasureView mu = measure_at(k, AtomSpan{state, d});
    bool bad = false;
#pragma omp parallel num_threads(threads)
    {
      std::vector<double> drift(d), scratch(d), sig(d * d), dw(d);
#pragma omp for schedule(static) reduction(|| : bad)
      for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const std::span<const double> x(&state[i * d], d);
        model.drift(x, mu, drift, scratch);
        model.sigma(x, sig);
        increment(i, k, std::span<double>(dw));
        for (std::size_t r = 0; r < d; ++r) {
          double noise = 0.0;
          for (std::size_t c = 0; c < d; ++c) noise += sig[r * d + c] * dw[c];
          const double v = x[r] + drift[r] * dt + noise;
          next[i * d + r] = v;
          if (!std::isfinite(v)) bad = true;
        }
      }
    }
    state.swap(next);
    if (bad) {
      paths.diverged = true;
      paths.divergence_step = k + 1;
      break;
    }
    if ((k + 1) % opts.record_stride == 0) record(state);
  }
  return paths;
}

}  // namespace

BrownianGrid::BrownianGrid(std::size_t dim, std::size_t n_particles,
                           double horizon, std::size_t steps,
                           std::uint64_t seed)
    : dim_(dim),
      n_particles_(n_particles),
      horizon_(horizon),
      steps_(steps),
      seed_(seed),
      scale_(std::sqrt(horizon / static_cast<double>(steps))),
      rng_(seed, StreamTag::kIncrement) {
  if (dim == 0) throw std::invalid_argument("dimension must be >= 1");
  if (n_particles == 0) throw std::invalid_argument("N must be >= 1");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("horizon T must be > 0");
  }
  if (!is_power_of_two(steps)) {
    throw std::invalid_argument("M = " + std::to_string(steps) +
                                " is not a power of two");
  }
}

void BrownianGrid::fine_increment(std::size_t particle, std::size_t step,
                                  std::span<double> out) const {
  rng_.normals(particle, step, out);
  for (double& v : out) v *= scale_;
}

void BrownianGrid::block_increment(std::size_t particle, std::size_t block,
                                   std::size_t factor,
                                   std::span<double> out) const {
  const std::size_t first = block * factor;
  tree_sum(factor, dim_, out, [&](std::size_t j, std::span<double> leaf) {
    fine_increment(particle, first + j, leaf);
  });
}

BrownianGrid generate_brownian_grid(std::size_t dim, std::size_t n_particles,
                                    double horizon, std::size_t steps,
                                    std::uint64_t seed) {
  return BrownianGrid(dim, n_particles, horizon, steps, seed);
}

IncrementView::IncrementView(std::size_t dim, std::size_t n_particles,
                             std::size_t n_steps, double horizon,
                             std::size_t factor, std::vector<double> data)
    : dim_(dim),
      n_particles_(n_particles),
      n_steps_(n_steps),
      horizon_(horizon),
      factor_(factor),
      data_(std::move(data)) {
  if (data_.size() != dim * n_particles * n_steps) {
    throw std::invalid_argument("increment buffer has the wrong size");
  }
}

IncrementView coarsen(const BrownianGrid& grid, std::size_t factor,
                      std::size_t workers) {
  check_factor(grid.steps(), factor);
  const std::size_t d = grid.dim(), n = grid.n_particles();
  const std::size_t m = grid.steps() / factor;
  std::vector<double> data(m * n * d);
  const auto total = static_cast<std::ptrdiff_t>(m * n);
#pragma omp parallel for schedule(static) num_threads(thread_count(workers))
  for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
    const auto u = static_cast<std::size_t>(idx);
    const std::size_t k = u / n, i = u % n;
    grid.block_increment(i, k, factor,
                         std::span<double>(data).subspan(u * d, d));
  }
  return IncrementView(d, n, m, grid.horizon(), factor, std::move(data));
}

IncrementView coarsen(const IncrementView& view, std::size_t factor) {
  check_factor(view.n_steps(), factor);
  const std::size_t d = view.dim(), n = view.n_particles();
  const std::size_t m = view.n_steps() / factor;
  std::vector<double> data(m * n * d);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      tree_sum(factor, d, std::span<double>(data).subspan((k * n + i) * d, d),
               [&](std::size_t j, std::span<double> leaf) {
                 const auto src = view.at(k * factor + j, i);
                 std::copy(src.begin(), src.end(), leaf.begin());
               });
    }
  }
  return IncrementView(d, n, m, view.horizon(), view.factor() * factor,
                       std::move(data));
}

std::string_view to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::kPoint: return "point";
    case InitialKind::kUniform: return "uniform";
    case InitialKind::kGaussian: return "gaussian";
  }
  return "point";
}

InitialKind initial_kind_from_string(std::string_view s) {
  if (s == "point") return InitialKind::kPoint;
  if (s == "uniform") return InitialKind::kUniform;
  if (s == "gaussian") return InitialKind::kGaussian;
  throw std::invalid_argument("unknown initial law '" + std::string(s) +
                              "' (point, uniform, gaussian)");
}

std::vector<double> sample_initial(const InitialLaw& law, std::size_t dim,
                                   std::size_t n, std::uint64_t seed,
                                   std::size_t first) {
  std::vector<double> out(n * dim, law.a);
  if (law.kind == InitialKind::kPoint) return out;
  if (law.kind == InitialKind::kGaussian && law.b < 0.0) {
    throw std::invalid_argument("Gaussian variance must be >= 0");
  }
  const CounterRng rng(seed, StreamTag::kInitial);
  const double sd = law.kind == InitialKind::kGaussian ? std::sqrt(law.b) : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::span<double> x(&out[i * dim], dim);
    if (law.kind == InitialKind::kUniform) {
      rng.uniforms(first + i, 0, x);
      for (double& v : x) v = law.a + (law.b - law.a) * v;
    } else {
      rng.normals(first + i, 0, x);
      for (double& v : x) v = law.a + sd * v;
    }
  }
  return out;
}

ParticlePaths head(const ParticlePaths& paths, std::size_t n) {
  if (n > paths.n_particles) throw std::invalid_argument("head: n > N");
  ParticlePaths out = paths;
  out.n_particles = n;
  out.states.clear();
  const std::size_t records = paths.states.size() /
                              (paths.n_particles * paths.dim);
  out.states.reserve(records * n * paths.dim);
  for (std::size_t k = 0; k < records; ++k) {
    const auto snap = paths.snapshot(k).data.first(n * paths.dim);
    out.states.insert(out.states.end(), snap.begin(), snap.end());
  }
  return out;
}

ParticlePaths simulate_interacting_em(const ModelSpec& model,
                                      const BrownianGrid& grid,
                                      std::size_t factor,
                                      std::span<const double> x0,
                                      const SimulationOptions& opts) {
  check_factor(grid.steps(), factor);
  if (grid.dim() != model.dim()) {
    throw std::invalid_argument("grid and model dimensions differ");
  }
  const std::size_t n = grid.n_particles();
  auto paths = integrate(
      model, n, n, grid.steps() / factor, grid.horizon(),
      std::vector<double>(x0.begin(), x0.end()),
      [&](std::size_t i, std::size_t k, std::span<double> dw) {
        grid.block_increment(i, k, factor, dw);
      },
      [](std::size_t, AtomSpan s) { return MeasureView(s); }, opts);
  paths.seed = grid.seed();
  return paths;
}

ParticlePaths simulate_interacting_em(const ModelSpec& model,
                                      const IncrementView& increments,
                                      std::span<const double> x0,
                                      const SimulationOptions& opts) {
  if (increments.dim() != model.dim()) {
    throw std::invalid_argument("increment and model dimensions differ");
  }
  const std::size_t n = increments.n_particles();
  return integrate(
      model, n, n, increments.n_steps(), increments.horizon(),
      std::vector<double>(x0.begin(), x0.end()),
      [&](std::size_t i, std::size_t k, std::span<double> dw) {
        const auto src = increments.at(k, i);
        std::copy(src.begin(), src.end(), dw.begin());
      },
      [](std::size_t, AtomSpan s) { return MeasureView(s); }, opts);
}

ParticlePaths simulate_reference(const ModelSpec& model,
                                 const BrownianGrid& grid,
                                 std::span<const double> x0,
                                 std::size_t n_extra, std::size_t factor_ref,
                                 std::uint64_t seed_extra,
                                 const InitialLaw& extra_law,
                                 const SimulationOptions& opts) {
  check_factor(grid.steps(), factor_ref);
  const std::size_t n = grid.n_particles(), d = model.dim();
  if (grid.dim() != d) {
    throw std::invalid_argument("grid and model dimensions differ");
  }
  std::vector<double> state(x0.begin(), x0.end());
  std::optional<BrownianGrid> extra;
  if (n_extra > 0) {
    extra.emplace(d, n_extra, grid.horizon(), grid.steps(), seed_extra);
    const auto xe = sample_initial(extra_law, d, n_extra, seed_extra);
    state.insert(state.end(), xe.begin(), xe.end());
  }
  auto paths = integrate(
      model, n + n_extra, n, grid.steps() / factor_ref, grid.horizon(),
      std::move(state),
      [&](std::size_t i, std::size_t k, std::span<double> dw) {
        if (i < n) {
          grid.block_increment(i, k, factor_ref, dw);
        } else {
          extra->block_increment(i - n, k, factor_ref, dw);
        }
      },
      [](std::size_t, AtomSpan s) { return MeasureView(s); }, opts);
  paths.seed = grid.seed();
  return paths;
}

ParticlePaths simulate_reference(const ModelSpec& model,
                                 const IncrementView& increments,
                                 std::span<const double> x0,
                                 std::size_t n_extra, std::uint64_t seed_extra,
                                 const InitialLaw& extra_law,
                                 const SimulationOptions& opts) {
  const std::size_t n = increments.n_particles(), d = model.dim();
  if (increments.dim() != d) {
    throw std::invalid_argument("increment and model dimensions differ");
  }
  const std::size_t factor = increments.factor();
  std::vector<double> state(x0.begin(), x0.end());
  std::optional<BrownianGrid> extra;
  if (n_extra > 0) {
    extra.emplace(d, n_extra, increments.horizon(),
                  increments.n_steps() * factor, seed_extra);
    const auto xe = sample_initial(extra_law, d, n_extra, seed_extra);
    state.insert(state.end(), xe.begin(), xe.end());
  }
  return integrate(
      model, n + n_extra, n, increments.n_steps(), increments.horizon(),
      std::move(state),
      [&](std::size_t i, std::size_t k, std::span<double> dw) {
        if (i < n) {
          const auto src = increments.at(k, i);
          std::copy(src.begin(), src.end(), dw.begin());
        } else {
          extra->block_increment(i - n, k, factor, dw);
        }
      },
      [](std::size_t, AtomSpan s) { return MeasureView(s); }, opts);
}

namespace {

double flow_distance(AtomSpan a, AtomSpan b) {
  if (a.dim == 1) return wasserstein_1d(1.0, a, b);
  // Exact multi-d W1 is cubic in N per time point; the sliced value is used.
  return wasserstein_sliced(1.0, a, b, 64, 0x5eedull);
}

}  // namespace

PicardResult picard_mean_field(const ModelSpec& model, const BrownianGrid& grid,
                               std::size_t factor, std::size_t k_max,
                               std::span<const double> x0,
                               const SimulationOptions& opts) {
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  check_factor(grid.steps(), factor);
  const std::size_t n = grid.n_particles(), d = model.dim();
  const std::size_t m = grid.steps() / factor;
  if (x0.size() != n * d) {
    throw std::invalid_argument("initial atoms do not match N * d");
  }

  PicardResult result;
  MeasureFlow initial;
  initial.dim = d;
  initial.n = n;
  for (std::size_t k = 0; k <= m; ++k) {
    initial.times.push_back(grid.horizon() * static_cast<double>(k) /
                            static_cast<double>(m));
    initial.atoms.insert(initial.atoms.end(), x0.begin(), x0.end());
  }
  result.flows.push_back(std::move(initial));

  SimulationOptions step_opts = opts;
  step_opts.record_stride = 1;
  for (std::size_t iter = 1; iter <= k_max; ++iter) {
    const MeasureFlow& prev = result.flows.back();
    auto paths = integrate(
        model, n, n, m, grid.horizon(),
        std::vector<double>(x0.begin(), x0.end()),
        [&](std::size_t i, std::size_t k, std::span<double> dw) {
          grid.block_increment(i, k, factor, dw);
        },
        [&prev](std::size_t k, AtomSpan) { return MeasureView(prev.at(k)); },
        step_opts);
    if (paths.diverged) {
      result.diverged = true;
      break;
    }
    MeasureFlow flow;
    flow.dim = d;
    flow.n = n;
    flow.times = prev.times;
    flow.atoms = std::move(paths.states);
    double sup = 0.0;
    for (std::size_t k = 0; k <= m; ++k) {
      sup = std::max(sup, flow_distance(flow.at(k), prev.at(k)));
    }
    result.distances.push_back(sup);
    result.flows.push_back(std::move(flow));
  }
  return result;
}

double strong_error_sup(const ParticlePaths& a, const ParticlePaths& b,
                        double q) {
  if (!(q > 0.0)) throw std::invalid_argument("q must be > 0");
  if (a.n_particles != b.n_particles || a.dim != b.dim) {
    throw std::invalid_argument("paths have different N or dimension");
  }
  if (std::abs(a.horizon - b.horizon) > 1e-12 * std::max(1.0, a.horizon)) {
    throw std::invalid_argument("paths have different horizons");
  }
  if (a.diverged || b.diverged) {
    throw std::invalid_argument("cannot compare diverged paths");
  }
  const double ratio_f = b.record_dt() / a.record_dt();
  const auto ratio = static_cast<std::size_t>(std::llround(ratio_f));
  if (ratio == 0 || std::abs(ratio_f - static_cast<double>(ratio)) > 1e-9 ||
      (b.n_records() - 1) * ratio != a.n_records() - 1) {
    throw std::invalid_argument("first path grid must refine the second");
  }
  const std::size_t n = a.n_particles;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sup = 0.0;
    for (std::size_t k = 0; k < b.n_records(); ++k) {
      sup = std::max(sup, euclidean_distance(a.state(k * ratio, i),
                                             b.state(k, i)));
    }
    total += q == 2.0 ? sup * sup : (q == 1.0 ? sup : std::pow(sup, q));
  }
  return total / static_cast<double>(n);
}

double time_increment_moments(const ParticlePaths& paths, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("q must be > 0");
  const std::size_t records = paths.states.size() /
                              (paths.n_particles * paths.dim);
  if (records < 2) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < records; ++k) {
    for (std::size_t i = 0; i < paths.n_particles; ++i) {
      const double r =
          euclidean_distance(paths.state(k + 1, i), paths.state(k, i));
      total += q == 2.0 ? r * r : std::pow(r, q);
    }
  }
  return total /
         static_cast<double>((records - 1) * paths.n_particles);
}

double sup_second_moment(const ParticlePaths& paths) {
  const std::size_t records = paths.states.size() /
                              (paths.n_particles * paths.dim);
  const std::vector<double> zero(paths.dim, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < paths.n_particles; ++i) {
    double sup = 0.0;
    for (std::size_t k = 0; k < records; ++k) {
      sup = std::max(sup, euclidean_distance(paths.state(k, i), zero));
    }
    total += sup * sup;
  }
  return total / static_cast<double>(paths.n_particles);
}

void write_paths_csv(std::ostream& out, const ParticlePaths& paths) {
  out << "t,particle";
  for (std::size_t c = 0; c < paths.dim; ++c) out << ",x" << c;
  out << '\n';
  const std::size_t records = paths.states.size() /
                              (paths.n_particles * paths.dim);
  for (std::size_t k = 0; k < records; ++k) {
    const std::string t = format_double(paths.time(k));
    for (std::size_t i = 0; i < paths.n_particles; ++i) {
      out << t << ',' << i;
      for (double v : paths.state(k, i)) out << ',' << format_double(v);
      out << '\n';
    }
  }
}

namespace {

constexpr char kMagic[8] = {'M', 'V', 'E', 'M', 'P', 'A', 'T', 'H'};
constexpr std::uint32_t kBinaryVersion = 1;

template <class T>
void put(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little,
                "binary dump assumes a little-endian host");
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& in) {
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) {
    throw std::runtime_error("truncated paths binary");
  }
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

void write_paths_binary(std::ostream& out, const ParticlePaths& paths) {
  const std::size_t records = paths.states.size() /
                              (paths.n_particles * paths.dim);
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kBinaryVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(paths.dim));
  put<std::uint64_t>(out, paths.n_particles);
  put<std::uint64_t>(out, records - 1);
  put<double>(out, paths.record_dt());
  put<std::uint64_t>(out, paths.seed);
  for (double v : paths.states) put<double>(out, v);
}

ParticlePaths read_paths_binary(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("not a paths binary (bad magic)");
  }
  if (get<std::uint32_t>(in) != kBinaryVersion) {
    throw std::runtime_error("unsupported paths binary version");
  }
  ParticlePaths p;
  p.dim = get<std::uint32_t>(in);
  p.n_particles = get<std::uint64_t>(in);
  const auto m = get<std::uint64_t>(in);
  p.dt = get<double>(in);
  p.seed = get<std::uint64_t>(in);
  p.n_steps = m;
  p.record_stride = 1;
  p.horizon = p.dt * static_cast<double>(m);
  p.states.resize((m + 1) * p.n_particles * p.dim);
  for (double& v : p.states) v = get<double>(in);
  return p;
}

}  // namespace mvem
