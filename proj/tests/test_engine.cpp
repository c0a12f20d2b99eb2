#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mvem/engine.hpp"
#include "mvem/experiments.hpp"
#include "mvem/numerics.hpp"

using namespace mvem;

TEST(BrownianGrid, Validation) {
  EXPECT_THROW(generate_brownian_grid(1, 4, 1.0, 1000, 1), std::invalid_argument);
  EXPECT_THROW(generate_brownian_grid(1, 0, 1.0, 1024, 1), std::invalid_argument);
  EXPECT_THROW(generate_brownian_grid(1, 4, -1.0, 1024, 1), std::invalid_argument);
  EXPECT_NO_THROW(generate_brownian_grid(2, 4, 1.0, 1024, 1));
}

TEST(BrownianGrid, CoarseningComposesBitwise) {
  const BrownianGrid grid(2, 5, 1.0, 256, 77);
  const auto direct = coarsen(grid, 16);
  const auto twice = coarsen(coarsen(grid, 4), 4);
  const auto thrice = coarsen(coarsen(coarsen(grid, 2), 2), 4);
  EXPECT_EQ(direct.data(), twice.data());
  EXPECT_EQ(direct.data(), thrice.data());
  EXPECT_EQ(direct.n_steps(), 16u);
  EXPECT_DOUBLE_EQ(direct.dt(), 1.0 / 16.0);
}

TEST(BrownianGrid, BlockIsSumOfFine) {
  const BrownianGrid grid(1, 3, 2.0, 64, 5);
  std::vector<double> fine(64), one(1), block(1);
  for (std::size_t k = 0; k < 64; ++k) {
    grid.fine_increment(1, k, one);
    fine[k] = one[0];
  }
  grid.block_increment(1, 2, 16, block);
  EXPECT_NEAR(block[0], pairwise_sum(std::span<const double>(fine).subspan(32, 16)),
              1e-14);
  EXPECT_NEAR(coarsen(grid, 64).at(0, 1)[0], pairwise_sum(fine), 1e-13);
}

TEST(BrownianGrid, MoreParticlesExtendFewer) {
  const auto small = coarsen(BrownianGrid(1, 4, 1.0, 32, 9), 2);
  const auto large = coarsen(BrownianGrid(1, 10, 1.0, 32, 9), 2);
  for (std::size_t k = 0; k < small.n_steps(); ++k) {
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(small.at(k, i)[0], large.at(k, i)[0]);
  }
}

TEST(BrownianGrid, IncrementVariance) {
  const std::size_t n = 2000, m = 64;
  const BrownianGrid grid(1, n, 1.0, m, 3);
  const auto view = coarsen(grid, 4);
  double s2 = 0.0;
  for (std::size_t k = 0; k < view.n_steps(); ++k) {
    for (std::size_t i = 0; i < n; ++i) s2 += view.at(k, i)[0] * view.at(k, i)[0];
  }
  const double count = static_cast<double>(n * view.n_steps());
  const double var = s2 / count;
  EXPECT_NEAR(var, view.dt(), 5.0 * view.dt() * std::sqrt(2.0 / count));
}

TEST(InitialLaw, SamplesDependOnlyOnIndex) {
  const InitialLaw law{InitialKind::kGaussian, 1.0, 0.25};
  const auto all = sample_initial(law, 2, 10, 4);
  const auto tail = sample_initial(law, 2, 4, 4, 6);
  for (std::size_t j = 0; j < tail.size(); ++j) EXPECT_EQ(tail[j], all[12 + j]);
  const auto point = sample_initial({InitialKind::kPoint, 3.0, 0.0}, 1, 5, 1);
  for (double x : point) EXPECT_EQ(x, 3.0);
  const auto unif = sample_initial({InitialKind::kUniform, -1.0, 2.0}, 1, 1000, 1);
  for (double x : unif) {
    EXPECT_GT(x, -1.0);
    EXPECT_LT(x, 2.0);
  }
}

TEST(Engine, ZeroNoiseMatchesEulerRecursion) {
  const double a = -1.0, c = 0.5;
  const auto model = make_builtin_model("linear_mf", {{"a", a}, {"c", c}, {"s", 0.0}});
  const std::size_t n = 3, m = 16;
  const BrownianGrid grid(1, n, 1.0, m, 1);
  const std::vector<double> x0{0.5, 1.0, 3.0};
  const auto paths = simulate_interacting_em(model, grid, 2, x0);
  // Hand-written recursion x <- x + (a x + c mean) dt.
  std::vector<double> x = x0;
  const double dt = 2.0 / 16.0;
  for (std::size_t k = 0; k < m / 2; ++k) {
    const double mean = (x[0] + x[1] + x[2]) / 3.0;
    for (double& xi : x) xi = xi + (a * xi + c * mean) * dt;
  }
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_NEAR(paths.state(paths.n_records() - 1, i)[0], x[i], 1e-14);
  }
}

TEST(Engine, DeterministicAcrossWorkers) {
  const auto model = make_builtin_model("bounded_holder_multid", {{"d", 3.0}});
  const BrownianGrid grid(3, 200, 1.0, 128, 21);
  const auto x0 = sample_initial({InitialKind::kGaussian, 0.5, 0.25}, 3, 200, 21);
  SimulationOptions one, four;
  one.workers = 1;
  four.workers = 4;
  const auto p1 = simulate_interacting_em(model, grid, 2, x0, one);
  const auto p4 = simulate_interacting_em(model, grid, 2, x0, four);
  EXPECT_EQ(p1.states, p4.states);
}

TEST(Engine, RecordStride) {
  const auto model = make_builtin_model("linear_mf");
  const BrownianGrid grid(1, 8, 1.0, 64, 2);
  const auto x0 = sample_initial({InitialKind::kGaussian, 1.0, 0.25}, 1, 8, 2);
  SimulationOptions strided;
  strided.record_stride = 8;
  const auto full = simulate_interacting_em(model, grid, 1, x0);
  const auto part = simulate_interacting_em(model, grid, 1, x0, strided);
  ASSERT_EQ(part.n_records(), 9u);
  for (std::size_t r = 0; r < part.n_records(); ++r) {
    for (std::size_t i = 0; i < 8; ++i) {
      EXPECT_EQ(part.state(r, i)[0], full.state(8 * r, i)[0]);
    }
  }
  SimulationOptions bad;
  bad.record_stride = 7;
  EXPECT_THROW(simulate_interacting_em(model, grid, 1, x0, bad), std::invalid_argument);
}

TEST(Engine, MeanFollowsOracle) {
  const auto model = make_builtin_model("linear_mf", {{"a", -1.0}, {"c", 0.5}, {"s", 1.0}});
  const std::size_t n = 4000, m = 256;
  const BrownianGrid grid(1, n, 1.0, m, 8);
  const auto x0 = sample_initial({InitialKind::kGaussian, 1.0, 0.25}, 1, n, 8);
  SimulationOptions opts;
  opts.record_stride = m;
  const auto paths = simulate_interacting_em(model, grid, 1, x0, opts);
  const auto last = paths.snapshot(1).data;
  const double mean = mean_of(last);
  const auto oracle = oracle_linear_gaussian(-1.0, 0.5, 1.0, 1.0, 0.25, 1.0);
  EXPECT_LT(std::abs(mean - oracle.mean), 5.0 * std::sqrt(oracle.variance / n) + 2e-3);
}

TEST(Engine, DivergenceIsRecorded) {
  ModelSpec model;
  model.name = "blowup";
  model.profile.dimension = 1;
  model.b1 = [](std::span<const double> x, const MeasureView&, std::span<double> out) {
    out[0] = x[0] * x[0] * x[0];
  };
  model.b2 = [](std::span<const double>, const MeasureView&, std::span<double> out) {
    out[0] = 0.0;
  };
  model.sigma = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
  const BrownianGrid grid(1, 2, 1.0, 64, 1);
  const std::vector<double> x0{10.0, 20.0};
  const auto paths = simulate_interacting_em(model, grid, 1, x0);
  EXPECT_TRUE(paths.diverged);
  ASSERT_TRUE(paths.divergence_step.has_value());
  EXPECT_LT(*paths.divergence_step, 64u);
}

TEST(Engine, ReferenceWithoutExtrasIsTheSameSystem) {
  const auto model = make_builtin_model("holder_diffusion_1d");
  const BrownianGrid grid(1, 16, 1.0, 64, 4);
  const auto x0 = sample_initial({InitialKind::kGaussian, 1.0, 0.25}, 1, 16, 4);
  const auto em = simulate_interacting_em(model, grid, 4, x0);
  const auto ref = simulate_reference(model, grid, x0, 0, 4, 99,
                                      {InitialKind::kGaussian, 1.0, 0.25});
  EXPECT_EQ(em.states, ref.states);
  EXPECT_EQ(strong_error_sup(ref, em, 2.0), 0.0);
}

TEST(Engine, ReferenceWithExtrasKeepsFirstParticlesNoise) {
  const auto model = make_builtin_model("linear_mf", {{"c", 0.0}});
  const BrownianGrid grid(1, 8, 1.0, 64, 4);
  const auto x0 = sample_initial({InitialKind::kGaussian, 1.0, 0.25}, 1, 8, 4);
  const auto em = simulate_interacting_em(model, grid, 1, x0);
  // Without interaction the extra particles cannot influence the first N.
  const auto ref = simulate_reference(model, grid, x0, 24, 1, 99,
                                      {InitialKind::kGaussian, 1.0, 0.25});
  EXPECT_EQ(ref.n_particles, 8u);
  EXPECT_EQ(em.states, ref.states);
}

TEST(Engine, StrongErrorChecks) {
  const auto model = make_builtin_model("linear_mf");
  const BrownianGrid grid(1, 4, 1.0, 64, 1);
  const auto x0 = sample_initial({InitialKind::kGaussian, 1.0, 0.25}, 1, 4, 1);
  const auto fine = simulate_interacting_em(model, grid, 1, x0);
  const auto coarse = simulate_interacting_em(model, grid, 8, x0);
  EXPECT_GT(strong_error_sup(fine, coarse, 2.0), 0.0);
  EXPECT_THROW(strong_error_sup(coarse, fine, 2.0), std::invalid_argument);
  const auto other = simulate_interacting_em(model, BrownianGrid(1, 3, 1.0, 64, 1), 8,
                                             std::span<const double>(x0).first(3));
  EXPECT_THROW(strong_error_sup(fine, other, 2.0), std::invalid_argument);
}

TEST(Engine, BinaryRoundTrip) {
  const auto model = make_builtin_model("bounded_holder_multid", {{"d", 2.0}});
  const BrownianGrid grid(2, 5, 1.0, 32, 6);
  const auto x0 = sample_initial({InitialKind::kUniform, -1.0, 1.0}, 2, 5, 6);
  const auto paths = simulate_interacting_em(model, grid, 2, x0);
  std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
  write_paths_binary(ss, paths);
  const std::string bytes = ss.str();
  ASSERT_GE(bytes.size(), 48u);
  EXPECT_EQ(bytes.substr(0, 8), "MVEMPATH");
  EXPECT_EQ(bytes.size(), 48u + 8u * paths.states.size());
  const auto back = read_paths_binary(ss);
  EXPECT_EQ(back.states, paths.states);
  EXPECT_EQ(back.dim, 2u);
  EXPECT_EQ(back.n_particles, 5u);
  EXPECT_EQ(back.seed, paths.seed);
  EXPECT_DOUBLE_EQ(back.record_dt(), paths.record_dt());

  std::stringstream bad("NOTAPATHxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx");
  EXPECT_THROW(read_paths_binary(bad), std::runtime_error);
}

TEST(Engine, CsvLayout) {
  const auto model = make_builtin_model("linear_mf");
  const BrownianGrid grid(1, 2, 1.0, 4, 6);
  const std::vector<double> x0{0.0, 1.0};
  std::ostringstream os;
  write_paths_csv(os, simulate_interacting_em(model, grid, 1, x0));
  const std::string csv = os.str();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,particle,x0");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 5 * 2);
}

TEST(Picard, ContractsOnLinearModel) {
  const auto model = make_builtin_model("linear_mf", {{"a", -1.0}, {"c", 0.5}});
  const BrownianGrid grid(1, 256, 1.0, 64, 12);
  const auto x0 = sample_initial({InitialKind::kGaussian, 1.0, 0.25}, 1, 256, 12);
  const auto res = picard_mean_field(model, grid, 1, 6, x0);
  ASSERT_EQ(res.distances.size(), 6u);
  ASSERT_EQ(res.flows.size(), 7u);
  for (std::size_t k = 2; k < res.distances.size(); ++k) {
    EXPECT_LT(res.distances[k], res.distances[k - 1]);
  }
}

TEST(Engine, TimeIncrementMoments) {
  const auto model = make_builtin_model("linear_mf", {{"a", 0.0}, {"c", 0.0}, {"s", 1.0}});
  const std::size_t n = 2000;
  const BrownianGrid grid(1, n, 1.0, 16, 13);
  const std::vector<double> x0(n, 0.0);
  const auto paths = simulate_interacting_em(model, grid, 1, x0);
  // Pure Brownian motion: E|dX|^2 = dt.
  const double dt = 1.0 / 16.0;
  EXPECT_NEAR(time_increment_moments(paths, 2.0), dt, 5.0 * dt * std::sqrt(2.0 / (n * 16)));
  EXPECT_GT(sup_second_moment(paths), 1.0);
}
