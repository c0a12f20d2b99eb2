#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mvem/measure.hpp"
#include "mvem/rng.hpp"

using namespace mvem;

namespace {

std::vector<double> draw(std::size_t count, std::uint64_t seed, std::uint64_t slot) {
  std::vector<double> v(count);
  CounterRng(seed, StreamTag::kSample).normals(slot, 0, v);
  return v;
}

// Minimum over all permutations, written independently of the library.
double brute_force(double p, const std::vector<double>& a,
                   const std::vector<double>& b, std::size_t d) {
  const std::size_t n = a.size() / d;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = a[i * d + k] - b[perm[i] * d + k];
        sq += diff * diff;
      }
      total += std::pow(std::sqrt(sq), p);
    }
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::pow(best / static_cast<double>(n), 1.0 / p);
}

}  // namespace

TEST(Wasserstein, MatchingEqualsBruteForce) {
  for (std::uint64_t k = 0; k < 60; ++k) {
    const std::size_t n = 1 + k % 6;
    const std::size_t d = 1 + (k / 6) % 3;
    const double p = (k % 2 == 0) ? 1.0 : 2.0;
    const auto a = draw(n * d, k, 0), b = draw(n * d, k, 1);
    const EmpiricalMeasure ma(a, d), mb(b, d);
    EXPECT_NEAR(wasserstein_matching(p, ma, mb), brute_force(p, a, b, d), 1e-12)
        << "n=" << n << " d=" << d << " p=" << p;
  }
}

TEST(Wasserstein, OneDimensionalEqualsBruteForce) {
  for (std::uint64_t k = 0; k < 30; ++k) {
    const std::size_t n = 1 + k % 7;
    const double p = 1.0 + 0.5 * static_cast<double>(k % 4);
    const auto a = draw(n, 100 + k, 0), b = draw(n, 100 + k, 1);
    EXPECT_NEAR(wasserstein_1d(p, EmpiricalMeasure(a, 1), EmpiricalMeasure(b, 1)),
                brute_force(p, a, b, 1), 1e-12);
  }
}

TEST(Wasserstein, ShiftedMeasureClosedForm) {
  // Translating every atom by t moves the measure by exactly |t|.
  const auto a = draw(40, 7, 0);
  auto b = a;
  for (double& x : b) x += 0.375;
  const EmpiricalMeasure ma(a, 1), mb(b, 1);
  for (double p : {1.0, 2.0, 3.0}) {
    EXPECT_NEAR(wasserstein_1d(p, ma, mb), 0.375, 1e-14);
    EXPECT_NEAR(wasserstein_matching(p, ma, mb), 0.375, 1e-12);
  }
}

TEST(Wasserstein, MetricProperties) {
  const std::size_t n = 12, d = 2;
  const EmpiricalMeasure a(draw(n * d, 1, 0), d), b(draw(n * d, 1, 1), d),
      c(draw(n * d, 1, 2), d);
  for (double p : {1.0, 2.0}) {
    EXPECT_NEAR(wasserstein_matching(p, a, a), 0.0, 1e-15);
    EXPECT_NEAR(wasserstein_matching(p, a, b), wasserstein_matching(p, b, a), 1e-12);
    EXPECT_LE(wasserstein_matching(p, a, c),
              wasserstein_matching(p, a, b) + wasserstein_matching(p, b, c) + 1e-12);
  }
}

TEST(Wasserstein, BoundsOrder) {
  for (std::uint64_t k = 0; k < 20; ++k) {
    const std::size_t n = 16, d = 3;
    const EmpiricalMeasure a(draw(n * d, 50 + k, 0), d), b(draw(n * d, 50 + k, 1), d);
    const double exact = wasserstein_matching(2.0, a, b);
    EXPECT_LE(wasserstein_sliced(2.0, a, b, 32, k), exact + 1e-12);
    EXPECT_GE(coupling_upper_bound(2.0, a, b), exact - 1e-12);
  }
}

TEST(Wasserstein, SlicedInOneDimensionIsExact) {
  const EmpiricalMeasure a(draw(30, 4, 0), 1), b(draw(30, 4, 1), 1);
  EXPECT_NEAR(wasserstein_sliced(1.0, a, b, 8, 3), wasserstein_1d(1.0, a, b), 1e-12);
}

TEST(Wasserstein, RepeatedAtomsLeaveDistanceUnchanged) {
  const EmpiricalMeasure a(draw(9, 2, 0), 1), b(draw(9, 2, 1), 1);
  EXPECT_NEAR(wasserstein_1d(1.0, repeat_atoms(a, 4), repeat_atoms(b, 4)),
              wasserstein_1d(1.0, a, b), 1e-14);
}

TEST(Wasserstein, Errors) {
  const EmpiricalMeasure a(draw(4, 1, 0), 1), b(draw(6, 1, 1), 1);
  EXPECT_THROW(wasserstein_1d(1.0, a, b), std::invalid_argument);
  EXPECT_THROW(wasserstein_1d(0.5, a, a), std::invalid_argument);
  EXPECT_THROW(wasserstein_matching(1.0, a, a, 3), std::length_error);
  const std::vector<double> bad{1.0, std::nan("")};
  EXPECT_THROW(EmpiricalMeasure(bad, 1), std::invalid_argument);
}

TEST(Assignment, KnownOptimum) {
  // Row i prefers column (i + 1) mod 3; optimum cost 3.
  const std::vector<double> cost{9, 1, 9, 9, 9, 1, 1, 9, 9};
  const auto assignment = solve_assignment(cost, 3);
  EXPECT_EQ(assignment, (std::vector<std::size_t>{1, 2, 0}));
}
