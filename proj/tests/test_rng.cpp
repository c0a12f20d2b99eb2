#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "mvem/rng.hpp"

using namespace mvem;

// Known-answer vectors published with the Random123 reference implementation.
TEST(Philox, KnownAnswerZero) {
  const auto out = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                              {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
  const auto out = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                              {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out[0], 0xd16cfe09u);
  EXPECT_EQ(out[1], 0x94fdccebu);
  EXPECT_EQ(out[2], 0x5001e420u);
  EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(CounterRng, OrderIndependent) {
  const CounterRng rng(42, StreamTag::kIncrement);
  std::vector<double> a(7), b(7), c(7);
  rng.normals(3, 9, a);
  rng.normals(100, 1, c);
  rng.normals(3, 9, b);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(CounterRng, PrefixStable) {
  const CounterRng rng(42, StreamTag::kInitial);
  std::vector<double> short_run(3), long_run(11);
  rng.normals(5, 6, short_run);
  rng.normals(5, 6, long_run);
  for (std::size_t i = 0; i < short_run.size(); ++i) EXPECT_EQ(short_run[i], long_run[i]);
}

TEST(CounterRng, TagsAndSeedsSeparateStreams) {
  std::vector<double> a(4), b(4), c(4);
  CounterRng(1, StreamTag::kIncrement).normals(0, 0, a);
  CounterRng(1, StreamTag::kInitial).normals(0, 0, b);
  CounterRng(2, StreamTag::kIncrement).normals(0, 0, c);
  EXPECT_NE(a, b);
  EXPECT_NE(a, c);
}

TEST(CounterRng, HighCoordinateBitsMatter) {
  const CounterRng rng(9, StreamTag::kSample);
  std::vector<double> a(2), b(2);
  rng.uniforms(1, 0, a);
  rng.uniforms(1 + (std::uint64_t{1} << 32), 0, b);
  EXPECT_NE(a, b);
}

TEST(CounterRng, UniformsOpenInterval) {
  const CounterRng rng(3, StreamTag::kSample);
  std::vector<double> u(4096);
  for (std::uint64_t k = 0; k < 64; ++k) {
    rng.uniforms(k, 0, u);
    for (double x : u) {
      EXPECT_GT(x, 0.0);
      EXPECT_LT(x, 1.0);
    }
  }
}

TEST(CounterRng, NormalMoments) {
  const CounterRng rng(11, StreamTag::kIncrement);
  const std::size_t n = 200000;
  std::vector<double> z(n);
  rng.normals(0, 0, z);
  double m1 = 0, m2 = 0, m4 = 0;
  for (double v : z) {
    m1 += v;
    m2 += v * v;
    m4 += v * v * v * v;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  // Five standard errors: sd(mean) = 1/sqrt(n), sd(m2) = sqrt(2/n),
  // sd(m4) = sqrt(96/n).
  EXPECT_LT(std::abs(m1), 5.0 / std::sqrt(n));
  EXPECT_LT(std::abs(m2 - 1.0), 5.0 * std::sqrt(2.0 / n));
  EXPECT_LT(std::abs(m4 - 3.0), 5.0 * std::sqrt(96.0 / n));
}

TEST(DeriveSeed, DistinctChildren) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(20240607, i));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(derive_seed(5, 7), derive_seed(5, 7));
  EXPECT_NE(derive_seed(5, 7), derive_seed(7, 5));
}
