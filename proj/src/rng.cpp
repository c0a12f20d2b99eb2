#include "mvem/rng.hpp"

#include <cmath>
#include <numbers>

namespace mvem {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits =
      ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ull));
}

CounterRng::CounterRng(std::uint64_t seed, StreamTag tag)
    : seed_(seed),
      key_{static_cast<std::uint32_t>(seed),
           static_cast<std::uint32_t>(seed >> 32)},
      tag_(static_cast<std::uint32_t>(tag)) {}

std::array<std::uint32_t, 4> CounterRng::block(std::uint64_t a,
                                               std::uint64_t b,
                                               std::uint32_t j) const {
  // a and b are folded to 32 bits each; the upper halves perturb the block
  // lane so indices beyond 2^32 still map to distinct counters.
  const auto a_hi = static_cast<std::uint32_t>(a >> 32);
  const auto b_hi = static_cast<std::uint32_t>(b >> 32);
  return philox4x32({static_cast<std::uint32_t>(a),
                     static_cast<std::uint32_t>(b), j ^ (a_hi << 16) ^ b_hi,
                     tag_},
                    key_);
}

void CounterRng::normals(std::uint64_t a, std::uint64_t b,
                         std::span<double> out) const {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  for (std::size_t j = 0; 2 * j < out.size(); ++j) {
    const auto r = block(a, b, static_cast<std::uint32_t>(j));
    const double u1 = to_open_unit(r[0], r[1]);
    const double u2 = to_open_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = kTwoPi * u2;
    out[2 * j] = radius * std::cos(angle);
    if (2 * j + 1 < out.size()) out[2 * j + 1] = radius * std::sin(angle);
  }
}

void CounterRng::uniforms(std::uint64_t a, std::uint64_t b,
                          std::span<double> out) const {
  for (std::size_t j = 0; 2 * j < out.size(); ++j) {
    const auto r = block(a, b, static_cast<std::uint32_t>(j));
    out[2 * j] = to_open_unit(r[0], r[1]);
    if (2 * j + 1 < out.size()) out[2 * j + 1] = to_open_unit(r[2], r[3]);
  }
}

}  // namespace mvem
