#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace mvem {

// Philox4x32-10 counter-based block cipher. Pure function of
// (counter, key), which is what makes per-particle streams independent of
// how work is split across threads.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

// Derives a child seed; used for replication and extra-particle streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Stream purposes. Distinct tags never share counters under the same seed.
enum class StreamTag : std::uint32_t {
  kIncrement = 1,
  kInitial = 2,
  kProjection = 3,
  kProbe = 4,
  kSample = 5,
};

// Counter-based generator addressed by two 64-bit coordinates (typically
// particle index and step index). The values written for a given
// (seed, tag, a, b) never depend on call order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, StreamTag tag);

  // Standard normals via Box-Muller on 53-bit uniforms.
  void normals(std::uint64_t a, std::uint64_t b, std::span<double> out) const;
  // Uniforms in the open interval (0, 1).
  void uniforms(std::uint64_t a, std::uint64_t b, std::span<double> out) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::array<std::uint32_t, 4> block(std::uint64_t a, std::uint64_t b,
                                     std::uint32_t j) const;

  std::uint64_t seed_;
  std::array<std::uint32_t, 2> key_;
  std::uint32_t tag_;
};

}  // namespace mvem
