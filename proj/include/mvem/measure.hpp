#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mvem {

// Non-owning view of N equally weighted atoms in R^d, stored atom-major.
struct AtomSpan {
  std::span<const double> data;
  std::size_t dim = 1;

  std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const double> atom(std::size_t i) const {
    return data.subspan(i * dim, dim);
  }
};

// N equally weighted atoms; the empirical measure (1/N) sum_j delta_{x_j}.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(std::vector<double> atoms, std::size_t dim);
  explicit EmpiricalMeasure(AtomSpan view);

  std::size_t size() const { return atoms_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> atom(std::size_t i) const {
    return std::span<const double>(atoms_).subspan(i * dim_, dim_);
  }
  const std::vector<double>& atoms() const { return atoms_; }
  AtomSpan view() const { return {atoms_, dim_}; }
  operator AtomSpan() const { return view(); }

 private:
  std::vector<double> atoms_;
  std::size_t dim_;
};

// Each atom repeated k times in place; the measure is unchanged.
EmpiricalMeasure repeat_atoms(AtomSpan a, std::size_t k);

double euclidean_distance(std::span<const double> x, std::span<const double> y);

// Exact W_p in one dimension through the monotone (sorted) coupling.
// Requires p >= 1 and equal atom counts.
double wasserstein_1d(double p, AtomSpan a, AtomSpan b);

inline constexpr std::size_t kDefaultMatchingCap = 2048;

// Exact W_p between equal-size empirical measures by minimum-cost perfect
// matching. Throws if N exceeds cap; use wasserstein_sliced there.
double wasserstein_matching(double p, AtomSpan a, AtomSpan b,
                            std::size_t cap = kDefaultMatchingCap);

// Sliced W_p: (mean over random unit directions of W_p^p of projections)^(1/p).
// Never exceeds the exact W_p.
double wasserstein_sliced(double p, AtomSpan a, AtomSpan b, std::size_t n_proj,
                          std::uint64_t seed);

// ((1/N) sum_j |a_j - b_j|^p)^(1/p) for index-aligned atoms: the cost of the
// diagonal coupling, hence an upper bound on W_p.
double coupling_upper_bound(double p, AtomSpan a, AtomSpan b);

// Minimum-cost assignment on a dense n x n row-major cost matrix
// (Hungarian method with potentials, O(n^3)). Returns column of each row.
std::vector<std::size_t> solve_assignment(std::span<const double> cost,
                                          std::size_t n);

}  // namespace mvem
