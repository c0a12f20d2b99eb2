#include "mvem/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mvem/rng.hpp"

namespace mvem {
namespace {

void require_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("Wasserstein order p must be >= 1, got " +
                                std::to_string(p));
  }
}

void require_same_shape(AtomSpan a, AtomSpan b) {
  if (a.dim != b.dim) {
    throw std::invalid_argument("measures have different dimensions");
  }
  if (a.size() != b.size()) {
    throw std::invalid_argument("measures have different atom counts (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
  if (a.size() == 0) throw std::invalid_argument("empty measure");
}

inline double pow_p(double r, double p) {
  if (p == 1.0) return r;
  if (p == 2.0) return r * r;
  return std::pow(r, p);
}

inline double root_p(double s, double p) {
  if (p == 1.0) return s;
  if (p == 2.0) return std::sqrt(s);
  return std::pow(s, 1.0 / p);
}

double sorted_cost(std::vector<double> x, std::vector<double> y, double p) {
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    total += pow_p(std::abs(x[i] - y[i]), p);
  }
  return total / static_cast<double>(x.size());
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> atoms, std::size_t dim)
    : atoms_(std::move(atoms)), dim_(dim) {
  if (dim_ == 0) throw std::invalid_argument("dimension must be >= 1");
  if (atoms_.empty() || atoms_.size() % dim_ != 0) {
    throw std::invalid_argument("atom buffer is empty or not a multiple of dim");
  }
  for (double v : atoms_) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite atom");
  }
}

EmpiricalMeasure::EmpiricalMeasure(AtomSpan view)
    : EmpiricalMeasure(std::vector<double>(view.data.begin(), view.data.end()),
                       view.dim) {}

EmpiricalMeasure repeat_atoms(AtomSpan a, std::size_t k) {
  std::vector<double> out;
  out.reserve(a.data.size() * k);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto x = a.atom(i);
    for (std::size_t r = 0; r < k; ++r) out.insert(out.end(), x.begin(), x.end());
  }
  return EmpiricalMeasure(std::move(out), a.dim);
}

double euclidean_distance(std::span<const double> x,
                          std::span<const double> y) {
  if (x.size() == 1) return std::abs(x[0] - y[0]);
  double s = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) s += (x[c] - y[c]) * (x[c] - y[c]);
  return std::sqrt(s);
}

double wasserstein_1d(double p, AtomSpan a, AtomSpan b) {
  require_p(p);
  if (a.dim != 1 || b.dim != 1) {
    throw std::invalid_argument("wasserstein_1d needs one-dimensional measures");
  }
  require_same_shape(a, b);
  return root_p(sorted_cost({a.data.begin(), a.data.end()},
                            {b.data.begin(), b.data.end()}, p),
                p);
}

std::vector<std::size_t> solve_assignment(std::span<const double> cost,
                                          std::size_t n) {
  if (cost.size() != n * n) throw std::invalid_argument("cost matrix shape");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials formulation; column 0 is the virtual start.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<double> minv(n + 1);
  std::vector<char> used(n + 1);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
  return assignment;
}

double wasserstein_matching(double p, AtomSpan a, AtomSpan b,
                            std::size_t cap) {
  require_p(p);
  require_same_shape(a, b);
  const std::size_t n = a.size();
  if (n > cap) {
    throw std::length_error("wasserstein_matching: N = " + std::to_string(n) +
                            " exceeds cap " + std::to_string(cap) +
                            "; use wasserstein_sliced");
  }
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cost[i * n + j] = pow_p(euclidean_distance(a.atom(i), b.atom(j)), p);
    }
  }
  const auto assignment = solve_assignment(cost, n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += cost[i * n + assignment[i]];
  return root_p(total / static_cast<double>(n), p);
}

double wasserstein_sliced(double p, AtomSpan a, AtomSpan b, std::size_t n_proj,
                          std::uint64_t seed) {
  require_p(p);
  require_same_shape(a, b);
  if (n_proj == 0) throw std::invalid_argument("n_proj must be >= 1");
  const std::size_t n = a.size();
  const std::size_t d = a.dim;
  const CounterRng rng(seed, StreamTag::kProjection);
  std::vector<double> dir(d), pa(n), pb(n);
  double total = 0.0;
  for (std::size_t k = 0; k < n_proj; ++k) {
    rng.normals(k, 0, dir);
    double norm = 0.0;
    for (double c : dir) norm += c * c;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      dir.assign(d, 0.0);
      dir[0] = norm = 1.0;
    }
    for (double& c : dir) c /= norm;
    for (std::size_t i = 0; i < n; ++i) {
      double sa = 0.0, sb = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        sa += dir[c] * a.data[i * d + c];
        sb += dir[c] * b.data[i * d + c];
      }
      pa[i] = sa;
      pb[i] = sb;
    }
    total += sorted_cost(pa, pb, p);
  }
  return root_p(total / static_cast<double>(n_proj), p);
}

double coupling_upper_bound(double p, AtomSpan a, AtomSpan b) {
  require_p(p);
  require_same_shape(a, b);
  const std::size_t n = a.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += pow_p(euclidean_distance(a.atom(i), b.atom(i)), p);
  }
  return root_p(total / static_cast<double>(n), p);
}

}  // namespace mvem
