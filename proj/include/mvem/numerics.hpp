#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mvem {

// Balanced binary-tree summation. For power-of-two lengths the tree over a
// range equals the tree over its aligned halves, so block sums compose
// bitwise.
double pairwise_sum(std::span<const double> values);

// Same, over a strided view: values[offset + k * stride], k < count.
double pairwise_sum_strided(std::span<const double> values, std::size_t offset,
                            std::size_t stride, std::size_t count);

// Adaptive Simpson with Richardson correction on [a, b].
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 48);

double mean_of(std::span<const double> values);
double median_of(std::vector<double> values);
// Sample standard deviation / sqrt(n); 0 for fewer than two values.
double standard_error_of(std::span<const double> values);

bool is_power_of_two(std::size_t n);

}  // namespace mvem
