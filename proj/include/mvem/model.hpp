#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mvem/measure.hpp"

namespace mvem {

// Declared regularity constants of a model.
//
// For the one-dimensional class, `beta` and `K1` describe the drift
// (b1 beta-Hoelder and W1-Lipschitz, b2 Lipschitz in both arguments) and
// `alpha`/`K2` the diffusion. For the multi-dimensional class,
// `alpha`/`K` describe the drift, `K2` is a Lipschitz constant of sigma,
// `sigma_min` a lower bound on its singular values and `drift_bound` /
// `sigma_bound` sup-norm bounds.
struct RegularityProfile {
  std::size_t dimension = 1;
  double alpha = 1.0;
  double beta = 1.0;
  double K1 = 0.0;
  double K2 = 0.0;
  double K = 0.0;
  double sigma_min = 0.0;
  double drift_bound = 0.0;
  double sigma_bound = 0.0;

  // Throws std::invalid_argument if any invariant is violated. `one_dim`
  // additionally enforces alpha >= 1/2.
  void validate(bool one_dim) const;
};

// Read-only view of an empirical measure handed to drift functions. The
// mean is computed once at construction; other functionals are O(N) per
// call.
class MeasureView {
 public:
  explicit MeasureView(AtomSpan sample);

  AtomSpan sample() const { return sample_; }
  std::span<const double> mean() const { return mean_; }
  std::size_t size() const { return sample_.size(); }
  std::size_t dim() const { return sample_.dim; }
  // (1/N) sum |x_j|^p, p >= 1.
  double abs_moment(double p) const;
  double lip_average(
      const std::function<double(std::span<const double>)>& phi) const;

 private:
  AtomSpan sample_;
  std::vector<double> mean_;
};

using DriftFn = std::function<void(std::span<const double> x,
                                   const MeasureView& m, std::span<double> out)>;
// Writes the d x d diffusion matrix, row-major.
using DiffusionFn =
    std::function<void(std::span<const double> x, std::span<double> out)>;

enum class FamilyClass { kOneDimHolder, kMultiDimBounded, kCustom };

std::string_view to_string(FamilyClass c);

struct ModelSpec {
  std::string name;
  RegularityProfile profile;
  DriftFn b1;
  DriftFn b2;
  DiffusionFn sigma;
  FamilyClass family_class = FamilyClass::kCustom;

  std::size_t dim() const { return profile.dimension; }
  // b = b1 + b2; `scratch` must hold dim() values.
  void drift(std::span<const double> x, const MeasureView& m,
             std::span<double> out, std::span<double> scratch) const;
};

using ParamMap = std::map<std::string, double>;

// Built-in families: linear_mf, holder_drift_1d, holder_diffusion_1d,
// bounded_holder_multid. Missing parameters take documented defaults;
// unknown keys and out-of-range values throw std::invalid_argument.
ModelSpec make_builtin_model(std::string_view family_id,
                             const ParamMap& params = {});

std::vector<std::string> builtin_families();
// Parameter names with their defaults, for help output and config checks.
ParamMap builtin_defaults(std::string_view family_id);

struct ProbeConfig {
  double box_radius = 3.0;
  std::size_t n_pairs = 1000;
  std::uint64_t seed = 1;
  double tol = 1e-9;
  // Atoms per random probe measure.
  std::size_t measure_atoms = 8;
  // Smallest singular value still counted as invertible.
  double singular_floor = 1e-3;
};

struct ValidationEntry {
  std::string check;
  double observed = 0.0;
  double declared = 0.0;
  bool pass = true;
  std::string note;
};

struct ValidationReport {
  std::string model;
  std::vector<ValidationEntry> entries;
  bool pass() const;
};

// Falsification-style check of the declared profile on random probes.
ValidationReport validate_model(const ModelSpec& model,
                                const ProbeConfig& probe = {});

}  // namespace mvem
