#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvem/acceptance.hpp"
#include "mvem/engine.hpp"
#include "mvem/model.hpp"

namespace mvem {

inline constexpr int kSchemaVersion = 1;

// Malformed or inconsistent configuration; what() names the line or field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutputToggles {
  bool csv = true;
  bool json = true;
  bool svg = true;
  bool binary = false;
};

struct SweepBlock {
  std::vector<std::size_t> N_list{256, 512, 1024, 2048};
  std::vector<std::size_t> factor_list{8, 16, 32, 64};
  double T = 1.0;
  std::size_t M = 1024;
  std::size_t R = 4;
  std::size_t N = 1024;      // sweep-dt particle count
  std::size_t factor = 1;    // sweep-n step multiplier
  std::size_t factor_ref = 1;
  // Extra reference particles; unset = 0 for sweep-dt, 3 * max(N_list) for
  // sweep-n.
  std::optional<std::size_t> n_extra;
  double q = 2.0;
  bool independent_grids = false;
};

struct SimulateBlock {
  std::size_t N = 1024;
  std::size_t factor = 1;
  std::size_t record_stride = 1;
};

struct PicardBlock {
  std::size_t N = 1024;
  std::size_t factor = 1;
  std::size_t k_max = 8;
};

struct GlivenkoBlock {
  std::size_t dim = 1;
  double p = 1.0;
  std::vector<std::size_t> N_list{32, 64, 128, 256, 512, 1024};
  std::size_t R = 32;
  std::size_t truth_multiple = 64;
  std::size_t n_proj = 64;
};

struct YamadaBlock {
  std::optional<double> gamma;  // unset = e^(1/eps)
  double eps = 0.1;
  std::size_t n_probe = 1000;
  double tol = 1e-8;
  double fd_tol = 1e-6;
};

struct AcceptBlock {
  Budget budget = Budget::kFull;
  std::set<int> only;
  std::set<int> zero_tolerance;
};

struct RunConfig {
  std::string subcommand;
  std::uint64_t seed = kDefaultSeed;
  std::size_t workers = 0;
  std::string out = "mvem-out";
  OutputToggles outputs;
  std::string family = "linear_mf";
  ParamMap params;  // overrides on top of the family defaults
  InitialLaw initial{InitialKind::kGaussian, 1.0, 0.25};
  SweepBlock sweep;
  SimulateBlock simulate;
  PicardBlock picard;
  GlivenkoBlock glivenko;
  YamadaBlock yamada;
  ProbeConfig probe;
  AcceptBlock accept;

  // Family defaults merged with `params`.
  ParamMap effective_params() const;
  // Throws ConfigError on any invariant violation.
  void validate() const;
};

const std::vector<std::string>& subcommands();

// Strict reader: unknown keys and wrong types are errors. Missing keys keep
// the defaults above.
RunConfig config_from_json(const nlohmann::json& doc);
// Parses text; syntax errors report line and column.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Effective config with every field present; config_from_json accepts it.
nlohmann::json config_to_json(const RunConfig& config);

}  // namespace mvem
