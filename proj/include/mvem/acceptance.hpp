#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace mvem {

inline constexpr std::uint64_t kDefaultSeed = 20240607;

enum class Budget { kFull, kQuick };

Budget budget_from_string(const std::string& s);
std::string to_string(Budget b);

struct AcceptanceConfig {
  Budget budget = Budget::kFull;
  std::uint64_t seed = kDefaultSeed;
  std::size_t workers = 0;
  // Criterion ids to run; empty = all.
  std::set<int> only;
  // Criteria whose acceptance band is collapsed to zero width (forced
  // failure fixture).
  std::set<int> zero_tolerance;
  // Working directory for the determinism criterion; a temporary directory
  // is used when empty.
  std::filesystem::path scratch;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string tolerance;
  nlohmann::json measured;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  std::string error;  // exception text, if the criterion threw
};

struct AcceptanceReport {
  Budget budget = Budget::kFull;
  std::uint64_t seed = 0;
  std::vector<CriterionResult> criteria;
  double wall_seconds = 0.0;

  bool pass() const;
  nlohmann::json to_json() const;
};

inline constexpr int kCriterionCount = 11;

// Runs the acceptance criteria. Failures and exceptions become report
// entries; the function itself only throws on a bad config.
AcceptanceReport run_acceptance_suite(const AcceptanceConfig& config);

// Single criterion, used by the acceptance test binary.
CriterionResult run_criterion(int id, const AcceptanceConfig& config);

}  // namespace mvem
