#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <string>

#include "mvem/acceptance.hpp"
#include "mvem/io.hpp"

// Runs every acceptance criterion at full budget, one line per criterion.
int main(int argc, char** argv) {
  mvem::AcceptanceConfig config;
  std::string report_path;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) {
      config.budget = mvem::Budget::kQuick;
    } else if (std::strcmp(argv[i], "--report") == 0 && i + 1 < argc) {
      report_path = argv[++i];
    } else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      config.only.insert(std::stoi(argv[++i]));
    } else {
      std::cerr << "usage: acceptance [--quick] [--only ID]... [--report PATH]\n";
      return 2;
    }
  }

  mvem::AcceptanceReport report;
  report.budget = config.budget;
  report.seed = config.seed;
  for (int id = 1; id <= mvem::kCriterionCount; ++id) {
    if (!config.only.empty() && !config.only.contains(id)) continue;
    auto r = mvem::run_criterion(id, config);
    std::string detail;
    if (r.measured.is_object() && r.measured.contains("fit")) {
      detail = " slope=" + mvem::format_double(r.measured["fit"]["slope"].get<double>());
    }
    std::printf("[%s] criterion %d %s%s (tolerance: %s; seed %llu; %.1f s)%s%s\n",
                r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), detail.c_str(),
                r.tolerance.c_str(), static_cast<unsigned long long>(r.seed),
                r.wall_seconds, r.error.empty() ? "" : " error: ", r.error.c_str());
    std::fflush(stdout);
    report.wall_seconds += r.wall_seconds;
    report.criteria.push_back(std::move(r));
  }
  if (!report_path.empty()) {
    mvem::write_file_atomic(report_path, report.to_json().dump(2) + "\n");
  }
  std::printf("acceptance: %s\n", report.pass() ? "PASS" : "FAIL");
  return report.pass() ? 0 : 1;
}
