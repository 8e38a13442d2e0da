#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace ffstab {

struct AcceptanceResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 7;
  int form_trials = 1000;
  std::vector<int> only;  // criterion ids to run; empty runs all eleven
};

// Runs the fixed acceptance criteria. Each result line is also written to `progress` as it finishes.
std::vector<AcceptanceResult> run_acceptance(const AcceptanceOptions& opts = {}, std::ostream* progress = nullptr);

std::string format_result(const AcceptanceResult& r);

}  // namespace ffstab
