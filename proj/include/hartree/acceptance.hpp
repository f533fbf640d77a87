#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace hartree {

struct AcceptanceOptions {
  std::size_t n = 4096;
  double r_max = 32.0;
  std::size_t fine_n = 8192; // resolution for the convergence rerun
  std::uint64_t seed = 7;
  std::vector<int> only; // criterion ids to run; empty runs all
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string summary; // one line of the key measured numbers
  nlohmann::json details;
  double seconds = 0.0;
};

// "PASS  3 solitary-wave stationarity: ..." style line.
std::string format_result(const CriterionResult &r);

// Runs acceptance criteria 1-11 in order, sharing the ground state and the
// long runs between them. Exceptions inside a criterion turn into a FAIL with
// the message recorded.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions &opt,
                                            const std::function<void(const CriterionResult &)> &on_result = {});

} // namespace hartree
