#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "curvctmc/simulate.hpp"

namespace curvctmc {

struct AcceptanceConfig {
  std::uint64_t n_paths = 100'000;
  std::uint64_t seed = 1;
  double confidence = 0.99;
  /// Multiplies every analytic bound before comparison. Values below 1
  /// inject a fault.
  double bound_scale = 1.0;
  unsigned workers = 0;
  /// Criteria to run, 1..12; empty runs all of them.
  std::vector<int> criteria;
  bool enforce_time_limits = true;
};

struct CriterionReport {
  int id = 0;
  std::string title;
  CheckStatus status = CheckStatus::Untested;
  double seconds = 0.0;
  double time_limit = 0.0;
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::size_t untested = 0;
  std::string detail;
  /// First few offending cases, e.g. "(ehrenfest n=50, y=4, cor49): ...".
  std::vector<std::string> violations;
  /// Tail estimates produced by Monte Carlo criteria, keyed by label.
  std::vector<std::pair<std::string, TailEstimate>> tails;
};

inline constexpr int kCriterionCount = 12;

CriterionReport run_criterion(int id, const AcceptanceConfig& cfg);

std::vector<CriterionReport> run_acceptance(
    const AcceptanceConfig& cfg,
    const std::function<void(const CriterionReport&)>& on_done = {});

/// One line: status, id, title, timing and the summary detail.
std::string summary_line(const CriterionReport& report);

}  // namespace curvctmc
