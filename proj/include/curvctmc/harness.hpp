#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "curvctmc/bounds.hpp"
#include "curvctmc/io.hpp"

namespace curvctmc {

enum ExitCode : int { kExitPass = 0, kExitViolation = 1, kExitConfig = 2 };

/// Command-line values that take precedence over the config file.
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> paths;
  std::optional<std::filesystem::path> out;
};

struct ExperimentConfig {
  /// Config as read, with overrides applied; hashed into the run id.
  nlohmann::json snapshot;
  std::optional<ChainDefinition> chain;
  /// "identity", "coordinate-average" or "table".
  std::string function = "identity";
  std::vector<double> table;
  std::size_t x0 = 0;
  /// Sampling times; one entry for single-time commands. May hold
  /// kStationaryTime for bound curves.
  std::vector<double> times{1.0};
  std::vector<double> t_grid{0.1, 0.5, 1.0, 2.0};
  std::vector<double> y_grid;
  std::uint64_t n_paths = 100'000;
  std::uint64_t seed = 1;
  double confidence = 0.99;
  std::vector<std::string> bounds;
  std::vector<Variant> variants{Variant::Standard};
  /// Field overrides for the bound constants, as in a bound request.
  nlohmann::json params = nlohmann::json::object();
  double slack = 0.0;
  double bound_scale = 1.0;
  unsigned workers = 0;
  std::vector<int> criteria;
  bool enforce_time_limits = true;
  std::filesystem::path out = "results";
};

/// Parses and validates a config file; problems raise Error(Config).
ExperimentConfig load_config(const std::filesystem::path& path, const CliOverrides& overrides);
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir,
                              const CliOverrides& overrides);

/// 16 hex digits of FNV-1a over the canonical config text and the seed.
std::string run_id(const ExperimentConfig& cfg);

int cmd_curvature(const ExperimentConfig& cfg, std::ostream& log);
int cmd_bound(const ExperimentConfig& cfg, std::ostream& log);
int cmd_tail(const ExperimentConfig& cfg, std::ostream& log);
int cmd_verify(const ExperimentConfig& cfg, std::ostream& log);

/// Loads the config and dispatches; errors become exit code 2.
int run_command(const std::string& command, const std::filesystem::path& config,
                const CliOverrides& overrides, std::ostream& log, std::ostream& err);

}  // namespace curvctmc
