#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "curvctmc/bounds.hpp"
#include "curvctmc/chain_model.hpp"
#include "curvctmc/curvature.hpp"
#include "curvctmc/simulate.hpp"

namespace curvctmc {

/// A birth-death chain with its metric, as read from a chain file.
struct ChainDefinition {
  std::string name;
  BirthDeathRates rates;
  Metric metric;
};

/// Accepts explicit rates {n, truncated, lambda, nu, metric} or the presets
/// {"preset": "ehrenfest", n, lambda, nu} and {"preset": "mm1", lambda, nu,
/// truncation_n}.
ChainDefinition chain_from_json(const nlohmann::json& j);
ChainDefinition load_chain_file(const std::filesystem::path& path);

/// A number, or one of "inf" / "stationary".
double time_from_json(const nlohmann::json& j);
nlohmann::json time_to_json(double t);

Variant variant_from_string(std::string_view s);

nlohmann::json to_json(const CurvatureCertificate& cert);
/// {kind, value, valid, argmin, t_grid, estimates[]}
nlohmann::json curvature_json(const CurvatureCertificate& cert, const CurvatureEstimate& est);

/// Inputs to the named closed-form bounds.
struct BoundParams {
  DeviationBoundSpec spec;
  // Multi-time and fluid-limit forms.
  std::size_t n = 1;
  double horizon = 1.0;
  double lambda = 0.5;
  double nu = 0.5;
};

BoundParams bound_params_from_json(const nlohmann::json& params);

/// Names accepted by log_bound_by_name.
const std::vector<std::string>& closed_form_bounds();

double log_bound_by_name(std::string_view bound, double y, const BoundParams& params);

/// Output labels for one evaluated curve: "underflow", "extension",
/// "stationary".
std::vector<std::string> bound_flags(std::string_view bound, const BoundParams& params,
                                     bool underflow);

/// {"bound", "params", "y_grid"} -> {"values", "variant", "flags"}.
nlohmann::json evaluate_bound_request(const nlohmann::json& request);

/// Shortest text that reads back to the same double.
std::string format_number(double v);

/// Columns y, k, n, p_hat, upper_<confidence>, analytic_bound, pass.
void write_tail_csv(std::ostream& out, const TailEstimate& est);

}  // namespace curvctmc
