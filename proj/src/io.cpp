#include "curvctmc/io.hpp"

#include <cstdint>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "curvctmc/error.hpp"

namespace curvctmc {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::Config, what); }

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) config_error(std::string("missing field \"") + key + '"');
  return j.at(key);
}

double number(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number()) config_error(std::string("field \"") + key + "\" must be a number");
  return v.get<double>();
}

std::size_t count(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    config_error(std::string("field \"") + key + "\" must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::vector<double> numbers(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_array()) config_error(std::string("field \"") + key + "\" must be an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) config_error(std::string("field \"") + key + "\" must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::optional<double> optional_number(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number()) config_error(std::string("field \"") + key + "\" must be a number");
  return j.at(key).get<double>();
}

Metric metric_from_json(const json& j, std::size_t size) {
  if (!j.contains("metric")) return Metric::unit(size);
  const json& m = j.at("metric");
  const json& kind = require(m, "kind");
  if (kind == "unit") return Metric::unit(size);
  if (kind == "weighted") {
    auto w = numbers(m, "weights");
    if (w.size() + 1 != size) config_error("metric needs one weight per edge");
    return Metric::weighted(std::move(w));
  }
  config_error("metric kind must be \"unit\" or \"weighted\"");
}

}  // namespace

ChainDefinition chain_from_json(const json& j) {
  if (!j.is_object()) config_error("chain definition must be an object");
  if (j.contains("preset")) {
    const auto preset = j.at("preset").get<std::string>();
    if (preset == "ehrenfest") {
      auto rates = BirthDeathRates::ehrenfest(count(j, "n"), number(j, "lambda"), number(j, "nu"));
      auto metric = metric_from_json(j, rates.size());
      return {"ehrenfest", std::move(rates), std::move(metric)};
    }
    if (preset == "mm1") {
      auto rates =
          BirthDeathRates::mm1(number(j, "lambda"), number(j, "nu"), count(j, "truncation_n"));
      auto metric = metric_from_json(j, rates.size());
      return {"mm1", std::move(rates), std::move(metric)};
    }
    config_error("unknown preset \"" + preset + '"');
  }
  const std::size_t n = count(j, "n");
  auto lambda = numbers(j, "lambda");
  auto nu = numbers(j, "nu");
  if (lambda.size() != n + 1 || nu.size() != n + 1) {
    config_error("lambda and nu need n + 1 entries");
  }
  const bool truncated = j.value("truncated", false);
  BirthDeathRates rates(std::move(lambda), std::move(nu), truncated);
  auto metric = metric_from_json(j, rates.size());
  return {j.value("name", std::string("custom")), std::move(rates), std::move(metric)};
}

ChainDefinition load_chain_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open chain file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    config_error("malformed chain file " + path.string() + ": " + e.what());
  }
  return chain_from_json(j);
}

double time_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string() && (j == "inf" || j == "stationary")) {
    return kStationaryTime;
  }
  config_error("time must be a number, \"inf\" or \"stationary\"");
}

json time_to_json(double t) {
  if (std::isinf(t)) return "inf";
  return t;
}

Variant variant_from_string(std::string_view s) {
  if (s == "standard") return Variant::Standard;
  if (s == "bennett") return Variant::Bennett;
  config_error("variant must be \"standard\" or \"bennett\"");
}

json to_json(const CurvatureCertificate& cert) {
  return {{"kind", to_string(cert.kind)},
          {"value", cert.value},
          {"valid", cert.valid},
          {"argmin", cert.argmin}};
}

json curvature_json(const CurvatureCertificate& cert, const CurvatureEstimate& est) {
  json j = to_json(cert);
  j["t_grid"] = est.t_grid;
  j["direction"] = est.direction == EstimateDirection::Exact ? "exact" : "from_above";
  json values = json::array();
  for (std::size_t i = 0; i < est.values.size(); ++i) {
    if (est.degenerate[i]) {
      values.push_back("inf");
    } else {
      values.push_back(est.values[i]);
    }
  }
  j["estimates"] = std::move(values);
  j["skipped_states"] = est.skipped_states;
  return j;
}

BoundParams bound_params_from_json(const json& p) {
  if (!p.is_object()) config_error("bound params must be an object");
  BoundParams out;
  auto& s = out.spec;
  if (p.contains("t")) s.t = time_from_json(p.at("t"));
  if (auto v = optional_number(p, "lip")) s.lip = *v;
  s.jump = optional_number(p, "b");
  s.angle_bracket = optional_number(p, "V2");
  s.K = optional_number(p, "K");
  s.rho = optional_number(p, "rho");
  s.gamma_inf = optional_number(p, "gamma_inf");
  s.boundary_rates = optional_number(p, "boundary_rates");
  if (p.contains("variant")) s.variant = variant_from_string(p.at("variant").get<std::string>());
  if (p.contains("n")) out.n = count(p, "n");
  if (auto v = optional_number(p, "T")) out.horizon = *v;
  if (auto v = optional_number(p, "lambda")) out.lambda = *v;
  if (auto v = optional_number(p, "nu")) out.nu = *v;
  return out;
}

const std::vector<std::string>& closed_form_bounds() {
  static const std::vector<std::string> names{"thm31", "cor36",  "cor37",  "cor46",
                                              "cor47", "cor49",  "cor410", "cor411",
                                              "cor412", "ehrenfest_prelimit"};
  return names;
}

double log_bound_by_name(std::string_view bound, double y, const BoundParams& p) {
  const auto& s = p.spec;
  if (bound == "thm31") return log_bound_thm31(y, s);
  if (bound == "cor36") return log_bound_cor36(y, s);
  if (bound == "cor37") return log_bound_cor37(y, s);
  if (bound == "cor46") return log_bound_cor46(y, s);
  if (bound == "cor47") return log_bound_cor47(y, s);
  if (bound == "cor49") return log_bound_cor49(y, s);
  if (bound == "cor410") return log_bound_cor410(y, s);
  if (bound == "cor412") {
    return log_bound_cor412(y, p.n, p.horizon, p.lambda, p.nu, s.lip, s.variant);
  }
  if (bound == "cor411" || bound == "ehrenfest_prelimit") {
    if (s.variant == Variant::Bennett) {
      throw Error(ErrorCode::IncompatibleBound, std::string(bound) + " has no bennett form");
    }
    if (bound == "cor411") return std::log(bound_cor411(y, s.t, p.nu, s.lip));
    return log_bound_ehrenfest_prelimit(y, static_cast<double>(p.n), s.t, p.nu, s.lip);
  }
  throw Error(ErrorCode::IncompatibleBound, "unknown bound \"" + std::string(bound) + '"');
}

std::vector<std::string> bound_flags(std::string_view bound, const BoundParams& params,
                                     bool underflow) {
  std::vector<std::string> flags;
  if (underflow) flags.emplace_back("underflow");
  if (params.spec.variant == Variant::Bennett && bound != "thm31") flags.emplace_back("extension");
  if (std::isinf(params.spec.t)) flags.emplace_back("stationary");
  return flags;
}

json evaluate_bound_request(const json& request) {
  const auto bound = require(request, "bound").get<std::string>();
  const BoundParams params = bound_params_from_json(request.value("params", json::object()));
  const auto y_grid = numbers(request, "y_grid");
  const BoundCurve curve =
      evaluate_curve([&](double y) { return log_bound_by_name(bound, y, params); }, y_grid);
  return {{"values", curve.values},
          {"variant", to_string(params.spec.variant)},
          {"flags", bound_flags(bound, params, curve.underflow)}};
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_tail_csv(std::ostream& out, const TailEstimate& est) {
  out << "y,k,n,p_hat,upper_" << format_number(est.confidence) << ",analytic_bound,pass\n";
  for (std::size_t i = 0; i < est.y.size(); ++i) {
    out << format_number(est.y[i]) << ',' << est.exceedances[i] << ',' << est.n_paths << ','
        << format_number(est.p_hat[i]) << ',' << format_number(est.upper[i]) << ',';
    if (i < est.analytic_bound.size()) out << format_number(est.analytic_bound[i]);
    out << ',';
    if (i < est.status.size()) out << to_string(est.status[i]);
    out << '\n';
  }
}

}  // namespace curvctmc
