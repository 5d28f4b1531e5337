#include "curvctmc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "curvctmc/acceptance.hpp"
#include "curvctmc/curvature.hpp"
#include "curvctmc/error.hpp"
#include "curvctmc/simulate.hpp"

namespace curvctmc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kToolVersion = "0.1.0";

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::Config, what); }

template <class T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("field \"") + key + "\" has the wrong type");
  }
}

std::vector<double> parse_times(const json& j) {
  std::vector<double> out;
  if (!j.is_array()) {
    out.push_back(time_from_json(j));
  } else {
    for (const auto& e : j) out.push_back(time_from_json(e));
  }
  if (out.empty()) config_error("times must not be empty");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 0.0) || (i > 0 && !(out[i] > out[i - 1]))) {
      config_error("times must be positive and strictly increasing");
    }
  }
  return out;
}

/// The chain as explicit rates, so a snapshot does not depend on files.
json chain_snapshot(const ChainDefinition& chain) {
  const auto& bd = chain.rates;
  json j{{"name", chain.name},
         {"n", bd.max_state()},
         {"truncated", bd.truncated()},
         {"lambda", std::vector<double>(bd.lambda().begin(), bd.lambda().end())},
         {"nu", std::vector<double>(bd.nu().begin(), bd.nu().end())}};
  if (chain.metric.kind() == Metric::Kind::WeightedPath) {
    j["metric"] = {{"kind", "weighted"},
                   {"weights", std::vector<double>(chain.metric.weights().begin(),
                                                   chain.metric.weights().end())}};
  }
  return j;
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Config, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorCode::Config, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

struct CheckEntry {
  std::string name;
  CheckStatus status;
};

class RunWriter {
 public:
  RunWriter(const ExperimentConfig& cfg, std::string command)
      : cfg_(cfg), command_(std::move(command)), start_(std::chrono::steady_clock::now()) {
    dir_ = cfg.out / run_id(cfg);
    fs::create_directories(dir_);
  }

  const fs::path& dir() const { return dir_; }

  void file(const std::string& name, const std::string& content) {
    write_atomic(dir_ / name, content);
    outputs_.push_back(name);
  }

  void check(std::string name, CheckStatus status) { checks_.push_back({std::move(name), status}); }

  void finish(int exit_code) {
    json checks = json::array();
    for (const auto& c : checks_) checks.push_back({{"name", c.name}, {"status", to_string(c.status)}});
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json manifest{{"tool", "curvctmc"},
                  {"version", kToolVersion},
                  {"command", command_},
                  {"run_id", run_id(cfg_)},
                  {"seed", cfg_.seed},
                  {"config", cfg_.snapshot},
                  {"wall_clock_seconds", wall},
                  {"exit_code", exit_code},
                  {"outputs", outputs_},
                  {"checks", checks}};
    write_atomic(dir_ / "manifest.json", manifest.dump(2) + "\n");
  }

 private:
  const ExperimentConfig& cfg_;
  std::string command_;
  std::chrono::steady_clock::time_point start_;
  fs::path dir_;
  std::vector<std::string> outputs_;
  std::vector<CheckEntry> checks_;
};

const ChainDefinition& require_chain(const ExperimentConfig& cfg) {
  if (!cfg.chain) config_error("this command needs a scenario");
  return *cfg.chain;
}

StateFunction single_time_function(const ExperimentConfig& cfg, std::size_t size) {
  if (cfg.function == "identity") return StateFunction::identity(size);
  if (cfg.function == "table") {
    if (cfg.table.size() != size) config_error("function table needs one value per state");
    return StateFunction(cfg.table);
  }
  config_error("function \"" + cfg.function + "\" needs several sampling times");
}

std::string chain_label(const ChainDefinition& chain) {
  return chain.name + " N=" + std::to_string(chain.rates.max_state());
}

struct Curve {
  std::string bound;
  Variant variant;
  std::vector<double> values;
  std::vector<std::string> flags;
};

/// Bound constants derived from the scenario, then overridden by `params`.
json derived_params(const ExperimentConfig& cfg, double t) {
  json p = json::object();
  p["t"] = time_to_json(t);
  if (cfg.chain) {
    const auto& chain = *cfg.chain;
    const auto& bd = chain.rates;
    const GeneralRates rates = bd.to_general();
    const ChainParams cp = chain_params(rates, chain.metric);
    p["b"] = cp.jump_bound;
    p["V2"] = cp.angle_bracket;
    p["K"] = wasserstein_criterion(bd).value;
    if (bd.max_state() >= 2) {
      const CurvatureCertificate g = gamma_criterion(bd);
      if (g.valid) p["rho"] = g.value;
    }
    p["boundary_rates"] = bd.lambda()[0] + bd.nu()[bd.max_state()];
    const double n = static_cast<double>(bd.max_state());
    if (chain.name == "ehrenfest") {
      p["lambda"] = bd.lambda()[0] / n;
      p["nu"] = bd.nu()[bd.max_state()] / n;
      p["n"] = bd.max_state();
    } else if (chain.name == "mm1") {
      p["lambda"] = bd.lambda()[0];
      p["nu"] = bd.nu()[1];
    }
    if (cfg.function == "coordinate-average") {
      p["lip"] = 1.0 / static_cast<double>(cfg.times.size());
      p["n"] = cfg.times.size();
      p["T"] = cfg.times.back();
    } else {
      const StateFunction f = single_time_function(cfg, rates.size());
      p["lip"] = lipschitz_seminorm(f, chain.metric);
      p["gamma_inf"] = gamma(rates, f).max();
    }
  }
  for (const auto& [key, value] : cfg.params.items()) p[key] = value;
  return p;
}

std::vector<Curve> evaluate_bounds(const ExperimentConfig& cfg,
                                   const std::vector<std::string>& names, double t) {
  const json pj = derived_params(cfg, t);
  std::vector<Curve> curves;
  for (const auto& name : names) {
    if (name == "thm34") {
      const auto& chain = require_chain(cfg);
      if (std::isinf(t)) config_error("thm34 needs a finite time");
      const GeneralRates rates = chain.rates.to_general();
      const StateFunction f = single_time_function(cfg, rates.size());
      if (!pj.contains("rho")) {
        throw Error(ErrorCode::IncompatibleBound, "thm34 needs a valid Gamma curvature bound");
      }
      const PsiFunction psi(rates, f, t, pj.at("rho").get<double>(), chain.metric);
      Curve c{name, Variant::Standard, {}, {}};
      bool underflow = false;
      for (double y : cfg.y_grid) {
        const Thm34Result r = optimize_thm34(y, psi);
        underflow = underflow || underflows(r.log_value);
        c.values.push_back(r.value);
      }
      if (underflow) c.flags.emplace_back("underflow");
      curves.push_back(std::move(c));
      continue;
    }
    for (Variant v : cfg.variants) {
      json with_variant = pj;
      with_variant["variant"] = to_string(v);
      const BoundParams params = bound_params_from_json(with_variant);
      const BoundCurve curve = evaluate_curve(
          [&](double y) { return log_bound_by_name(name, y, params); }, cfg.y_grid);
      curves.push_back({name, v, curve.values, bound_flags(name, params, curve.underflow)});
    }
  }
  return curves;
}

std::string bounds_csv(const std::vector<Curve>& curves, const std::vector<double>& ys) {
  std::ostringstream out;
  out << "bound,variant,y,value,flags\n";
  for (const auto& c : curves) {
    std::string flags;
    for (const auto& f : c.flags) flags += (flags.empty() ? "" : "|") + f;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      out << c.bound << ',' << to_string(c.variant) << ',' << format_number(ys[i]) << ','
          << format_number(c.values[i]) << ',' << flags << '\n';
    }
  }
  return out.str();
}

/// Index of the smallest curve value at each y.
std::vector<std::size_t> tightest(const std::vector<Curve>& curves, std::size_t n) {
  std::vector<std::size_t> best(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 1; c < curves.size(); ++c) {
      if (curves[c].values[i] < curves[best[i]].values[i]) best[i] = c;
    }
  }
  return best;
}

std::string curve_name(const Curve& c) {
  return c.bound + "/" + to_string(c.variant);
}

MonteCarloConfig monte_carlo(const ExperimentConfig& cfg) {
  MonteCarloConfig mc;
  mc.n_paths = cfg.n_paths;
  mc.seed = cfg.seed;
  mc.confidence = cfg.confidence;
  mc.workers = cfg.workers;
  mc.uniformization.workers = cfg.workers;
  return mc;
}

}  // namespace

ExperimentConfig parse_config(const json& raw, const fs::path& base_dir,
                              const CliOverrides& overrides) {
  // A run manifest can stand in for its config.
  const json& j = raw.is_object() && raw.contains("run_id") && raw.contains("config")
                      ? raw.at("config")
                      : raw;
  if (!j.is_object()) config_error("config must be a JSON object");
  ExperimentConfig cfg;
  json snapshot = j;

  if (j.contains("scenario")) {
    const auto scenario = get_field<std::string>(j, "scenario");
    json chain = j.value("chain", json::object());
    if (scenario == "ehrenfest" || scenario == "mm1") {
      chain["preset"] = scenario;
      cfg.chain = chain_from_json(chain);
    } else if (scenario == "custom") {
      if (j.contains("chain_file")) {
        fs::path file = get_field<std::string>(j, "chain_file");
        if (file.is_relative()) file = base_dir / file;
        if (!fs::exists(file)) config_error("chain file " + file.string() + " does not exist");
        cfg.chain = load_chain_file(file);
      } else if (j.contains("chain")) {
        cfg.chain = chain_from_json(chain);
      } else {
        config_error("custom scenario needs \"chain\" or \"chain_file\"");
      }
      snapshot.erase("chain_file");
      snapshot["chain"] = chain_snapshot(*cfg.chain);
    } else {
      config_error("scenario must be ehrenfest, mm1 or custom");
    }
  }

  if (j.contains("function")) {
    const json& f = j.at("function");
    if (f.is_string()) {
      cfg.function = f.get<std::string>();
      if (cfg.function != "identity" && cfg.function != "coordinate-average") {
        config_error("function must be identity, coordinate-average or {\"table\": [...]}");
      }
    } else if (f.is_object() && f.contains("table")) {
      cfg.function = "table";
      cfg.table = get_field<std::vector<double>>(f, "table");
    } else {
      config_error("function must be identity, coordinate-average or {\"table\": [...]}");
    }
  }
  if (j.contains("x0")) cfg.x0 = get_field<std::size_t>(j, "x0");
  if (j.contains("times")) {
    cfg.times = parse_times(j.at("times"));
  } else if (j.contains("t")) {
    cfg.times = parse_times(j.at("t"));
  }
  if (j.contains("t_grid")) cfg.t_grid = get_field<std::vector<double>>(j, "t_grid");
  if (j.contains("y_grid")) {
    cfg.y_grid = get_field<std::vector<double>>(j, "y_grid");
    try {
      validate_y_grid(cfg.y_grid);
    } catch (const Error& e) {
      config_error(std::string("y_grid: ") + e.what());
    }
  }
  if (j.contains("n_paths")) cfg.n_paths = get_field<std::uint64_t>(j, "n_paths");
  if (j.contains("seed")) cfg.seed = get_field<std::uint64_t>(j, "seed");
  if (j.contains("confidence")) cfg.confidence = get_field<double>(j, "confidence");
  if (!(cfg.confidence > 0.5 && cfg.confidence < 1.0)) config_error("confidence must lie in (0.5, 1)");
  if (j.contains("bounds")) {
    const json& b = j.at("bounds");
    cfg.bounds = b.is_string() ? std::vector<std::string>{b.get<std::string>()}
                               : get_field<std::vector<std::string>>(j, "bounds");
    for (const auto& name : cfg.bounds) {
      const auto& known = closed_form_bounds();
      if (name != "thm34" && std::find(known.begin(), known.end(), name) == known.end()) {
        config_error("unknown bound \"" + name + '"');
      }
    }
  }
  if (j.contains("variant")) {
    const auto v = get_field<std::string>(j, "variant");
    if (v == "both") {
      cfg.variants = {Variant::Standard, Variant::Bennett};
    } else {
      cfg.variants = {variant_from_string(v)};
    }
  }
  if (j.contains("params")) {
    cfg.params = j.at("params");
    if (!cfg.params.is_object()) config_error("params must be an object");
  }
  if (j.contains("slack")) cfg.slack = get_field<double>(j, "slack");
  if (j.contains("bound_scale")) cfg.bound_scale = get_field<double>(j, "bound_scale");
  if (!(cfg.bound_scale > 0.0)) config_error("bound_scale must be positive");
  if (j.contains("workers")) cfg.workers = get_field<unsigned>(j, "workers");
  if (j.contains("criteria")) cfg.criteria = get_field<std::vector<int>>(j, "criteria");
  for (int id : cfg.criteria) {
    if (id < 1 || id > kCriterionCount) config_error("criteria must lie in 1..12");
  }
  if (j.contains("enforce_time_limits")) {
    cfg.enforce_time_limits = get_field<bool>(j, "enforce_time_limits");
  }
  if (j.contains("out")) cfg.out = get_field<std::string>(j, "out");

  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.paths) cfg.n_paths = *overrides.paths;
  if (overrides.out) cfg.out = *overrides.out;
  if (cfg.n_paths < 1) config_error("n_paths must be at least 1");
  if (cfg.chain && cfg.x0 > cfg.chain->rates.max_state()) config_error("x0 lies outside the chain");

  snapshot["seed"] = cfg.seed;
  snapshot["n_paths"] = cfg.n_paths;
  snapshot.erase("out");
  cfg.snapshot = std::move(snapshot);
  return cfg;
}

ExperimentConfig load_config(const fs::path& path, const CliOverrides& overrides) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    config_error("malformed config " + path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path(), overrides);
}

std::string run_id(const ExperimentConfig& cfg) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&](unsigned char c) {
    h ^= c;
    h *= 1099511628211ull;
  };
  for (char c : cfg.snapshot.dump()) mix(static_cast<unsigned char>(c));
  for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(cfg.seed >> (8 * i)));
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

int cmd_curvature(const ExperimentConfig& cfg, std::ostream& log) {
  const auto& chain = require_chain(cfg);
  const GeneralRates rates = chain.rates.to_general();
  RunWriter writer(cfg, "curvature");

  const CurvatureCertificate w = wasserstein_criterion(chain.rates);
  const CurvatureEstimate w_est =
      wasserstein_curvature_estimate(rates, chain.metric, cfg.t_grid, monte_carlo(cfg).uniformization);
  const CurvatureCertificate g = gamma_criterion(chain.rates);
  const CurvatureEstimate g_est = gamma_curvature_estimate(
      rates, cfg.t_grid, default_test_family(rates.size()), monte_carlo(cfg).uniformization);

  auto sandwich = [&](const CurvatureCertificate& cert, const CurvatureEstimate& est) {
    if (!cert.valid) return CheckStatus::Untested;
    for (std::size_t i = 0; i < est.values.size(); ++i) {
      if (!est.degenerate[i] && cert.value > est.values[i] + 1e-9) return CheckStatus::Fail;
    }
    return CheckStatus::Pass;
  };
  const CheckStatus w_status = sandwich(w, w_est);
  const CheckStatus g_status = sandwich(g, g_est);

  json out{{"chain", chain_label(chain)},
           {"wasserstein", curvature_json(w, w_est)},
           {"gamma", curvature_json(g, g_est)},
           {"sandwich", {{"wasserstein", to_string(w_status)}, {"gamma", to_string(g_status)}}}};
  writer.file("curvature.json", out.dump(2) + "\n");
  writer.check("wasserstein sandwich", w_status);
  writer.check("gamma sandwich", g_status);

  log << "chain " << chain_label(chain) << '\n'
      << "  K   = " << format_number(w.value) << " (argmin x=" << w.argmin << ")\n"
      << "  rho = " << format_number(g.value) << (g.valid ? "" : " (invalid)")
      << " (argmin x=" << g.argmin << ")\n";
  for (std::size_t i = 0; i < cfg.t_grid.size(); ++i) {
    log << "  t=" << format_number(cfg.t_grid[i])
        << "  K_t=" << (w_est.degenerate[i] ? "inf" : format_number(w_est.values[i]))
        << "  rho_t<=" << (g_est.degenerate[i] ? "inf" : format_number(g_est.values[i])) << '\n';
  }
  log << "sandwich: wasserstein " << to_string(w_status) << ", gamma " << to_string(g_status)
      << '\n';
  const int code = (w_status == CheckStatus::Fail || g_status == CheckStatus::Fail)
                       ? kExitViolation
                       : kExitPass;
  writer.finish(code);
  log << "results in " << writer.dir().string() << '\n';
  return code;
}

int cmd_bound(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.y_grid.empty()) config_error("bound needs a y_grid");
  if (cfg.times.size() != 1) config_error("bound takes a single time");
  const std::vector<std::string> names =
      cfg.bounds.empty() ? std::vector<std::string>{"thm31"} : cfg.bounds;
  const std::vector<Curve> curves = evaluate_bounds(cfg, names, cfg.times.front());
  RunWriter writer(cfg, "bound");
  writer.file("bounds.csv", bounds_csv(curves, cfg.y_grid));
  for (const auto& c : curves) {
    log << curve_name(c);
    for (const auto& f : c.flags) log << " [" << f << ']';
    log << '\n';
  }
  const auto best = tightest(curves, cfg.y_grid.size());
  for (std::size_t i = 0; i < cfg.y_grid.size(); ++i) {
    log << "  y=" << format_number(cfg.y_grid[i]) << "  tightest " << curve_name(curves[best[i]])
        << " = " << format_number(curves[best[i]].values[i]) << '\n';
  }
  writer.finish(kExitPass);
  log << "results in " << writer.dir().string() << '\n';
  return kExitPass;
}

int cmd_tail(const ExperimentConfig& cfg, std::ostream& log) {
  const auto& chain = require_chain(cfg);
  if (cfg.y_grid.empty()) config_error("tail needs a y_grid");
  const MonteCarloConfig mc = monte_carlo(cfg);
  TailEstimate est;
  std::vector<std::string> names = cfg.bounds;
  const double t = cfg.times.back();
  if (std::isinf(t)) config_error("tail needs finite sampling times");
  if (cfg.function == "coordinate-average") {
    if (chain.name != "mm1") config_error("coordinate-average tails need the mm1 scenario");
    if (names.empty()) names = {"cor412"};
    const auto& bd = chain.rates;
    est = mm1_multisample_tail(bd.lambda()[0], bd.nu()[1], bd.max_state(), cfg.x0, cfg.times,
                               MultiLipschitzFn::coordinate_average(cfg.times.size()),
                               cfg.y_grid, mc);
  } else {
    if (cfg.times.size() != 1) config_error("single-state functions take a single time");
    if (names.empty()) names = {"thm31"};
    const GeneralRates rates = chain.rates.to_general();
    est = monte_carlo_tail(rates, cfg.x0, single_time_function(cfg, rates.size()), t, cfg.y_grid,
                           mc);
  }
  const std::vector<Curve> curves = evaluate_bounds(cfg, names, t);
  const auto best = tightest(curves, cfg.y_grid.size());
  std::vector<double> bound(cfg.y_grid.size());
  for (std::size_t i = 0; i < bound.size(); ++i) {
    bound[i] = cfg.bound_scale * curves[best[i]].values[i];
  }
  compare_with_bound(est, bound, cfg.slack);

  RunWriter writer(cfg, "tail");
  std::ostringstream tails;
  write_tail_csv(tails, est);
  writer.file("tails.csv", tails.str());
  writer.file("bounds.csv", bounds_csv(curves, cfg.y_grid));

  int code = kExitPass;
  log << "chain " << chain_label(chain) << ", x0=" << cfg.x0 << ", mean "
      << format_number(est.mean) << ", " << est.n_paths << " paths\n";
  for (std::size_t i = 0; i < est.y.size(); ++i) {
    const std::string name = curve_name(curves[best[i]]);
    writer.check("y=" + format_number(est.y[i]) + " " + name, est.status[i]);
    log << "  y=" << format_number(est.y[i]) << "  p_hat=" << format_number(est.p_hat[i])
        << "  upper=" << format_number(est.upper[i]) << "  bound=" << format_number(bound[i])
        << " (" << name << ")  " << to_string(est.status[i]) << '\n';
    if (est.status[i] == CheckStatus::Fail) {
      code = kExitViolation;
      log << "violation: (" << chain_label(chain) << ", y=" << format_number(est.y[i]) << ", "
          << name << ")\n";
    }
  }
  writer.finish(code);
  log << "results in " << writer.dir().string() << '\n';
  return code;
}

int cmd_verify(const ExperimentConfig& cfg, std::ostream& log) {
  AcceptanceConfig acc;
  acc.n_paths = cfg.n_paths;
  acc.seed = cfg.seed;
  acc.confidence = cfg.confidence;
  acc.bound_scale = cfg.bound_scale;
  acc.workers = cfg.workers;
  acc.criteria = cfg.criteria;
  acc.enforce_time_limits = cfg.enforce_time_limits;

  RunWriter writer(cfg, "verify");
  int code = kExitPass;
  std::ostringstream tails;
  bool tail_header = false;
  run_acceptance(acc, [&](const CriterionReport& r) {
    log << summary_line(r) << '\n';
    for (const auto& v : r.violations) log << "    violation: " << v << '\n';
    log.flush();
    writer.check("criterion " + std::to_string(r.id) + " " + r.title, r.status);
    if (r.status == CheckStatus::Fail) code = kExitViolation;
    for (const auto& [label, est] : r.tails) {
      std::ostringstream one;
      write_tail_csv(one, est);
      std::istringstream lines(one.str());
      std::string line;
      std::getline(lines, line);
      if (!tail_header) {
        tails << "check," << line << '\n';
        tail_header = true;
      }
      while (std::getline(lines, line)) tails << label << ',' << line << '\n';
    }
  });
  if (tail_header) writer.file("tails.csv", tails.str());
  writer.finish(code);
  log << (code == kExitPass ? "verify: pass" : "verify: FAIL") << '\n'
      << "results in " << writer.dir().string() << '\n';
  return code;
}

int run_command(const std::string& command, const fs::path& config, const CliOverrides& overrides,
                std::ostream& log, std::ostream& err) {
  try {
    const ExperimentConfig cfg = load_config(config, overrides);
    if (command == "curvature") return cmd_curvature(cfg, log);
    if (command == "bound") return cmd_bound(cfg, log);
    if (command == "tail") return cmd_tail(cfg, log);
    if (command == "verify") return cmd_verify(cfg, log);
    err << "error: unknown command " << command << '\n';
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
  } catch (const json::exception& e) {
    err << "error: configuration error: " << e.what() << '\n';
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitConfig;
}

}  // namespace curvctmc
