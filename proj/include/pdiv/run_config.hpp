#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pdiv/errors.hpp"
#include "pdiv/levy_model.hpp"
#include "pdiv/monte_carlo.hpp"

namespace pdiv {

struct ConfigError : ModelError {
  using ModelError::ModelError;
};

// Flat `key = value` run description; `#` starts a comment.
struct RunConfig {
  // model
  double c = 0.0;
  double sigma = 0.0;
  double lambda = 0.0;
  std::vector<ExpPhase> mixture;
  // control
  double gamma = 0.0;
  double delta = 0.0;
  double kappa = 0.0;
  double rho = 0.0;
  // strategy used by `value` and `simulate`: optimal | pair | barrier | never
  std::string strategy = "optimal";
  std::optional<double> b_u;
  std::optional<double> b_l;
  std::optional<double> barrier;
  // evaluation points
  std::vector<double> x;
  // sweep
  std::string sweep_param;
  double sweep_from = 0.0;
  double sweep_to = 0.0;
  int sweep_steps = 0;
  std::string sweep_hold = "M";  // p1 sweeps: hold M or small_claim
  // simulation
  std::uint64_t paths = 100000;
  std::uint64_t seed = 20240601;
  double dt = 1e-3;
  double t_max = 0.0;  // 0: smallest horizon with exp(-delta t_max) <= 1e-6
  bool antithetic = false;
  unsigned threads = 1;
  // exit probe interval
  double exit_a = 0.0;
  double exit_b = 3.0;

  LevyModel model() const { return LevyModel(c, sigma, lambda, mixture); }

  SimConfig sim() const {
    SimConfig s;
    s.n_paths = paths;
    s.seed = seed;
    s.dt = dt;
    s.t_max = t_max > 0.0 ? t_max : SimConfig::horizon_for(delta);
    s.antithetic = antithetic;
    s.threads = threads;
    return s;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ConfigError(what + ": '" + text + "' is not a finite number");
  return v;
}

inline std::uint64_t parse_count(const std::string& text, const std::string& what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError(what + ": '" + text + "' is not a non-negative integer");
  return v;
}

inline std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(what + ": empty list entry");
    out.push_back(parse_real(item, what));
  }
  return out;
}

// %.17g round-trips every double.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// Applies one key; `where` prefixes error messages (e.g. "line 7").
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value,
                          const std::string& where, std::map<int, double>& p,
                          std::map<int, double>& beta) {
  using detail::parse_count;
  using detail::parse_real;
  const std::string what = where + ": key '" + key + "'";
  auto phase_index = [&](const std::string& prefix) -> int {
    const std::string digits = key.substr(prefix.size());
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos || digits[0] == '0')
      throw ConfigError(where + ": unknown key '" + key + "'");
    return std::stoi(digits);
  };
  if (key == "c") cfg.c = parse_real(value, what);
  else if (key == "sigma") cfg.sigma = parse_real(value, what);
  else if (key == "lambda") cfg.lambda = parse_real(value, what);
  else if (key == "gamma") cfg.gamma = parse_real(value, what);
  else if (key == "delta") cfg.delta = parse_real(value, what);
  else if (key == "kappa") cfg.kappa = parse_real(value, what);
  else if (key == "rho") cfg.rho = parse_real(value, what);
  else if (key == "strategy") cfg.strategy = value;
  else if (key == "b_u") cfg.b_u = parse_real(value, what);
  else if (key == "b_l") cfg.b_l = parse_real(value, what);
  else if (key == "barrier") cfg.barrier = parse_real(value, what);
  else if (key == "x") cfg.x = detail::parse_list(value, what);
  else if (key == "sweep_param") cfg.sweep_param = value;
  else if (key == "sweep_from") cfg.sweep_from = parse_real(value, what);
  else if (key == "sweep_to") cfg.sweep_to = parse_real(value, what);
  else if (key == "sweep_steps") cfg.sweep_steps = static_cast<int>(parse_count(value, what));
  else if (key == "sweep_hold") cfg.sweep_hold = value;
  else if (key == "paths") cfg.paths = parse_count(value, what);
  else if (key == "seed") cfg.seed = parse_count(value, what);
  else if (key == "dt") cfg.dt = parse_real(value, what);
  else if (key == "t_max") cfg.t_max = parse_real(value, what);
  else if (key == "antithetic") {
    if (value != "0" && value != "1") throw ConfigError(what + ": expected 0 or 1");
    cfg.antithetic = value == "1";
  } else if (key == "threads") cfg.threads = static_cast<unsigned>(parse_count(value, what));
  else if (key == "exit_a") cfg.exit_a = parse_real(value, what);
  else if (key == "exit_b") cfg.exit_b = parse_real(value, what);
  else if (key.rfind("beta", 0) == 0) beta[phase_index("beta")] = parse_real(value, what);
  else if (key.rfind("p", 0) == 0 && key != "paths") p[phase_index("p")] = parse_real(value, what);
  else throw ConfigError(where + ": unknown key '" + key + "'");
}

inline RunConfig parse_config(std::istream& in, const std::string& source = "config") {
  RunConfig cfg;
  std::map<int, double> p, beta;
  std::map<std::string, int> seen;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = source + " line " + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": missing key");
    if (value.empty()) throw ConfigError(where + ": key '" + key + "' has no value");
    if (seen.count(key))
      throw ConfigError(where + ": key '" + key + "' repeats line " + std::to_string(seen[key]));
    seen[key] = line_no;
    apply_setting(cfg, key, value, where, p, beta);
  }
  for (const char* k : {"c", "sigma", "lambda", "gamma", "delta", "kappa"})
    if (!seen.count(k)) throw ConfigError(source + ": missing key '" + std::string(k) + "'");
  if (p.empty()) throw ConfigError(source + ": missing key 'p1'");
  for (int i = 1; i <= static_cast<int>(std::max(p.size(), beta.size())); ++i) {
    if (!p.count(i)) throw ConfigError(source + ": missing key 'p" + std::to_string(i) + "'");
    if (!beta.count(i)) throw ConfigError(source + ": missing key 'beta" + std::to_string(i) + "'");
  }
  if (p.size() != beta.size()) throw ConfigError(source + ": p_i and beta_i counts differ");
  for (const auto& [i, w] : p) cfg.mixture.push_back({w, beta.at(i)});
  return cfg;
}

// Checks everything a command needs before any computation starts.
inline void validate(const RunConfig& cfg) {
  (void)cfg.model();
  if (!(cfg.gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (!(cfg.delta > 0.0)) throw ConfigError("delta must be positive");
  if (!(cfg.kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (!(cfg.rho >= 0.0 && cfg.rho < 1.0)) throw ConfigError("rho must lie in [0, 1)");
  if (cfg.strategy == "pair") {
    if (!cfg.b_u || !cfg.b_l) throw ConfigError("strategy = pair needs b_u and b_l");
    if (!(*cfg.b_l >= 0.0 && *cfg.b_u - *cfg.b_l >= cfg.kappa / (1.0 - cfg.rho)))
      throw ConfigError("strategy = pair needs b_l >= 0 and b_u - b_l >= kappa");
  } else if (cfg.strategy == "barrier") {
    if (!cfg.barrier || !(*cfg.barrier >= 0.0)) throw ConfigError("strategy = barrier needs barrier >= 0");
  } else if (cfg.strategy != "optimal" && cfg.strategy != "never") {
    throw ConfigError("strategy must be one of optimal, pair, barrier, never");
  }
  if (cfg.sweep_hold != "M" && cfg.sweep_hold != "small_claim")
    throw ConfigError("sweep_hold must be M or small_claim");
  cfg.sim().validate();
}

// Canonical text form; parse_config(dump_config(cfg)) reproduces cfg.
inline std::string dump_config(const RunConfig& cfg) {
  using detail::fmt17;
  std::ostringstream o;
  o << "c = " << fmt17(cfg.c) << "\n";
  o << "sigma = " << fmt17(cfg.sigma) << "\n";
  o << "lambda = " << fmt17(cfg.lambda) << "\n";
  for (std::size_t i = 0; i < cfg.mixture.size(); ++i) {
    o << "p" << i + 1 << " = " << fmt17(cfg.mixture[i].weight) << "\n";
    o << "beta" << i + 1 << " = " << fmt17(cfg.mixture[i].rate) << "\n";
  }
  o << "gamma = " << fmt17(cfg.gamma) << "\n";
  o << "delta = " << fmt17(cfg.delta) << "\n";
  o << "kappa = " << fmt17(cfg.kappa) << "\n";
  o << "rho = " << fmt17(cfg.rho) << "\n";
  o << "strategy = " << cfg.strategy << "\n";
  if (cfg.b_u) o << "b_u = " << fmt17(*cfg.b_u) << "\n";
  if (cfg.b_l) o << "b_l = " << fmt17(*cfg.b_l) << "\n";
  if (cfg.barrier) o << "barrier = " << fmt17(*cfg.barrier) << "\n";
  if (!cfg.x.empty()) {
    o << "x = ";
    for (std::size_t i = 0; i < cfg.x.size(); ++i) o << (i ? ", " : "") << fmt17(cfg.x[i]);
    o << "\n";
  }
  if (!cfg.sweep_param.empty()) o << "sweep_param = " << cfg.sweep_param << "\n";
  o << "sweep_from = " << fmt17(cfg.sweep_from) << "\n";
  o << "sweep_to = " << fmt17(cfg.sweep_to) << "\n";
  o << "sweep_steps = " << cfg.sweep_steps << "\n";
  o << "sweep_hold = " << cfg.sweep_hold << "\n";
  o << "paths = " << cfg.paths << "\n";
  o << "seed = " << cfg.seed << "\n";
  o << "dt = " << fmt17(cfg.dt) << "\n";
  o << "t_max = " << fmt17(cfg.t_max) << "\n";
  o << "antithetic = " << (cfg.antithetic ? 1 : 0) << "\n";
  o << "threads = " << cfg.threads << "\n";
  o << "exit_a = " << fmt17(cfg.exit_a) << "\n";
  o << "exit_b = " << fmt17(cfg.exit_b) << "\n";
  return o.str();
}

}  // namespace pdiv
