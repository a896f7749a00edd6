#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pdiv/barrier_solver.hpp"
#include "pdiv/errors.hpp"
#include "pdiv/levy_model.hpp"
#include "pdiv/monte_carlo.hpp"
#include "pdiv/run_config.hpp"
#include "pdiv/scale_functions.hpp"
#include "pdiv/strategy_value.hpp"

namespace pdiv {

namespace detail {

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(std::initializer_list<const char*> cols) {
    bool first = true;
    for (const char* c : cols) {
      out_ << (first ? "" : ",") << c;
      first = false;
    }
    out_ << "\n";
  }

  CsvWriter& operator<<(double v) { return field(fmt17(v)); }
  CsvWriter& operator<<(const std::string& s) { return field(s); }
  CsvWriter& operator<<(const char* s) { return field(s); }
  void end() {
    out_ << "\n";
    first_ = true;
  }

 private:
  CsvWriter& field(const std::string& s) {
    out_ << (first_ ? "" : ",") << s;
    first_ = false;
    return *this;
  }
  std::ostream& out_;
  bool first_ = true;
};

inline std::string csv_safe(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ch == ',' ? ';' : ' ';
  return s;
}

inline double z_score(double mc, double se, double analytic) {
  const double diff = mc - analytic;
  if (se > 0.0) return diff / se;
  if (std::abs(diff) <= 1e-12 * (1.0 + std::abs(analytic))) return 0.0;
  return diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

// Strategy named in the config, resolved against a solved or explicit pair.
struct ResolvedStrategy {
  PiecewiseValue value;        // analytic value, before the (1 - rho) scale
  PeriodicStrategy simulated;  // what the simulator plays
  bool never = false;
};

inline ResolvedStrategy resolve_strategy(const RunConfig& cfg, const ScaleBundle& s) {
  const auto red = reduce_proportional_cost(cfg.kappa, cfg.rho);
  ResolvedStrategy r;
  if (cfg.strategy == "never") {
    r.never = true;
    r.simulated = PeriodicStrategy::never_pay();
    return r;
  }
  if (cfg.strategy == "barrier") {
    r.value = value_barrier_no_cost(s, *cfg.barrier);
    r.simulated = PeriodicStrategy::barrier(*cfg.barrier);
    return r;
  }
  BarrierPair pair{};
  if (cfg.strategy == "pair") {
    pair = {*cfg.b_u, *cfg.b_l, red.kappa_eff};
  } else {
    pair = solve_optimal(s, red.kappa_eff).pair();
  }
  r.value = value_bubl(s, pair);
  r.simulated = PeriodicStrategy::pair(pair.b_u, pair.b_l, pair.kappa);
  return r;
}

inline double analytic_value(const ResolvedStrategy& r, double x) { return r.never ? 0.0 : r.value(x); }

}  // namespace detail

inline void cmd_solve(const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  const auto red = reduce_proportional_cost(cfg.kappa, cfg.rho);
  const auto s = build_scale_set(cfg.model(), cfg.gamma, cfg.delta);
  const auto sol = solve_optimal(s, red.kappa_eff);
  detail::CsvWriter w(out);
  w.header({"b_bar", "b_star", "b_u_star", "b_l_star", "kappa", "liquidation_flag", "b_bar_residual",
            "b_star_residual", "gamma_residual", "g_residual", "G_at_zero"});
  const auto& d = sol.diagnostics;
  w << sol.b_bar << sol.b_star << sol.b_u_star << sol.b_l_star << sol.kappa
    << (sol.liquidation_flag ? "1" : "0") << d.b_bar_residual << d.b_star_residual << d.gamma_residual
    << d.g_residual << d.G_at_zero;
  w.end();
}

inline void cmd_value(const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  if (cfg.x.empty()) throw ConfigError("value needs x points (key 'x' or --x)");
  const double scale = reduce_proportional_cost(cfg.kappa, cfg.rho).value_scale;
  const auto s = build_scale_set(cfg.model(), cfg.gamma, cfg.delta);
  const auto r = detail::resolve_strategy(cfg, s);
  detail::CsvWriter w(out);
  w.header({"x", "V", "dV", "d2V"});
  for (double x : cfg.x) {
    double v = 0.0, d1 = 0.0, d2 = 0.0;
    if (!r.never && x >= 0.0) {
      v = r.value(x);
      d1 = r.value.derivative(x, 1);
      d2 = r.value.derivative(x, 2);
    }
    w << x << scale * v << scale * d1 << scale * d2;
    w.end();
  }
}

// Model after setting one sweep parameter. The dependent parameters are
// recomputed so that the mean claim (hence mu) is unchanged, and M or the
// small-claim mean is held where the sweep calls for it.
inline RunConfig sweep_point(const RunConfig& base, const std::string& param, double v) {
  RunConfig cfg = base;
  auto need_two_phases = [&] {
    if (cfg.mixture.size() != 2) throw ConfigError("sweep over " + param + " needs exactly two phases");
  };
  if (param == "kappa") {
    cfg.kappa = v;
  } else if (param == "gamma") {
    cfg.gamma = v;
  } else if (param == "sigma") {
    cfg.sigma = v;
  } else if (param == "c") {
    cfg.c = v;
  } else if (param == "p1" || param == "M") {
    need_two_phases();
    auto& ph = cfg.mixture;
    const double mean = ph[0].weight / ph[0].rate + ph[1].weight / ph[1].rate;
    if (param == "p1" && cfg.sweep_hold == "small_claim") {
      const double b1 = ph[0].rate;
      const double rest = mean - v / b1;
      if (!(v > 0.0 && v < 1.0) || !(rest > 0.0))
        throw ModelError("p1 = " + detail::fmt17(v) + " leaves no room for the large claim");
      ph = {{v, b1}, {1.0 - v, (1.0 - v) / rest}};
    } else {
      const double p1 = param == "p1" ? v : ph[0].weight;
      const double M = param == "M" ? v : ph[0].rate / ph[1].rate;
      if (!(p1 > 0.0 && p1 < 1.0)) throw ModelError("p1 must lie in (0, 1)");
      if (!(M > 0.0)) throw ModelError("M must be positive");
      const double b1 = (p1 + (1.0 - p1) * M) / mean;
      ph = {{p1, b1}, {1.0 - p1, b1 / M}};
    }
  } else {
    throw ConfigError("unknown sweep parameter '" + param + "' (kappa, gamma, sigma, p1, M, c)");
  }
  return cfg;
}

inline std::vector<double> sweep_grid(double from, double to, int steps) {
  if (steps < 1) throw ConfigError("sweep needs steps >= 1");
  if (!std::isfinite(from) || !std::isfinite(to)) throw ConfigError("sweep range must be finite");
  std::vector<double> g;
  for (int i = 0; i < steps; ++i) g.push_back(steps == 1 ? from : from + (to - from) * i / (steps - 1));
  return g;
}

inline void cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  if (cfg.sweep_param.empty()) throw ConfigError("sweep needs a parameter (key 'sweep_param' or --param)");
  const auto grid = sweep_grid(cfg.sweep_from, cfg.sweep_to, cfg.sweep_steps);
  (void)sweep_point(cfg, cfg.sweep_param, grid.front());  // rejects unknown parameters up front
  detail::CsvWriter w(out);
  w.header({"param", "b_l_star", "b_star", "b_u_star", "mu", "varsigma2", "liquidation_flag", "error"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double v : grid) {
    double bl = nan, bs = nan, bu = nan, mu = nan, vs2 = nan;
    std::string flag = "", err = "";
    try {
      const RunConfig pt = sweep_point(cfg, cfg.sweep_param, v);
      validate(pt);
      const auto m = pt.model();
      const auto mom = moments(m);
      mu = mom.mu;
      vs2 = mom.varsigma2;
      const auto s = build_scale_set(m, pt.gamma, pt.delta);
      const auto sol = solve_optimal(s, reduce_proportional_cost(pt.kappa, pt.rho).kappa_eff);
      bl = sol.b_l_star;
      bs = sol.b_star;
      bu = sol.b_u_star;
      flag = sol.liquidation_flag ? "1" : "0";
    } catch (const std::exception& e) {
      err = detail::csv_safe(e.what());
    }
    w << v << bl << bs << bu << mu << vs2 << flag << err;
    w.end();
  }
}

inline void cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  const double scale = reduce_proportional_cost(cfg.kappa, cfg.rho).value_scale;
  const auto m = cfg.model();
  const auto s = build_scale_set(m, cfg.gamma, cfg.delta);
  const auto r = detail::resolve_strategy(cfg, s);
  std::vector<double> xs = cfg.x;
  if (xs.empty()) {
    if (r.never || cfg.strategy == "barrier") throw ConfigError("simulate needs x points for this strategy");
    xs = {0.0, 1.0, r.simulated.b_l, r.simulated.b_u, r.simulated.b_u + 2.0};
  }
  const auto sim = cfg.sim();
  detail::CsvWriter w(out);
  w.header({"x", "analytic_V", "mc_mean", "mc_stderr", "z_score"});
  for (double x : xs) {
    const double an = scale * detail::analytic_value(r, x);
    double mean = 0.0, se = 0.0;
    if (x >= 0.0) {
      const auto est = simulate_value(m, cfg.gamma, cfg.delta, r.simulated, x, sim);
      mean = scale * est.mean;
      se = scale * est.stderr_;
    }
    w << x << an << mean << se << detail::z_score(mean, se, an);
    w.end();
  }
}

inline void cmd_exit_probe(const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  const auto m = cfg.model();
  const auto sd = make_scale_set(m, cfg.delta);
  const double a = cfg.exit_a, b = cfg.exit_b;
  if (!(a < b)) throw ConfigError("exit probe needs exit_a < exit_b");
  std::vector<double> xs = cfg.x.empty() ? std::vector<double>{0.5 * (a + b)} : cfg.x;
  const auto sim = cfg.sim();
  detail::CsvWriter w(out);
  w.header({"x", "analytic", "mc_mean", "mc_stderr", "z_score"});
  for (double x : xs) {
    if (!(x >= a && x <= b)) throw ConfigError("exit probe x must lie in [exit_a, exit_b]");
    const double an = two_sided_exit_up(sd, x, a, b);
    const auto est = simulate_exit(m, cfg.delta, x, a, b, sim);
    w << x << an << est.mean << est.stderr_ << detail::z_score(est.mean, est.stderr_, an);
    w.end();
  }
}

}  // namespace pdiv
