// Acceptance suite: one PASS/FAIL line per criterion, exit code 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "pdiv/barrier_solver.hpp"
#include "pdiv/commands.hpp"
#include "pdiv/monte_carlo.hpp"
#include "oracles.hpp"

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

const pdiv::ScaleBundle& base() {
  static const auto s = pdiv::build_scale_set(pdiv::base_model(), 1.0, 0.2);
  return s;
}

Outcome laplace_identity() {
  Outcome o;
  const auto m = pdiv::base_model();
  double worst = 0.0;
  for (const auto* s : {&base().s_delta, &base().s_gd}) {
    for (double off : {0.5, 1.0, 5.0}) {
      const double th = s->phi + off;
      const double got = oracle::integrate_to_inf([&](double x) { return std::exp(-th * x) * s->W(x); });
      worst = std::max(worst, oracle::rel_err(got, 1.0 / (pdiv::laplace_exponent(m, th) - s->q)));
    }
  }
  o.require(worst <= 1e-6, "rel err " + num(worst));
  o.detail = o.ok ? "max rel err " + num(worst) : o.detail;
  return o;
}

Outcome net_drift() {
  Outcome o;
  const double mu = pdiv::moments(pdiv::base_model()).mu;
  o.require(std::abs(mu - 1.0) <= 1e-12, "mu = " + num(mu));
  if (o.ok) o.detail = "mu - 1 = " + num(mu - 1.0);
  return o;
}

Outcome smoothness_root() {
  Outcome o;
  const double kappa = 0.2;
  const double bs = pdiv::find_b_star(base());
  double worst_res = 0.0;
  for (double b_l : {0.0, bs / 4, bs / 2, 3 * bs / 4, bs}) {
    auto gam = [&](double g) { return pdiv::gamma_condition(base(), b_l, g, kappa); };
    o.require(gam(kappa) < 0.0, "Gamma(kappa) >= 0 at b_l=" + num(b_l));
    int changes = 0;
    double prev = gam(kappa);
    const int n = static_cast<int>(std::round((50.0 - kappa) / 1e-3));
    for (int i = 1; i <= n; ++i) {
      const double cur = gam(kappa + i * 1e-3);
      if ((cur < 0) != (prev < 0)) ++changes;
      prev = cur;
    }
    o.require(changes == 1, std::to_string(changes) + " sign changes at b_l=" + num(b_l));
    const auto up = pdiv::solve_bu_given_bl(base(), b_l, kappa);
    worst_res = std::max(worst_res, up.residual);
  }
  o.require(worst_res <= 1e-11, "residual " + num(worst_res));
  if (o.ok) o.detail = "one sign change at each b_l, max scaled residual " + num(worst_res);
  return o;
}

Outcome optimal_structure() {
  Outcome o;
  const auto sol = pdiv::solve_optimal(base(), 0.2);
  const auto v = pdiv::value_bubl(base(), sol.pair());
  if (sol.b_l_star > 0.0) {
    o.require(sol.b_l_star < sol.b_star && sol.b_star < sol.b_u_star, "ordering");
    o.require(std::abs(v.derivative(sol.b_l_star, 1) - 1.0) <= 1e-8, "V'(b_l*) = " + num(v.derivative(sol.b_l_star, 1)));
  }
  o.require(v.derivative(sol.b_u_star, 1) < 1.0, "V'(b_u*) >= 1");
  const double gap = std::abs(v(sol.b_u_star) - v(sol.b_l_star) - (sol.b_u_star - sol.b_l_star - sol.kappa));
  o.require(gap <= 1e-9, "smoothness gap " + num(gap));
  int bad = 0;
  const int n = static_cast<int>((sol.b_u_star + 20.0) / 1e-3);
  for (int i = 0; i <= n; ++i) {
    const double x = i * 1e-3;
    const double d = v.derivative(x, 1);
    if (sol.b_l_star == 0.0) {
      bad += d > 1.0;
    } else if (std::abs(x - sol.b_l_star) >= 1e-3) {
      bad += (x < sol.b_l_star) ? !(d > 1.0) : !(d < 1.0);
    }
  }
  o.require(bad == 0, std::to_string(bad) + " grid points outside the derivative regime");
  if (o.ok)
    o.detail = "b_l*=" + num(sol.b_l_star) + " b*=" + num(sol.b_star) + " b_u*=" + num(sol.b_u_star) +
               " gap err " + num(gap);
  return o;
}

Outcome perturbation() {
  Outcome o;
  const auto sol = pdiv::solve_optimal(base(), 0.2);
  const auto best = pdiv::value_bubl(base(), sol.pair());
  const double xs[] = {0.0, 1.0, sol.b_l_star, sol.b_u_star, sol.b_u_star + 2.0};
  int tested = 0;
  double worst = -INFINITY;
  for (const auto& p : fixture::perturbed_pairs(sol.b_u_star, sol.b_l_star)) {
    const pdiv::BarrierPair pair{p.b_u, p.b_l, sol.kappa};
    if (!pair.admissible()) continue;
    ++tested;
    const auto v = pdiv::value_bubl(base(), pair);
    for (double x : xs) worst = std::max(worst, v(x) - best(x));
  }
  o.require(tested == 200, std::to_string(tested) + " admissible pairs");
  o.require(worst <= 1e-9, "a perturbed pair beats the optimum by " + num(worst));
  if (o.ok) o.detail = "200 pairs, max V(pert) - V(opt) = " + num(worst);
  return o;
}

Outcome hjb() {
  Outcome o;
  const auto sol = pdiv::solve_optimal(base(), 0.2);
  std::vector<double> grid;
  for (int i = 0; i < 400; ++i) grid.push_back((sol.b_u_star + 10.0) * i / 399.0);
  const auto rep = pdiv::verify_hjb(base(), sol, grid);
  o.require(rep.all_converged, "quadrature did not converge");
  o.require(rep.max_violation <= 1e-6, "max violation " + num(rep.max_violation));
  o.require(rep.max_abs_below_bu <= 1e-6, "|HJB| on [0, b_u*] " + num(rep.max_abs_below_bu));
  if (o.ok) o.detail = "max " + num(rep.max_violation) + ", max |.| on [0,b_u*] " + num(rep.max_abs_below_bu);
  return o;
}

Outcome monte_carlo() {
  Outcome o;
  const auto sol = pdiv::solve_optimal(base(), 0.2);
  const auto v = pdiv::value_bubl(base(), sol.pair());
  pdiv::SimConfig cfg;
  cfg.n_paths = 200000;
  cfg.dt = 1e-3;
  cfg.t_max = pdiv::SimConfig::horizon_for(0.2);
  const auto st = pdiv::PeriodicStrategy::pair(sol.b_u_star, sol.b_l_star, sol.kappa);
  std::string zs;
  for (double x : {0.0, 1.0, sol.b_l_star, sol.b_u_star, sol.b_u_star + 2.0}) {
    const auto e = pdiv::simulate_value(pdiv::base_model(), 1.0, 0.2, st, x, cfg);
    const double z = pdiv::detail::z_score(e.mean, e.stderr_, v(x));
    zs += (zs.empty() ? "" : " ") + num(z);
    o.require(std::abs(e.mean - v(x)) <= 3.0 * e.stderr_ + e.truncation_bound,
              "x=" + num(x) + " mc " + num(e.mean) + " vs " + num(v(x)));
  }
  cfg.n_paths = 100000;
  const auto ex = pdiv::simulate_exit(pdiv::base_model(), 0.2, 1.0, 0.0, 3.0, cfg);
  const double want = pdiv::two_sided_exit_up(base().s_delta, 1.0, 0.0, 3.0);
  o.require(std::abs(ex.mean - want) <= 3.0 * ex.stderr_ + ex.truncation_bound,
            "exit mc " + num(ex.mean) + " vs " + num(want));
  if (o.ok) o.detail = "z = " + zs + ", exit z = " + num(pdiv::detail::z_score(ex.mean, ex.stderr_, want));
  return o;
}

Outcome kappa_limit() {
  Outcome o;
  const double kappas[] = {0.2, 0.1, 0.05, 0.02, 0.01, 0.005};
  std::vector<double> gaps;
  for (double k : kappas) {
    const auto sol = pdiv::solve_optimal(base(), k);
    gaps.push_back(sol.b_u_star - sol.b_l_star);
  }
  for (std::size_t i = 1; i < gaps.size(); ++i)
    o.require(gaps[i] < gaps[i - 1], "gap not decreasing at kappa=" + num(kappas[i]));
  o.require(gaps.back() < 0.1 * gaps.front(),
            "gap(0.005) = " + num(gaps.back()) + " vs 0.1 gap(0.2) = " + num(0.1 * gaps.front()));
  const auto small = pdiv::value_bubl(base(), pdiv::solve_optimal(base(), 0.005).pair());
  const auto v0 = pdiv::value_barrier_no_cost(base(), pdiv::find_b_star(base()));
  double worst = 0.0;
  for (double x : {0.0, 1.0, 5.0}) worst = std::max(worst, std::abs(small(x) - v0(x)) / (1.0 + v0(x)));
  o.require(worst <= 0.02, "value gap " + num(worst));
  if (o.ok) o.detail = "gap ratio " + num(gaps.back() / gaps.front()) + ", value gap " + num(worst);
  else o.detail += " (value gap " + num(worst) + ")";
  return o;
}

Outcome figures() {
  Outcome o;
  const auto m = pdiv::base_model();
  // kappa sweep: gap increasing
  double prev = -1.0;
  for (double k : pdiv::sweep_grid(0.01, 2.0, 20)) {
    const auto sol = pdiv::solve_optimal(base(), k);
    const double gap = sol.b_u_star - sol.b_l_star;
    o.require(gap > prev, "kappa sweep gap not increasing at " + num(k));
    prev = gap;
  }
  // gamma sweep: barriers nondecreasing
  double bu = -1.0, bl = -1.0;
  for (double g : pdiv::sweep_grid(0.5, 8.0, 16)) {
    const auto sol = pdiv::solve_optimal(pdiv::build_scale_set(m, g, 0.2), 0.2);
    o.require(sol.b_u_star >= bu && sol.b_l_star >= bl, "gamma sweep decreases at " + num(g));
    bu = sol.b_u_star;
    bl = sol.b_l_star;
  }
  // sigma sweep: rise, then fall into the liquidation regime
  std::vector<double> sig = pdiv::sweep_grid(0.0, 40.0, 41), ups, lows;
  bool liquidates = false;
  for (double s : sig) {
    const pdiv::LevyModel ms(11.0, s, 10.0, {{0.9, 1.9}, {0.1, 0.19}});
    const auto sol = pdiv::solve_optimal(pdiv::build_scale_set(ms, 1.0, 0.2), 0.2);
    ups.push_back(sol.b_u_star);
    lows.push_back(sol.b_l_star);
    liquidates = sol.liquidation_flag;
  }
  auto unimodal = [](const std::vector<double>& v) {
    std::size_t peak = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] > v[peak]) peak = i;
    if (peak == 0 || peak + 1 == v.size()) return false;
    for (std::size_t i = 1; i <= peak; ++i)
      if (v[i] < v[i - 1]) return false;
    for (std::size_t i = peak + 1; i < v.size(); ++i)
      if (v[i] > v[i - 1]) return false;
    return true;
  };
  o.require(unimodal(ups) && unimodal(lows), "sigma sweep not rise-then-fall");
  o.require(liquidates && lows.back() == 0.0, "no liquidation at sigma=40");
  // V'(b_u* + x) increasing to gamma / (gamma + delta)
  for (double k : {0.01, 2.0}) {
    const auto sol = pdiv::solve_optimal(base(), k);
    const auto v = pdiv::value_bubl(base(), sol.pair());
    double last = -INFINITY;
    double worst_drop = 0.0;
    for (int i = 0; i <= 4000; ++i) {
      const double d = v.derivative(sol.b_u_star + i * 0.01, 1);
      worst_drop = std::max(worst_drop, last - d);
      last = d;
    }
    o.require(worst_drop <= 0.0, "kappa=" + num(k) + " V'(b_u*+x) drops by " + num(worst_drop));
    const double miss = std::abs(v.derivative(sol.b_u_star + 40.0, 1) - 1.0 / 1.2);
    o.require(miss <= 1e-4, "kappa=" + num(k) + " |V'(b_u*+40) - 5/6| = " + num(miss));
  }
  if (o.ok) o.detail = "all sweep shapes and asymptotes hold";
  return o;
}

Outcome determinism() {
  Outcome o;
  std::istringstream text(
      "c = 11\nsigma = 1\nlambda = 10\np1 = 0.9\nbeta1 = 1.9\np2 = 0.1\nbeta2 = 0.19\n"
      "gamma = 1\ndelta = 0.2\nkappa = 0.2\nx = 0, 1, 2.5\npaths = 2000\nseed = 42\n"
      "sweep_param = sigma\nsweep_from = 0\nsweep_to = 20\nsweep_steps = 5\n");
  const auto cfg = pdiv::parse_config(text, "acceptance");
  using Cmd = std::function<void(const pdiv::RunConfig&, std::ostream&)>;
  const std::pair<const char*, Cmd> cmds[] = {{"solve", pdiv::cmd_solve}, {"value", pdiv::cmd_value},
                                              {"sweep", pdiv::cmd_sweep}, {"simulate", pdiv::cmd_simulate},
                                              {"exit-probe", pdiv::cmd_exit_probe}};
  for (const auto& [name, cmd] : cmds) {
    std::ostringstream a, b;
    cmd(cfg, a);
    cmd(cfg, b);
    o.require(a.str() == b.str() && !a.str().empty(), std::string(name) + " output differs");
  }
  auto threaded = cfg;
  threaded.threads = 4;
  std::ostringstream a, b;
  pdiv::cmd_simulate(cfg, a);
  pdiv::cmd_simulate(threaded, b);
  o.require(a.str() == b.str(), "simulate depends on thread count");
  if (o.ok) o.detail = "solve, value, sweep, simulate, exit-probe byte-identical";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    Outcome (*run)();
  };
  const Criterion all[] = {
      {1, "scale-function Laplace identity", 1.0, laplace_identity},
      {2, "net drift of the base model", 0.1, net_drift},
      {3, "smoothness root uniqueness and residual", 5.0, smoothness_root},
      {4, "optimal pair structure", 5.0, optimal_structure},
      {5, "perturbation optimality", 10.0, perturbation},
      {6, "HJB verification", 30.0, hjb},
      {7, "Monte Carlo equivalence", 300.0, monte_carlo},
      {8, "kappa to zero convergence", 10.0, kappa_limit},
      {9, "qualitative sweep and asymptote shapes", 120.0, figures},
      {10, "determinism", 60.0, determinism},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) {
      o.ok = false;
      o.detail += " (took " + num(secs) + " s, budget " + num(c.budget_s) + " s)";
    }
    failed += !o.ok;
    std::printf("%s criterion %d: %s [%.2f s] %s\n", o.ok ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
