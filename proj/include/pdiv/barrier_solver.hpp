#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pdiv/errors.hpp"
#include "pdiv/numerics.hpp"
#include "pdiv/scale_functions.hpp"
#include "pdiv/strategy_value.hpp"

namespace pdiv {

inline constexpr double kBarrierCap = 200.0;  // bracket expansion limit (surplus units)

struct SolverDiagnostics {
  double b_bar_residual = 0.0;   // W''_d(b_bar), scaled
  double b_star_residual = 0.0;  // h(b*), scaled
  double gamma_residual = 0.0;   // Gamma_{b_l*}(g*), scaled
  double g_residual = 0.0;       // G(b_l*) - 1 (0 when b_l* = 0)
  double G_at_zero = 0.0;        // V'(0) of the smooth pair with b_l = 0
};

struct BarrierSolution {
  double b_star = 0.0;
  double b_bar = 0.0;
  double b_u_star = 0.0;
  double b_l_star = 0.0;
  double kappa = 0.0;
  bool liquidation_flag = false;
  SolverDiagnostics diagnostics;

  BarrierPair pair() const { return {b_u_star, b_l_star, kappa}; }
};

// Inflection point of W_delta: 0 when W''_d(0+) >= 0, otherwise the unique
// zero of W''_d on (0, 100].
inline double find_b_bar(const ScaleBundle& s, double* residual = nullptr) {
  const auto& f = s.d2W;
  const double at0 = f(0.0);
  if (at0 >= 0.0) {
    if (residual) *residual = 0.0;
    return 0.0;
  }
  constexpr double cap = 100.0;
  double hi = 0.5;
  while (!(f(hi) > 0.0)) {
    if (hi >= cap) throw SolverError("find_b_bar: W''_delta has no sign change on [0, 100]");
    hi = std::min(cap, 2.0 * hi);
  }
  const double root = numerics::best_end(f, numerics::bisect(f, 0.0, hi, true));
  const double res = std::abs(f(root)) / std::abs(at0);
  if (residual) *residual = res;
  if (!(res <= 1e-10)) throw SolverError("find_b_bar: residual too large");
  return root;
}

// Periodic barrier without costs: 0 when Z''_{g,d}(0) >= 0 (ties within
// 1e-12 count as >= 0), otherwise the zero of Z''_{g,d} (equivalently of h).
inline double find_b_star(const ScaleBundle& s, double* residual = nullptr) {
  const auto& h = s.h;
  const double at0 = s.d2Z(0.0);
  if (at0 >= -1e-12) {
    if (residual) *residual = 0.0;
    return 0.0;
  }
  double hi = 1.0;
  while (!(h(hi) > 0.0)) {
    if (hi >= kBarrierCap) throw SolverError("find_b_star: bracket expansion exceeded 200");
    hi = std::min(kBarrierCap, 2.0 * hi);
  }
  const double root = numerics::best_end(h, numerics::bisect(h, 0.0, hi, true));
  const double res = std::abs(h(root)) / std::abs(h(0.0));
  if (residual) *residual = res;
  if (!(res <= 1e-10)) throw SolverError("find_b_star: residual too large");
  return root;
}

struct UpperBarrier {
  double b_u;
  double residual;  // |Gamma| / (1 + scale)
  double slope;     // dGamma/dg at the root
};

// Unique g > kappa with Gamma_{b_l}(g) = 0; returns b_u = b_l + g.
inline UpperBarrier solve_bu_given_bl(const ScaleBundle& s, double b_l, double kappa) {
  if (!(b_l >= 0.0)) throw std::invalid_argument("solve_bu_given_bl: b_l must be >= 0");
  if (!(kappa > 0.0)) throw ModelError("kappa must be positive");
  auto gam = [&](double g) { return gamma_condition(s, b_l, g, kappa); };
  if (!(gam(kappa) < 0.0)) throw SolverError("solve_bu_given_bl: Gamma(kappa) >= 0");

  double hi = kappa + std::max(1.0, kappa);
  while (!(gam(hi) > 0.0)) {
    if (b_l + hi >= kBarrierCap) throw SolverError("solve_bu_given_bl: bracket expansion exceeded 200");
    hi = std::min(kBarrierCap - b_l, kappa + 2.0 * (hi - kappa));
  }

  constexpr int kScan = 256;
  int changes = 0;
  double prev = gam(kappa);
  for (int i = 1; i <= kScan; ++i) {
    const double cur = gam(kappa + (hi - kappa) * i / kScan);
    if ((prev < 0.0) != (cur < 0.0)) ++changes;
    prev = cur;
  }
  if (changes != 1)
    throw SolverError("solve_bu_given_bl: " + std::to_string(changes) +
                      " sign changes of Gamma on the scan grid");

  const double g = numerics::best_end(gam, numerics::bisect(gam, kappa, hi, true));
  const double b_u = b_l + g;
  const double scale = std::abs((g - kappa) * s.dZ(b_u)) +
                       s.gamma / s.phi_gd() * std::abs(s.W(b_u) - s.W(b_l));
  UpperBarrier out{b_u, std::abs(gam(g)) / (1.0 + scale), gamma_condition_slope(s, b_l, g, kappa)};
  if (!(out.residual <= 1e-11)) throw SolverError("solve_bu_given_bl: residual too large");
  if (!(out.slope > 0.0)) throw SolverError("solve_bu_given_bl: dGamma/dg <= 0 at the root");
  return out;
}

// V'(b_l) of the smooth pair with lower barrier b_l, from the closed-form
// lower-branch coefficient.
inline double smooth_pair_slope_at_bl(const ScaleBundle& s, double b_l, double kappa,
                                      double* b_u_out = nullptr) {
  const auto up = solve_bu_given_bl(s, b_l, kappa);
  if (b_u_out) *b_u_out = up.b_u;
  return lower_coefficient(s, {up.b_u, b_l, kappa}) * s.dW(b_l);
}

inline BarrierSolution solve_optimal(const ScaleBundle& s, double kappa) {
  if (!(kappa > 0.0)) throw ModelError("kappa must be positive");
  BarrierSolution sol;
  sol.kappa = kappa;
  sol.b_bar = find_b_bar(s, &sol.diagnostics.b_bar_residual);
  sol.b_star = find_b_star(s, &sol.diagnostics.b_star_residual);
  if (sol.b_star > sol.b_bar + 1e-9) throw SolverError("solve_optimal: b* > b_bar");

  auto G = [&](double b_l) { return smooth_pair_slope_at_bl(s, b_l, kappa); };
  const double g0 = G(0.0);
  sol.diagnostics.G_at_zero = g0;
  if (g0 <= 1.0) {
    sol.b_l_star = 0.0;
    sol.liquidation_flag = true;
  } else {
    if (!(G(sol.b_star) < 1.0))
      throw SolverError("solve_optimal: G(b*) >= 1, no lower barrier in [0, b*)");
    auto f = [&](double b_l) { return G(b_l) - 1.0; };
    sol.b_l_star = numerics::best_end(f, numerics::bisect(f, 0.0, sol.b_star, false));
    sol.diagnostics.g_residual = f(sol.b_l_star);
    if (!(std::abs(sol.diagnostics.g_residual) <= 1e-9))
      throw SolverError("solve_optimal: |G(b_l*) - 1| > 1e-9");
  }
  const auto up = solve_bu_given_bl(s, sol.b_l_star, kappa);
  sol.b_u_star = up.b_u;
  sol.diagnostics.gamma_residual = up.residual;

  if (!(sol.b_u_star > sol.b_star)) throw SolverError("solve_optimal: b_u* <= b*");
  if (sol.b_l_star > 0.0 && !(sol.b_l_star < sol.b_star))
    throw SolverError("solve_optimal: b_l* >= b*");
  if (!(s.d2Z(sol.b_u_star) > 0.0)) throw SolverError("solve_optimal: Z''(b_u*) <= 0");
  return sol;
}

struct HjbPoint {
  double x;
  double value;
  double generator;  // (L - delta) V(x)
  double best_gain;  // max_l (l - kappa) 1{l > 0} + V(x - l) - V(x)
  double best_l;
  double expression;  // generator + gamma * best_gain
  double quad_error;
  bool quad_converged;
};

struct HjbReport {
  std::vector<HjbPoint> points;
  double max_violation = -std::numeric_limits<double>::infinity();  // max expression / (1 + |V|)
  double max_abs_below_bu = 0.0;  // max |expression| / (1 + |V|) on [0, b_u*]
  bool all_converged = true;

  bool passed(double tol = 1e-6) const { return all_converged && max_violation <= tol; }
};

namespace detail {

// lambda * integral_0^x V(x - s) sum_i p_i beta_i e^{-beta_i s} ds, split at the kink of V.
inline double jump_integral(const LevyModel& m, const PiecewiseValue& v, double x, double* err) {
  using boost::math::quadrature::gauss_kronrod;
  auto dens = [&](double s) {
    double d = 0.0;
    for (const auto& ph : m.mixture()) d += ph.weight * ph.rate * std::exp(-ph.rate * s);
    return d;
  };
  auto f = [&](double s) { return v(x - s) * dens(s); };
  double total = 0.0, e = 0.0, e_piece = 0.0;
  const double kink = x - v.split;
  if (kink > 0.0) {
    total += gauss_kronrod<double, 31>::integrate(f, 0.0, kink, 20, 1e-13, &e_piece);
    e += e_piece;
    total += gauss_kronrod<double, 31>::integrate(f, kink, x, 20, 1e-13, &e_piece);
    e += e_piece;
  } else if (x > 0.0) {
    total += gauss_kronrod<double, 31>::integrate(f, 0.0, x, 20, 1e-13, &e_piece);
    e += e_piece;
  }
  if (err) *err = m.jump_rate() * e;
  return m.jump_rate() * total;
}

}  // namespace detail

// Evaluates (L - delta)V(x) + gamma max_{l in [0, x]} ((l - kappa) 1{l > 0} + V(x - l) - V(x))
// on x_grid for the value of the solved strategy.
inline HjbReport verify_hjb(const ScaleBundle& s, const BarrierSolution& sol,
                            const std::vector<double>& x_grid) {
  const auto& m = s.model;
  const auto v = value_bubl(s, sol.pair());
  HjbReport rep;
  for (double x : x_grid) {
    HjbPoint p{};
    p.x = x;
    p.value = v(x);
    double qerr = 0.0;
    const double jumps = detail::jump_integral(m, v, x, &qerr);
    const double sig2 = m.sigma() * m.sigma();
    p.generator = m.premium() * v.derivative(x, 1) + 0.5 * sig2 * v.derivative(x, 2) + jumps -
                  m.jump_rate() * p.value - s.delta * p.value;
    p.quad_error = qerr;
    p.quad_converged = qerr <= 1e-9 * (1.0 + std::abs(p.value));

    auto gain = [&](double l) { return l <= 0.0 ? 0.0 : l - sol.kappa + v(x - l) - p.value; };
    double best = 0.0, best_l = 0.0;
    auto consider = [&](double l) {
      if (l < 0.0 || l > x) return;
      const double gv = gain(l);
      if (gv > best) {
        best = gv;
        best_l = l;
      }
    };
    if (x > 0.0) {
      consider(x);
      consider(x - sol.b_l_star);
      consider(numerics::golden_max(gain, 0.0, x, 1e-12));
    }
    p.best_gain = best;
    p.best_l = best_l;
    p.expression = p.generator + s.gamma * best;

    const double scaled = p.expression / (1.0 + std::abs(p.value));
    rep.max_violation = std::max(rep.max_violation, scaled);
    if (x <= sol.b_u_star) rep.max_abs_below_bu = std::max(rep.max_abs_below_bu, std::abs(scaled));
    rep.all_converged = rep.all_converged && p.quad_converged;
    rep.points.push_back(p);
  }
  return rep;
}

}  // namespace pdiv
