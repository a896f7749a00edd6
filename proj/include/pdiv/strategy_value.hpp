#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pdiv/errors.hpp"
#include "pdiv/exp_sum.hpp"
#include "pdiv/scale_functions.hpp"

namespace pdiv {

// Periodic (b_u, b_l) strategy: at each decision time, if the surplus is at
// least b_u, pay it down to b_l at fixed cost kappa.
struct BarrierPair {
  double b_u;
  double b_l;
  double kappa;

  double gap() const { return b_u - b_l; }
  bool admissible() const { return b_l >= 0.0 && b_u >= b_l && gap() >= kappa; }
};

enum class Side { left, right };

// Value of a periodic strategy as two closed-form branches:
//   V(x) = 0                    x < 0
//   V(x) = lower(x) = C W_d(x)  0 <= x <= split
//   V(x) = upper(x - split)     x > split
// The upper branch is stored in the local variable y = x - split.
struct PiecewiseValue {
  ExpSum lower;
  ExpSum upper;
  double split = 0.0;
  double C = 0.0;

  double operator()(double x) const {
    if (x < 0.0) return 0.0;
    return x <= split ? lower(x) : upper(x - split);
  }

  // One-sided at the split; the default side is left for x == split.
  double derivative(double x, int order, Side side = Side::left) const {
    if (order < 1 || order > 2) throw std::invalid_argument("value derivative: order must be 1 or 2");
    if (x < 0.0) return 0.0;
    const bool use_lower = x < split || (x == split && side == Side::left);
    return use_lower ? lower.derivative(order)(x) : upper.derivative(order)(x - split);
  }
};

namespace detail {

// Shared assembly of the (b_u, b_l) value: lower coefficient C, upper branch
//   C (W_{g,d,b_u}(x) - gamma W_d(b_l) Wbar_{g+d}(y)) - gamma (Wbarbar_{g+d}(y) + slack Wbar_{g+d}(y))
// with y = x - b_u. Every growing exponential in the upper branch cancels
// exactly; they are removed after checking that the numeric residue is tiny.
inline PiecewiseValue assemble_value(const ScaleBundle& s, double b_u, double b_l, double C,
                                     double slack) {
  const double g = s.gamma;
  PiecewiseValue pv;
  pv.split = b_u;
  pv.C = C;
  pv.lower = s.s_delta.W * C;
  const ExpSum raw = C * (w_gamma_delta_b_local(s, b_u) - g * s.W(b_l) * s.s_gd.Wbar) -
                     g * (s.s_gd.Wbarbar + slack * s.s_gd.Wbar);
  double scale = 0.0;
  for (const auto& t : raw.terms()) scale = std::max(scale, std::abs(t.coef));
  std::vector<ExpTerm> kept;
  for (const auto& t : raw.terms()) {
    if (t.rate > ExpSum::kRateMerge) {
      if (!(std::abs(t.coef) <= 1e-8 * (1.0 + scale)))
        throw SolverError("value: growing term exp(" + std::to_string(t.rate) +
                          " y) did not cancel (coef " + std::to_string(t.coef) + ")");
      continue;
    }
    kept.push_back(t);
  }
  pv.upper = ExpSum(std::move(kept), 0.0);
  return pv;
}

}  // namespace detail

// Lower-branch coefficient gamma (1/phi + g - kappa) / (phi Z_{g,d}(b_u) - gamma W_d(b_l)).
inline double lower_coefficient(const ScaleBundle& s, const BarrierPair& pair) {
  const double phi = s.phi_gd();
  const double denom = phi * s.z_gamma_delta(pair.b_u) - s.gamma * s.W(pair.b_l);
  if (!(denom > 0.0))
    throw std::invalid_argument("value_bubl: phi Z(b_u) - gamma W(b_l) <= 0, invalid barrier pair");
  return s.gamma * (1.0 / phi + pair.gap() - pair.kappa) / denom;
}

inline PiecewiseValue value_bubl(const ScaleBundle& s, const BarrierPair& pair) {
  if (!std::isfinite(pair.b_u) || !std::isfinite(pair.b_l))
    throw std::invalid_argument("value_bubl: barriers must be finite");
  if (!(pair.kappa >= 0.0)) throw std::invalid_argument("value_bubl: kappa must be >= 0");
  if (!pair.admissible())
    throw std::invalid_argument("value_bubl: need 0 <= b_l <= b_u and b_u - b_l >= kappa");
  const double C = lower_coefficient(s, pair);
  return detail::assemble_value(s, pair.b_u, pair.b_l, C, pair.gap() - pair.kappa);
}

// Periodic barrier strategy at b without transaction costs.
inline PiecewiseValue value_barrier_no_cost(const ScaleBundle& s, double b) {
  if (!(b >= 0.0) || !std::isfinite(b)) throw std::invalid_argument("value_barrier_no_cost: b must be >= 0");
  const double dz = s.dZ(b);
  if (!(dz > 0.0)) throw SolverError("value_barrier_no_cost: Z'_{gamma,delta}(b) <= 0");
  const double C = s.gamma / (s.phi_gd() * dz);
  return detail::assemble_value(s, b, b, C, 0.0);
}

// Gamma_{b_l}(g) = (g - kappa) Z'(b_l + g) - (gamma / phi)(W_d(b_l + g) - W_d(b_l)).
// Zero exactly when (b_l + g, b_l) satisfies the smoothness condition.
inline double gamma_condition(const ScaleBundle& s, double b_l, double g, double kappa) {
  if (!(g >= kappa)) throw std::invalid_argument("gamma_condition: need g >= kappa");
  const double b_u = b_l + g;
  return (g - kappa) * s.dZ(b_u) - s.gamma / s.phi_gd() * (s.W(b_u) - s.W(b_l));
}

// d Gamma_{b_l} / dg = (1/phi + g - kappa) Z''(b_l + g)
inline double gamma_condition_slope(const ScaleBundle& s, double b_l, double g, double kappa) {
  return (1.0 / s.phi_gd() + g - kappa) * s.d2Z(b_l + g);
}

inline double value_derivative(const PiecewiseValue& pv, double x, int order, Side side = Side::left) {
  return pv.derivative(x, order, side);
}

}  // namespace pdiv
