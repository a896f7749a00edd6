#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdiv/errors.hpp"
#include "pdiv/exp_sum.hpp"
#include "pdiv/levy_model.hpp"
#include "pdiv/numerics.hpp"

namespace pdiv {

struct RootSet {
  std::vector<double> roots;      // descending; roots[0] is the positive root
  std::vector<double> coefs;      // 1 / psi'(r_j)
  std::vector<double> residuals;  // psi(r_j) - q
};

// All real roots of psi(theta) = q, q > 0.
//
// psi - q is -q at 0 and runs from +inf to -inf across every gap between
// consecutive poles -beta_(k+1) < -beta_(k); there is one more root in
// (-min beta, 0), one in (0, inf) and, with a Brownian part, one below
// -max beta. That gives m + 2 roots (m + 1 when sigma = 0).
inline RootSet find_roots(const LevyModel& model, double q) {
  if (!(q > 0.0)) throw std::domain_error("find_roots: q must be positive");
  auto f = [&](double t) { return detail::psi_continued(model, t) - q; };

  std::vector<double> poles;
  for (const auto& ph : model.mixture()) poles.push_back(-ph.rate);
  if (model.jump_rate() == 0.0) poles.clear();
  std::sort(poles.begin(), poles.end(), std::greater<>());  // closest to 0 first

  std::vector<double> roots;

  double hi = 1.0;
  while (f(hi) <= 0.0) {
    hi *= 2.0;
    if (hi > 1e12) throw SolverError("find_roots: positive root not bracketed");
  }
  roots.push_back(numerics::best_end(f, numerics::bisect(f, 0.0, hi, true)));

  // Each gap (left, right) has f -> +inf at its left end and f < 0 at its right end.
  double right = 0.0;
  for (double pole : poles) {
    roots.push_back(numerics::best_end(f, numerics::bisect(f, pole, right, false)));
    right = pole;
  }
  if (model.unbounded_variation()) {
    double lo = right - 1.0;
    while (f(lo) <= 0.0) {
      lo = right - 2.0 * (right - lo);
      if (lo < -1e12) throw SolverError("find_roots: lowest root not bracketed");
    }
    roots.push_back(numerics::best_end(f, numerics::bisect(f, lo, right, false)));
  }

  const std::size_t expected = model.phases() * (model.jump_rate() > 0.0 ? 1 : 0) +
                               (model.unbounded_variation() ? 2 : 1);
  if (roots.size() != expected)
    throw SolverError("find_roots: found " + std::to_string(roots.size()) + " roots, expected " +
                      std::to_string(expected));

  // One Newton step from the better bracket end, kept only if it helps.
  RootSet out;
  for (double r : roots) {
    const double d = detail::dpsi_continued(model, r);
    const double polished = r - f(r) / d;
    if (std::isfinite(polished) && std::abs(f(polished)) < std::abs(f(r))) r = polished;
    const double res = f(r);
    const double slope = std::abs(detail::dpsi_continued(model, r));
    const double allowed = 1e-12 * (1.0 + q) + 8.0 * 2.2e-16 * slope * std::max(1.0, std::abs(r));
    if (!(std::abs(res) <= allowed))
      throw SolverError("find_roots: residual " + std::to_string(res) + " at root " + std::to_string(r));
    out.roots.push_back(r);
    out.coefs.push_back(1.0 / detail::dpsi_continued(model, r));
    out.residuals.push_back(res);
  }
  for (std::size_t i = 1; i < out.roots.size(); ++i)
    if (!(out.roots[i] < out.roots[i - 1])) throw SolverError("find_roots: roots not distinct");
  return out;
}

// W_q = sum_j A_j exp(r_j x) and its first two integrals from 0.
struct ScaleSet {
  double q = 0.0;
  std::vector<double> roots;
  std::vector<double> coefs;
  double phi = 0.0;
  ExpSum W;
  ExpSum Wbar;
  ExpSum Wbarbar;
};

inline ScaleSet make_scale_set(const LevyModel& model, double q) {
  const auto rs = find_roots(model, q);
  ScaleSet s;
  s.q = q;
  s.roots = rs.roots;
  s.coefs = rs.coefs;
  s.phi = rs.roots.front();
  std::vector<ExpTerm> terms;
  for (std::size_t j = 0; j < rs.roots.size(); ++j) terms.push_back({rs.coefs[j], rs.roots[j], 0});
  s.W = ExpSum(std::move(terms), 0.0);
  s.Wbar = s.W.antiderivative();
  s.Wbarbar = s.Wbar.antiderivative();
  return s;
}

// Everything needed for a fixed (gamma, delta): W_delta, W_{gamma+delta},
// their integrals, derivatives of W_delta, and
//   Z_{gamma,delta}(x) = gamma * sum_j A_j exp(r_j x) / (phi_{gamma+delta} - r_j),  x >= 0,
// with its derivatives and h(x) = exp(-phi_{gamma+delta} x) Z''_{gamma,delta}(x).
struct ScaleBundle {
  LevyModel model;
  double gamma;
  double delta;
  ScaleSet s_delta;
  ScaleSet s_gd;
  ExpSum dW, d2W, d3W;
  ExpSum Z, dZ, d2Z;
  ExpSum h;

  double phi_gd() const { return s_gd.phi; }
  double W(double x) const { return s_delta.W(x); }

  // Z_{gamma,delta} extended by exp(phi x) for x < 0.
  double z_gamma_delta(double x) const { return x < 0.0 ? std::exp(phi_gd() * x) : Z(x); }
};

inline ScaleBundle build_scale_set(const LevyModel& model, double gamma, double delta) {
  if (!(gamma > 0.0)) throw ModelError("gamma must be positive");
  if (!(delta > 0.0)) throw ModelError("delta must be positive");
  auto sd = make_scale_set(model, delta);
  auto sg = make_scale_set(model, gamma + delta);
  if (!(sg.phi > sd.phi))
    throw SolverError("build_scale_set: phi_{gamma+delta} <= phi_delta indicates a root error");

  std::vector<ExpTerm> zt;
  for (std::size_t j = 0; j < sd.roots.size(); ++j)
    zt.push_back({gamma * sd.coefs[j] / (sg.phi - sd.roots[j]), sd.roots[j], 0});
  ExpSum Z(std::move(zt), 0.0);

  ScaleBundle b{model, gamma, delta, sd, sg, {}, {}, {}, Z, {}, {}, {}};
  b.dW = sd.W.derivative(1);
  b.d2W = sd.W.derivative(2);
  b.d3W = sd.W.derivative(3);
  b.dZ = Z.derivative(1);
  b.d2Z = Z.derivative(2);
  b.h = b.d2Z.tilted(-sg.phi);
  return b;
}

// W_{gamma,delta,b}(b + z) = W_delta(b + z) + gamma int_0^z W_{gamma+delta}(z - t) W_delta(b + t) dt
// as an ExpSum in the local variable z = x - b >= 0. Building it in the
// local variable keeps every coefficient bounded for large b.
inline ExpSum w_gamma_delta_b_local(const ScaleBundle& s, double b) {
  if (!(b >= 0.0)) throw std::invalid_argument("w_gamma_delta_b: b must be >= 0");
  const ExpSum wd_shift = s.s_delta.W.shifted(b).with_domain(0.0);
  return wd_shift + s.gamma * convolve(s.s_gd.W, wd_shift);
}

inline double w_gamma_delta_b(const ScaleBundle& s, double b, double x) {
  if (x <= b) return s.s_delta.W(x);
  return w_gamma_delta_b_local(s, b)(x - b);
}

inline double h_function(const ScaleBundle& s, double x) {
  if (!(x >= 0.0)) throw std::domain_error("h_function: x must be >= 0");
  return s.h(x);
}

// Z_q(x, theta) = e^{theta x} (1 - (psi(theta) - q) int_0^x e^{-theta y} W_q(y) dy), theta >= 0.
inline double tilted_scale(const ScaleSet& s, const LevyModel& model, double x, double theta = 0.0) {
  if (x < 0.0) return std::exp(theta * x);
  const double gap = laplace_exponent(model, theta) - s.q;
  const ExpSum inner = s.W.tilted(-theta).antiderivative();
  const ExpSum z = (ExpSum::constant(1.0) - gap * inner).tilted(theta);
  return z(x);
}

// E_x[e^{-q tau_b^+}; tau_b^+ < tau_a^-]
inline double two_sided_exit_up(const ScaleSet& s, double x, double a, double b) {
  if (!(a < b) || !(a <= x) || !(x <= b))
    throw std::invalid_argument("two_sided_exit_up: need a <= x <= b and a < b");
  return s.W(x - a) / s.W(b - a);
}

// E_x[e^{-q tau_a^-} (tilted by theta); tau_a^- < tau_b^+]
inline double two_sided_exit_down(const ScaleSet& s, const LevyModel& model, double x, double a,
                                  double b, double theta = 0.0) {
  if (!(a < b) || !(a <= x) || !(x <= b))
    throw std::invalid_argument("two_sided_exit_down: need a <= x <= b and a < b");
  return tilted_scale(s, model, x - a, theta) -
         tilted_scale(s, model, b - a, theta) * s.W(x - a) / s.W(b - a);
}

}  // namespace pdiv
