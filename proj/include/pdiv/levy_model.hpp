#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdiv/errors.hpp"

namespace pdiv {

// One exponential phase of the claim-size mixture: weight and rate.
struct ExpPhase {
  double weight;
  double rate;
};

// Surplus process X(t) = x + c t + sigma B(t) - sum_{k <= N(t)} G_k, with
// N a Poisson(lambda) process and G_k ~ sum_i p_i Exp(beta_i).
//
// The jump density lambda * sum_i p_i beta_i exp(-beta_i x) is completely
// monotone for every valid parameterization.
class LevyModel {
 public:
  LevyModel(double premium, double sigma, double jump_rate,
            std::vector<ExpPhase> mixture)
      : c_(premium), sigma_(sigma), lambda_(jump_rate),
        mixture_(std::move(mixture)) {
    validate();
  }

  double premium() const { return c_; }
  double sigma() const { return sigma_; }
  double jump_rate() const { return lambda_; }
  std::span<const ExpPhase> mixture() const { return mixture_; }
  std::size_t phases() const { return mixture_.size(); }

  // Unbounded variation iff a Brownian part is present.
  bool unbounded_variation() const { return sigma_ > 0.0; }

  // E[G], E[G^2] of one claim.
  double claim_mean() const {
    double m = 0.0;
    for (const auto& ph : mixture_) m += ph.weight / ph.rate;
    return m;
  }
  double claim_second_moment() const {
    double m = 0.0;
    for (const auto& ph : mixture_) m += 2.0 * ph.weight / (ph.rate * ph.rate);
    return m;
  }

  double smallest_rate() const {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& ph : mixture_) r = std::min(r, ph.rate);
    return r;
  }

 private:
  void validate() const {
    auto fail = [](const std::string& msg) { throw ModelError(msg); };
    if (!std::isfinite(c_)) fail("premium rate c must be finite");
    if (!(sigma_ >= 0.0) || !std::isfinite(sigma_)) fail("sigma must be >= 0");
    if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) fail("lambda must be >= 0");
    if (mixture_.empty()) fail("claim mixture needs at least one phase");
    double total = 0.0;
    for (std::size_t i = 0; i < mixture_.size(); ++i) {
      const auto& ph = mixture_[i];
      if (!(ph.weight > 0.0)) fail("mixture weight p" + std::to_string(i + 1) + " must be positive");
      if (!(ph.rate > 0.0) || !std::isfinite(ph.rate))
        fail("mixture rate beta" + std::to_string(i + 1) + " must be positive");
      total += ph.weight;
      for (std::size_t j = 0; j < i; ++j)
        if (mixture_[j].rate == ph.rate)
          fail("mixture rates must be pairwise distinct (beta" + std::to_string(j + 1) +
               " == beta" + std::to_string(i + 1) + ")");
    }
    if (std::abs(total - 1.0) > 1e-12) fail("mixture weights must sum to 1");
    if (sigma_ == 0.0 && lambda_ == 0.0) fail("sigma = 0 and lambda = 0 gives a monotone path");
    if (sigma_ == 0.0 && c_ <= 0.0) fail("sigma = 0 requires c > 0 (otherwise the path is monotone)");
  }

  double c_;
  double sigma_;
  double lambda_;
  std::vector<ExpPhase> mixture_;
};

struct ModelMoments {
  double mu;         // net drift per unit time
  double varsigma2;  // variance of the unit-time increment
  double M;          // beta_1 / beta_2 (expected large over small claim size)
};

namespace detail {

// psi(theta) continued analytically to theta != -beta_i.
inline double psi_continued(const LevyModel& m, double theta) {
  double jumps = 0.0;
  if (m.jump_rate() > 0.0)
    for (const auto& ph : m.mixture()) jumps += ph.weight * ph.rate / (ph.rate + theta);
  return m.premium() * theta + 0.5 * m.sigma() * m.sigma() * theta * theta +
         m.jump_rate() * (jumps - 1.0);
}

inline double dpsi_continued(const LevyModel& m, double theta) {
  double jumps = 0.0;
  if (m.jump_rate() > 0.0) {
    for (const auto& ph : m.mixture()) {
      const double d = ph.rate + theta;
      jumps += ph.weight * ph.rate / (d * d);
    }
  }
  return m.premium() + m.sigma() * m.sigma() * theta - m.jump_rate() * jumps;
}

inline bool is_pole(const LevyModel& m, double theta) {
  if (m.jump_rate() == 0.0) return false;
  for (const auto& ph : m.mixture())
    if (theta == -ph.rate) return true;
  return false;
}

}  // namespace detail

// psi(theta) = log E[exp(theta Y(1))] for theta >= 0.
inline double laplace_exponent(const LevyModel& m, double theta) {
  if (!(theta >= 0.0)) throw std::domain_error("laplace_exponent: theta must be >= 0");
  if (theta == 0.0) return 0.0;
  return detail::psi_continued(m, theta);
}

// psi'(theta) for theta > -min beta_i.
inline double laplace_exponent_derivative(const LevyModel& m, double theta) {
  if (detail::is_pole(m, theta))
    throw std::domain_error("laplace_exponent_derivative: theta is a pole of psi");
  if (!(theta > -m.smallest_rate()))
    throw std::domain_error("laplace_exponent_derivative: theta must exceed -min beta");
  return detail::dpsi_continued(m, theta);
}

struct ProportionalReduction {
  double kappa_eff;
  double value_scale;
};

// Costs rho * xi + kappa are equivalent to the fixed cost kappa / (1 - rho)
// with every value multiplied by (1 - rho). Barriers are unchanged.
inline ProportionalReduction reduce_proportional_cost(double kappa, double rho) {
  if (!(kappa >= 0.0)) throw ModelError("kappa must be >= 0");
  if (!(rho >= 0.0) || !(rho < 1.0)) throw ModelError("rho must lie in [0, 1)");
  return {kappa / (1.0 - rho), 1.0 - rho};
}

inline ModelMoments moments(const LevyModel& m) {
  ModelMoments out{};
  out.mu = m.premium() - m.jump_rate() * m.claim_mean();
  out.varsigma2 = m.sigma() * m.sigma() + m.jump_rate() * m.claim_second_moment();
  const auto mix = m.mixture();
  out.M = mix.size() >= 2 ? mix[0].rate / mix[1].rate : 1.0;
  return out;
}

// Parameters used throughout the numerical study: c = 11, sigma = 1,
// lambda = 10, p = (0.9, 0.1), beta = (1.9, 0.19).
inline LevyModel base_model() {
  return LevyModel(11.0, 1.0, 10.0, {{0.9, 1.9}, {0.1, 0.19}});
}

}  // namespace pdiv
