#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "pdiv/errors.hpp"
#include "pdiv/levy_model.hpp"
#include "pdiv/numerics.hpp"

namespace pdiv {

struct SimConfig {
  std::uint64_t n_paths = 100000;
  double dt = 1e-3;      // ruin-monitoring step for the Brownian part
  double t_max = 70.0;   // horizon; choose exp(-delta t_max) <= 1e-6
  std::uint64_t seed = 20240601;
  bool antithetic = false;
  unsigned threads = 1;

  void validate() const {
    if (n_paths < 1) throw ModelError("paths must be >= 1");
    if (antithetic && n_paths % 2 != 0) throw ModelError("antithetic sampling needs an even path count");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ModelError("dt must be positive");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ModelError("t_max must be positive");
    if (threads < 1) throw ModelError("threads must be >= 1");
  }

  // Smallest horizon with exp(-delta t_max) <= tol.
  static double horizon_for(double delta, double tol = 1e-6) { return -std::log(tol) / delta; }
};

struct SimEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::uint64_t n_ruined = 0;
  double truncation_bound = 0.0;
};

// Pays (surplus - b_l) at a decision time when the surplus is >= b_u.
// b_u = +inf never pays.
struct PeriodicStrategy {
  double b_u;
  double b_l;
  double kappa;

  static PeriodicStrategy pair(double b_u, double b_l, double kappa) { return {b_u, b_l, kappa}; }
  static PeriodicStrategy barrier(double b) { return {b, b, 0.0}; }
  static PeriodicStrategy never_pay() { return {std::numeric_limits<double>::infinity(), 0.0, 0.0}; }
};

namespace detail {

// Independent stream per path: the path index is mixed into the seed.
inline std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
  return std::mt19937_64(seq);
}

// Diffusion part of the surplus with monitoring on a dt grid. When the
// surplus sits far from both absorbing levels, consecutive grid steps are
// merged into one exact Gaussian increment; a merge of length L is only taken
// when dist >= 8 sigma sqrt(L) + |c| L, i.e. P(crossing inside it) < 1e-15.
class DiffusionStepper {
 public:
  DiffusionStepper(double drift, double sigma, double dt) : c_(drift), sigma_(sigma), dt_(dt) {}

  // Moves (t, x) forward to t_end. Returns false as soon as a monitored point
  // falls outside [lo, hi); t and x then hold that point.
  template <class Rng>
  bool advance(double& t, double& x, double t_end, double lo, double hi, Rng& rng, double sign) {
    if (sigma_ == 0.0) {
      x += c_ * (t_end - t);
      t = t_end;
      return x >= lo && x < hi;
    }
    while (t < t_end) {
      const double left = t_end - t;
      double h = std::min(dt_, left);
      const double merge = safe_horizon(std::min(x - lo, hi - x));
      if (merge >= 2.0 * dt_) h = std::min(left, std::floor(merge / dt_) * dt_);
      x += c_ * h + sign * sigma_ * std::sqrt(h) * normal_(rng);
      t = (h == left) ? t_end : t + h;
      if (!(x >= lo && x < hi)) return false;
    }
    return true;
  }

 private:
  double safe_horizon(double dist) const {
    const double a = std::abs(c_), b = kZ * sigma_;
    const double s = a > 0.0 ? (-b + std::sqrt(b * b + 4.0 * a * dist)) / (2.0 * a) : dist / b;
    return s * s;
  }

  static constexpr double kZ = 8.0;
  double c_, sigma_, dt_;
  std::normal_distribution<double> normal_;
};

template <class Rng>
double sample_claim(const LevyModel& m, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto mix = m.mixture();
  double pick = u(rng);
  std::size_t i = 0;
  for (; i + 1 < mix.size(); ++i) {
    if (pick < mix[i].weight) break;
    pick -= mix[i].weight;
  }
  return std::exponential_distribution<double>(mix[i].rate)(rng);
}

struct PathResult {
  double payout;
  bool ruined;
};

inline PathResult run_value_path(const LevyModel& m, double gamma, double delta,
                                 const PeriodicStrategy& st, double x0, const SimConfig& cfg,
                                 std::uint64_t stream, double sign) {
  // With a Brownian part, 0 is regular for (-inf, 0): a surplus sitting at 0 is ruined at once.
  const bool creeps = m.sigma() > 0.0;
  if (x0 < 0.0 || (creeps && x0 == 0.0)) return {0.0, true};
  auto rng = path_engine(cfg.seed, stream);
  const double inf = std::numeric_limits<double>::infinity();
  const bool has_jumps = m.jump_rate() > 0.0;
  std::exponential_distribution<double> next_jump(has_jumps ? m.jump_rate() : 1.0);
  std::exponential_distribution<double> next_decision(gamma);
  DiffusionStepper diff(m.premium(), m.sigma(), cfg.dt);

  double t = 0.0, x = x0;
  double t_jump = has_jumps ? next_jump(rng) : inf;
  double t_dec = next_decision(rng);
  numerics::CompensatedSum payout;
  while (true) {
    const double t_next = std::min({t_jump, t_dec, cfg.t_max});
    if (!diff.advance(t, x, t_next, 0.0, inf, rng, sign)) {
      if (std::isnan(x)) throw SimulationError("NaN surplus");
      return {payout.value(), true};
    }
    if (t >= cfg.t_max) return {payout.value(), false};
    if (t == t_jump) {
      x -= sample_claim(m, rng);
      if (x < 0.0) return {payout.value(), true};
      t_jump = t + next_jump(rng);
    } else {
      if (x >= st.b_u) {
        const double paid = x - st.b_l;
        if (paid > 0.0) payout.add(std::exp(-delta * t) * (paid - st.kappa));
        x = st.b_l;
        if (creeps && x == 0.0) return {payout.value(), true};
      }
      t_dec = t + next_decision(rng);
    }
  }
}

// exp(-delta tau_b^+) on {tau_b^+ < tau_a^-}, else 0.
inline double run_exit_path(const LevyModel& m, double delta, double x0, double a, double b,
                            const SimConfig& cfg, std::uint64_t stream, double sign) {
  if (x0 >= b) return 1.0;
  if (x0 < a) return 0.0;
  auto rng = path_engine(cfg.seed, stream);
  const double inf = std::numeric_limits<double>::infinity();
  const bool has_jumps = m.jump_rate() > 0.0;
  std::exponential_distribution<double> next_jump(has_jumps ? m.jump_rate() : 1.0);
  DiffusionStepper diff(m.premium(), m.sigma(), cfg.dt);
  double t = 0.0, x = x0;
  double t_jump = has_jumps ? next_jump(rng) : inf;
  while (true) {
    const double t_next = std::min(t_jump, cfg.t_max);
    if (!diff.advance(t, x, t_next, a, b, rng, sign)) {
      if (std::isnan(x)) throw SimulationError("NaN surplus");
      return x >= b ? std::exp(-delta * t) : 0.0;
    }
    if (t >= cfg.t_max) return 0.0;
    x -= sample_claim(m, rng);
    if (x < a) return 0.0;
    t_jump = t + next_jump(rng);
  }
}

// Runs path(i, sign) for every path index, fanning out over cfg.threads.
// Per-path streams make the output independent of the thread count.
template <class PathFn>
auto run_paths(const SimConfig& cfg, PathFn&& path) {
  using R = decltype(path(std::uint64_t{0}, 1.0));
  std::vector<R> out(cfg.n_paths);
  auto work = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t i = begin; i < end; ++i) {
      const std::uint64_t stream = cfg.antithetic ? i / 2 : i;
      const double sign = (cfg.antithetic && (i % 2 == 1)) ? -1.0 : 1.0;
      out[i] = path(stream, sign);
    }
  };
  const unsigned nt = static_cast<unsigned>(std::min<std::uint64_t>(cfg.threads, cfg.n_paths));
  if (nt <= 1) {
    work(0, cfg.n_paths);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(nt);
  const std::uint64_t chunk = (cfg.n_paths + nt - 1) / nt;
  for (unsigned k = 0; k < nt; ++k) {
    const std::uint64_t b = k * chunk, e = std::min(cfg.n_paths, b + chunk);
    pool.emplace_back([&, k, b, e] {
      try {
        work(b, e);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// Antithetic pairs are averaged before the standard error is taken.
inline numerics::MeanStderr summarize(const SimConfig& cfg, const std::vector<double>& values) {
  if (!cfg.antithetic) return numerics::mean_and_stderr(values);
  std::vector<double> pairs(values.size() / 2);
  for (std::size_t k = 0; k < pairs.size(); ++k) pairs[k] = 0.5 * (values[2 * k] + values[2 * k + 1]);
  return numerics::mean_and_stderr(pairs);
}

}  // namespace detail

// Discounted dividends net of kappa paid until ruin, E_x0[sum_i e^{-delta T_i}(xi_i - kappa) 1{xi_i > 0}].
inline SimEstimate simulate_value(const LevyModel& m, double gamma, double delta,
                                  const PeriodicStrategy& st, double x0, const SimConfig& cfg) {
  cfg.validate();
  if (!(gamma > 0.0) || !(delta > 0.0)) throw ModelError("gamma and delta must be positive");
  if (!(st.kappa >= 0.0)) throw ModelError("kappa must be >= 0");
  if (!(st.b_l >= 0.0) || !(st.b_u >= st.b_l)) throw ModelError("strategy needs 0 <= b_l <= b_u");
  const auto paths = detail::run_paths(cfg, [&](std::uint64_t stream, double sign) {
    return detail::run_value_path(m, gamma, delta, st, x0, cfg, stream, sign);
  });
  std::vector<double> values(paths.size());
  SimEstimate est;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    values[i] = paths[i].payout;
    est.n_ruined += paths[i].ruined ? 1 : 0;
  }
  const auto ms = detail::summarize(cfg, values);
  est.mean = ms.mean;
  est.stderr_ = ms.stderr_;
  const double mu_plus = std::max(0.0, moments(m).mu);
  const double scale = std::isfinite(st.b_u) ? std::max(x0, st.b_u) + mu_plus / delta : 0.0;
  est.truncation_bound = std::exp(-delta * cfg.t_max) * scale;
  return est;
}

inline SimEstimate simulate_exit(const LevyModel& m, double delta, double x0, double a, double b,
                                 const SimConfig& cfg) {
  cfg.validate();
  if (!(a < b) || !(a <= x0) || !(x0 <= b)) throw ModelError("exit probe needs a <= x0 <= b and a < b");
  if (!(delta >= 0.0)) throw ModelError("delta must be >= 0");
  auto values = detail::run_paths(cfg, [&](std::uint64_t stream, double sign) {
    return detail::run_exit_path(m, delta, x0, a, b, cfg, stream, sign);
  });
  SimEstimate est;
  const auto ms = detail::summarize(cfg, values);
  est.mean = ms.mean;
  est.stderr_ = ms.stderr_;
  for (double v : values) est.n_ruined += (v == 0.0) ? 1 : 0;
  est.truncation_bound = std::exp(-delta * cfg.t_max);
  return est;
}

}  // namespace pdiv
