#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace pdiv {

// coef * x^power * exp(rate * x)
struct ExpTerm {
  double coef;
  double rate;
  int power;
};

// Finite sum of ExpTerms, evaluated as 0 below domain_lo.
//
// Closed under addition, scaling, differentiation, antidifferentiation,
// argument shift, exponential tilt and convolution on [0, x]. Terms whose
// rates agree within kRateMerge are merged (same power) and terms with
// |coef| below kPrune * max|coef| are dropped.
class ExpSum {
 public:
  static constexpr double kRateMerge = 1e-9;
  static constexpr double kPrune = 1e-14;

  ExpSum() = default;
  explicit ExpSum(std::vector<ExpTerm> terms, double domain_lo = 0.0)
      : terms_(std::move(terms)), lo_(domain_lo) {
    normalize();
  }

  static ExpSum constant(double v, double domain_lo = 0.0) {
    return ExpSum({{v, 0.0, 0}}, domain_lo);
  }

  std::span<const ExpTerm> terms() const { return terms_; }
  double domain_lo() const { return lo_; }
  bool empty() const { return terms_.empty(); }

  // Sum over terms, factoring out exp(max_j rate_j x) so that intermediate
  // exponentials stay bounded.
  double operator()(double x) const {
    if (x < lo_ || terms_.empty()) return 0.0;
    double shift = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms_) shift = std::max(shift, t.rate * x);
    double acc = 0.0;
    for (const auto& t : terms_) acc += t.coef * ipow(x, t.power) * std::exp(t.rate * x - shift);
    return acc * std::exp(shift);
  }

  ExpSum derivative(int order = 1) const {
    ExpSum out = *this;
    for (int k = 0; k < order; ++k) out = out.derivative_once();
    return out;
  }

  // F(x) = integral of f from domain_lo to x.
  ExpSum antiderivative() const {
    std::vector<ExpTerm> out;
    double at_lo = 0.0;
    for (const auto& t : terms_) {
      const auto prim = primitive(t);
      for (const auto& p : prim) at_lo += p.coef * ipow(lo_, p.power) * std::exp(p.rate * lo_);
      out.insert(out.end(), prim.begin(), prim.end());
    }
    out.push_back({-at_lo, 0.0, 0});
    return ExpSum(std::move(out), lo_);
  }

  // y -> f(y + a), with the domain moved accordingly.
  ExpSum shifted(double a) const {
    std::vector<ExpTerm> out;
    for (const auto& t : terms_) {
      const double scale = t.coef * std::exp(t.rate * a);
      for (int k = 0; k <= t.power; ++k)
        out.push_back({scale * binomial(t.power, k) * ipow(a, t.power - k), t.rate, k});
    }
    return ExpSum(std::move(out), lo_ - a);
  }

  // x -> exp(a x) f(x)
  ExpSum tilted(double a) const {
    auto out = terms_;
    for (auto& t : out) t.rate += a;
    return ExpSum(std::move(out), lo_);
  }

  ExpSum with_domain(double lo) const {
    ExpSum out = *this;
    out.lo_ = lo;
    return out;
  }

  // Sum of coefficients of terms with the given rate (within kRateMerge) and power.
  double coefficient(double rate, int power = 0) const {
    double c = 0.0;
    for (const auto& t : terms_)
      if (t.power == power && std::abs(t.rate - rate) < kRateMerge) c += t.coef;
    return c;
  }

  // Copy without the terms of the given rate (any power).
  ExpSum without_rate(double rate) const {
    std::vector<ExpTerm> out;
    for (const auto& t : terms_)
      if (std::abs(t.rate - rate) >= kRateMerge) out.push_back(t);
    return ExpSum(std::move(out), lo_);
  }

  ExpSum& operator+=(const ExpSum& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    lo_ = std::min(lo_, o.lo_);
    normalize();
    return *this;
  }
  ExpSum& operator*=(double s) {
    for (auto& t : terms_) t.coef *= s;
    normalize();
    return *this;
  }
  friend ExpSum operator+(ExpSum a, const ExpSum& b) { return a += b; }
  friend ExpSum operator-(ExpSum a, const ExpSum& b) { return a += b * -1.0; }
  friend ExpSum operator*(ExpSum a, double s) { return a *= s; }
  friend ExpSum operator*(double s, ExpSum a) { return a *= s; }

  // (f * g)(x) = integral_0^x f(x - t) g(t) dt for x >= 0, using the closed
  // forms of f and g on [0, x]. Pairs of rates within kRateMerge produce
  // polynomial-weighted terms instead of the generic 1/(r - s) form.
  friend ExpSum convolve(const ExpSum& f, const ExpSum& g) {
    std::vector<ExpTerm> out;
    for (const auto& a : f.terms_) {
      for (const auto& b : g.terms_) {
        const double s = a.rate;
        const double u = b.rate - s;
        const int p = a.power;
        for (int i = 0; i <= p; ++i) {
          const double base = a.coef * b.coef * binomial(p, i) * ((i % 2) ? -1.0 : 1.0);
          const int n = b.power + i;
          const int xp = p - i;
          if (std::abs(u) < kRateMerge) {
            out.push_back({base / (n + 1), s, xp + n + 1});
            continue;
          }
          // integral_0^x t^n e^{u t} dt
          double fact = 1.0;  // n! / (n - k)!
          double upow = u;    // u^{k+1}
          for (int k = 0; k <= n; ++k) {
            if (k > 0) {
              fact *= (n - k + 1);
              upow *= u;
            }
            out.push_back({base * ((k % 2) ? -1.0 : 1.0) * fact / upow, b.rate, xp + n - k});
          }
          out.push_back({-base * ((n % 2) ? -1.0 : 1.0) * fact / upow, s, xp});
        }
      }
    }
    return ExpSum(std::move(out), 0.0);
  }

 private:
  static double ipow(double x, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= x;
    return r;
  }

  static double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  }

  // Primitive of one term (no constant).
  static std::vector<ExpTerm> primitive(const ExpTerm& t) {
    std::vector<ExpTerm> out;
    if (std::abs(t.rate) < kRateMerge) {
      out.push_back({t.coef / (t.power + 1), 0.0, t.power + 1});
      return out;
    }
    const int n = t.power;
    double fact = 1.0;
    double rpow = t.rate;
    for (int k = 0; k <= n; ++k) {
      if (k > 0) {
        fact *= (n - k + 1);
        rpow *= t.rate;
      }
      out.push_back({t.coef * ((k % 2) ? -1.0 : 1.0) * fact / rpow, t.rate, n - k});
    }
    return out;
  }

  ExpSum derivative_once() const {
    std::vector<ExpTerm> out;
    for (const auto& t : terms_) {
      if (t.rate != 0.0) out.push_back({t.coef * t.rate, t.rate, t.power});
      if (t.power > 0) out.push_back({t.coef * t.power, t.rate, t.power - 1});
    }
    return ExpSum(std::move(out), lo_);
  }

  void normalize() {
    std::sort(terms_.begin(), terms_.end(), [](const ExpTerm& a, const ExpTerm& b) {
      return a.rate != b.rate ? a.rate > b.rate : a.power > b.power;
    });
    std::vector<ExpTerm> merged;
    for (const auto& t : terms_) {
      bool done = false;
      for (auto& m : merged) {
        if (m.power == t.power && std::abs(m.rate - t.rate) < kRateMerge) {
          m.coef += t.coef;
          done = true;
          break;
        }
      }
      if (!done) merged.push_back(t);
    }
    double biggest = 0.0;
    for (const auto& t : merged) biggest = std::max(biggest, std::abs(t.coef));
    terms_.clear();
    for (const auto& t : merged)
      if (t.coef != 0.0 && !(std::abs(t.coef) < kPrune * biggest)) terms_.push_back(t);
  }

  std::vector<ExpTerm> terms_;
  double lo_ = 0.0;
};

}  // namespace pdiv
