#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>

namespace pdiv::numerics {

struct Bracket {
  double lo;
  double hi;
};

// Bisection on [lo, hi] where f(lo) and f(hi) have opposite (strict) signs.
// Only the signs at the ends are used, so the ends may be poles of f.
// Runs until the midpoint coincides with an end (machine-adjacent bracket).
template <class F>
Bracket bisect(F&& f, double lo, double hi, bool negative_at_lo) {
  for (int it = 0; it < 2000; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return {mid, mid};
    if ((fm < 0.0) == negative_at_lo)
      lo = mid;
    else
      hi = mid;
  }
  return {lo, hi};
}

// Picks whichever end of a converged bracket has the smaller |f|.
template <class F>
double best_end(F&& f, Bracket b) {
  if (b.lo == b.hi) return b.lo;
  return std::abs(f(b.lo)) <= std::abs(f(b.hi)) ? b.lo : b.hi;
}

// Maximizes a unimodal f on [a, b] by golden-section search.
template <class F>
double golden_max(F&& f, double a, double b, double tol = 1e-10) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol * (1.0 + std::abs(a) + std::abs(b))) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? x1 : x2;
}

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct MeanStderr {
  double mean;
  double stderr_;
};

inline MeanStderr mean_and_stderr(std::span<const double> xs) {
  const auto n = static_cast<double>(xs.size());
  if (xs.empty()) return {0.0, 0.0};
  CompensatedSum s;
  for (double v : xs) s.add(v);
  const double mean = s.value() / n;
  if (xs.size() < 2) return {mean, 0.0};
  CompensatedSum ss;
  for (double v : xs) ss.add((v - mean) * (v - mean));
  return {mean, std::sqrt(ss.value() / (n - 1.0) / n)};
}

}  // namespace pdiv::numerics
