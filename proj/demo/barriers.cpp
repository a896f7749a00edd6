// Solves the base model for a few transaction costs and prints the optimal
// barriers with the value at a handful of surplus levels.

#include <cstdio>

#include "pdiv/barrier_solver.hpp"

int main() {
  const auto model = pdiv::base_model();
  const auto s = pdiv::build_scale_set(model, 1.0, 0.2);
  std::printf("%8s %10s %10s %10s %10s\n", "kappa", "b_l*", "b*", "b_u*", "V(1)");
  for (double kappa : {0.01, 0.1, 0.2, 0.5, 1.0, 2.0}) {
    const auto sol = pdiv::solve_optimal(s, kappa);
    const auto v = pdiv::value_bubl(s, sol.pair());
    std::printf("%8.3f %10.5f %10.5f %10.5f %10.5f%s\n", kappa, sol.b_l_star, sol.b_star, sol.b_u_star, v(1.0),
                sol.liquidation_flag ? "  (liquidation)" : "");
  }
}
