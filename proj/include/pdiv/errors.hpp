#pragma once

#include <stdexcept>
#include <string>

namespace pdiv {

// Invalid model or run parameters (CLI exit code 2).
struct ModelError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A root solve or analytic identity failed a numeric check (CLI exit code 3).
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Monte Carlo failure, e.g. a NaN surplus (CLI exit code 4).
struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pdiv
