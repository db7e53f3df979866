#pragma once

#include "vche/grid.hpp"
#include "vche/operators.hpp"

namespace vche {

/// Model parameters, grid and uniform time grid of one state problem.
struct ProblemConfig {
  OperatorParams params;
  GridSpec grid;
  double t_final = 0.5;
  double dt = 1e-3;

  /// round(t_final / dt)
  int steps() const;
  double time(int node) const { return node * dt; }

  /// Throws InvalidArgument on bad ranges or when dt does not divide t_final
  /// (|steps*dt - t_final| > 1e-12 * max(1, t_final)).
  void validate() const;

  friend bool operator==(const ProblemConfig& a, const ProblemConfig& b) {
    return a.params.alpha == b.params.alpha && a.params.nu == b.params.nu && a.grid == b.grid &&
           a.t_final == b.t_final && a.dt == b.dt;
  }
};

}  // namespace vche
