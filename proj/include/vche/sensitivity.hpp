#pragma once

#include <cstdint>
#include <vector>

#include "vche/control.hpp"
#include "vche/forward.hpp"

namespace vche {

/// First or second variation of a state trajectory; z_0 = 0.
struct TangentTrajectory {
  ProblemConfig config;
  std::vector<SpectralField> snapshots;
  std::uint64_t reference_id = 0;

  int steps() const { return static_cast<int>(snapshots.size()) - 1; }
};

/// Exact linearization of the discrete forward scheme around `ref` in the
/// control direction `k`: z = S'(h) k.
TangentTrajectory solve_linearized(const StateTrajectory& ref, const ControlField& k);

/// Second variation w = S''(h)[k1, k2] from the tangents z1 = S'(h) k1 and
/// z2 = S'(h) k2; the source is -B~''(z1, z2) in the Adams-Bashforth pattern.
TangentTrajectory solve_second(const StateTrajectory& ref, const TangentTrajectory& z1,
                               const TangentTrajectory& z2);

/// Discrete L2(0,T; L2) norm of node values, trapezoidal rule in time.
double trajectory_norm(const std::vector<SpectralField>& v, double dt);

}  // namespace vche
