#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vche/control.hpp"
#include "vche/problem.hpp"
#include "vche/spectral_field.hpp"

namespace vche {

namespace detail {
struct LinearizationData;
}

/// Discrete state u_0..u_N of one forward solve.
struct StateTrajectory {
  ProblemConfig config;
  std::vector<SpectralField> snapshots;
  /// Unique per solve; tangent trajectories record the id of their reference.
  std::uint64_t id = 0;
  /// Pointwise data reused by the tangent, second-order and adjoint solvers.
  std::shared_ptr<const detail::LinearizationData> linearization;

  int steps() const { return static_cast<int>(snapshots.size()) - 1; }
  const SpectralField& terminal() const { return snapshots.back(); }
};

/// Integrates d/dt (u + a^2 A u) + nu A (u + a^2 A u) + B~(u, u + a^2 A u) = P h.
///
/// Crank-Nicolson on the linear term, Adams-Bashforth-2 on the convection term
/// (explicit Euler on the first step); the forcing uses the interval value h_n.
/// Throws NonFinite with the step index on blow-up, ConfigMismatch when u0 or h
/// live on another grid or time grid, InvalidArgument when u0 is not a valid field.
StateTrajectory solve_state(const SpectralField& u0, const ControlField& h,
                            const ProblemConfig& config);

/// Largest relative residual of the discrete momentum equation over all steps.
double momentum_residual(const StateTrajectory& traj, const ControlField& h);

/// Advisory message when dt exceeds the explicit convection heuristic
/// dt * max|u| * k_max <= 0.5 for the initial field; never fatal.
std::optional<std::string> cfl_advisory(const ProblemConfig& config, const SpectralField& u0);

/// Throws InvalidArgument unless `u` is divergence-free, mean-zero and dealiased
/// (relative tolerance 1e-10).
void require_valid_field(const SpectralField& u, const char* what);

/// Throws ConfigMismatch unless `h` matches the grid and time grid of `config`.
void require_control_matches(const ControlField& h, const ProblemConfig& config, const char* what);

}  // namespace vche
