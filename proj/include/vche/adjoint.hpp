#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "vche/control.hpp"
#include "vche/cost.hpp"
#include "vche/forward.hpp"
#include "vche/sensitivity.hpp"

namespace vche {

/// Adjoint state at the time nodes 0..N.
///
/// Nodes 0..N-1 hold the discrete multiplier of the control interval that
/// starts there, so that the reduced gradient is L_h + lambda_n exactly. Node N
/// holds the terminal value (I + a^2 A)^{-1} P F_u(u_N).
struct AdjointTrajectory {
  ProblemConfig config;
  std::vector<SpectralField> snapshots;
  std::uint64_t reference_id = 0;

  int steps() const { return static_cast<int>(snapshots.size()) - 1; }
};

struct AdjointOptions {
  /// Flips the sign of the convection coupling. Only for checking that the
  /// verification harness catches a broken adjoint.
  bool negate_coupling = false;
};

/// Backward sweep that is the exact transpose of the forward/tangent scheme in
/// the discrete L2 pairings.
AdjointTrajectory solve_adjoint(const StateTrajectory& ref, const ControlField& h,
                                const CostFunctional& cf, const AdjointOptions& opts = {});

/// |(I + a^2 A) lambda_N - P F_u(u_N)| relative to |P F_u(u_N)| (absolute when that vanishes).
double terminal_residual(const AdjointTrajectory& adj, const StateTrajectory& ref, const CostFunctional& cf);

/// g_n = L_h(u_n, h_n) + lambda_n on the grid nodes of each interval.
ControlField reduced_gradient(const StateTrajectory& ref, const AdjointTrajectory& adj,
                              const ControlField& h, const CostFunctional& cf);
ControlField reduced_gradient(const StateTrajectory& ref, const ControlField& h, const CostFunctional& cf,
                              const AdjointOptions& opts = {});

/// J_u z + J_h k with z = S'(h) k, evaluated from a tangent solve.
double directional_derivative(const StateTrajectory& ref, const ControlField& h, const CostFunctional& cf,
                              const ControlField& k);

/// Reduced second derivative J''(h)[k1, k2]: the cost curvature along the
/// tangents minus the lambda pairing of the convection curvature.
double hessian_quadratic_form(const StateTrajectory& ref, const AdjointTrajectory& adj, const ControlField& h,
                              const CostFunctional& cf, const ControlField& k1, const TangentTrajectory& z1,
                              const ControlField& k2, const TangentTrajectory& z2);
double hessian_quadratic_form(const StateTrajectory& ref, const AdjointTrajectory& adj, const ControlField& h,
                              const CostFunctional& cf, const ControlField& k1, const ControlField& k2);
double hessian_quadratic_form(const StateTrajectory& ref, const ControlField& h, const CostFunctional& cf,
                              const ControlField& k1, const ControlField& k2);

/// The reduced problem h -> J(S(h), h) for fixed initial data.
class ReducedProblem {
 public:
  ReducedProblem(ProblemConfig config, SpectralField u0, std::shared_ptr<const CostFunctional> cost,
                 AdjointOptions adjoint = {});

  const ProblemConfig& config() const noexcept { return config_; }
  const SpectralField& initial_state() const noexcept { return u0_; }
  const CostFunctional& cost() const noexcept { return *cost_; }
  const std::shared_ptr<const CostFunctional>& cost_ptr() const noexcept { return cost_; }
  const AdjointOptions& adjoint_options() const noexcept { return adjoint_; }

  ControlField zero_control() const;

  struct Evaluation {
    StateTrajectory state;
    double cost = 0.0;
  };
  Evaluation evaluate(const ControlField& h) const;
  double cost_at(const ControlField& h) const { return evaluate(h).cost; }
  ControlField gradient(const Evaluation& at, const ControlField& h) const;
  AdjointTrajectory adjoint(const Evaluation& at, const ControlField& h) const;

  /// Same cost and time grid, another initial state.
  ReducedProblem with_initial_state(const SpectralField& u0) const;

 private:
  ProblemConfig config_;
  SpectralField u0_;
  std::shared_ptr<const CostFunctional> cost_;
  AdjointOptions adjoint_;
};

}  // namespace vche
