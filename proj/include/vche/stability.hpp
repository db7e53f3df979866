#pragma once

#include <array>
#include <optional>
#include <vector>

#include "vche/adjoint.hpp"
#include "vche/optimizer.hpp"

namespace vche {

/// Initial-data perturbations phi_eps = eps * phi.
struct PerturbationFamily {
  SpectralField phi;
  std::vector<double> epsilons;  // non-negative, non-increasing

  SpectralField member(double eps) const { return eps * phi; }
  /// Throws InvalidArgument unless phi is a valid field and the epsilons are
  /// finite, non-negative and non-increasing.
  void validate() const;
};

/// Smooth field built from the wavenumbers with |k| <= 2, unit L2 norm.
SpectralField default_perturbation_shape(const GridPtr& grid);

/// Default eps grid: 1e-1, 3e-2, ..., 1e-4.
std::vector<double> default_epsilons();

struct StateAdjointDeviation {
  double phi_norm = 0.0;
  double state_deviation = 0.0;    // max_n |u_n - u^eps_n|
  double adjoint_deviation = 0.0;  // max_n |lambda_n - lambda^eps_n|
  double initial_deviation = 0.0;  // |u_0 - u^eps_0|
  double state_ratio = 0.0;        // deviations divided by |phi_eps|; 0 when phi_eps = 0
  double adjoint_ratio = 0.0;
};

/// State and adjoint for a fixed control under initial data u0 and u0 + phi_eps.
StateAdjointDeviation state_adjoint_perturbation(const ReducedProblem& nominal, const ControlField& h,
                                                 const SpectralField& phi_eps);

/// optimize() for the initial state u0 + phi_eps, warm-started at h_init.
OptimizeReport solve_perturbed(const ReducedProblem& nominal, const SpectralField& phi_eps,
                               const ControlField& h_init, const BoxConstraint& box, const OptimizeOptions& opts);

struct StabilityOptions {
  /// Base options of the perturbed solves. Their tolerance is tightened to
  /// min(tol, 0.1 * eps * |phi| * mu) so that the optimizer error stays an
  /// order of magnitude below the measured control deviation.
  OptimizeOptions optimize;
  double ratio_band = 3.0;
  bool cold_start = false;
  int threads = 1;
};

struct StabilityRecord {
  double eps = 0.0;
  double phi_norm = 0.0;
  double control_deviation = 0.0;  // |h_eps - h| in L2(Q)
  double control_ratio = 0.0;
  StateAdjointDeviation state_adjoint;
  int iterations = 0;
  double tolerance = 0.0;
  double vi_residual = 0.0;
  double cost_at_nominal = 0.0;  // J_eps(h)
  double cost = 0.0;             // J_eps(h_eps)
  /// J''(h + theta d)[d, d] / |d|^2 for theta = 0, 1/2, 1 and d = h_eps - h.
  std::array<double, 3> curvature{};
  bool curvature_ok = true;
};

struct StabilityReport {
  std::vector<StabilityRecord> records;  // in family order
  double mu_estimate = 0.0;
  double control_band = 0.0;  // max/min of the control ratios over eps > 0
  double state_band = 0.0;
  double adjoint_band = 0.0;
  bool monotone_decay = true;         // |h_eps - h| strictly decreasing along eps > 0
  bool lipschitz_bounded = true;      // control_band <= ratio_band
  bool state_adjoint_bounded = true;  // both bands <= ratio_band
  bool curvature_persistent = true;   // curvature holds for every eps <= eps0 and eps0 exists
  std::optional<double> eps0;         // largest eps such that the curvature check passes for it and all smaller ones
  bool all_passed() const {
    return monotone_decay && lipschitz_bounded && state_adjoint_bounded && curvature_persistent;
  }
};

/// Runs the perturbed problems along the family (concurrently across eps) and
/// evaluates convergence, Lipschitz ratios, state/adjoint ratios and curvature
/// persistence. Throws NominalNotCertified unless `nominal` converged to
/// opts.optimize.tol and mu_estimate > 0.
StabilityReport stability_sweep(const PerturbationFamily& family, const ReducedProblem& problem,
                                const OptimizeReport& nominal, double mu_estimate, const BoxConstraint& box,
                                const StabilityOptions& opts);

}  // namespace vche
