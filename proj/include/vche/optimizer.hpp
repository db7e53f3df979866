#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "vche/adjoint.hpp"
#include "vche/control.hpp"
#include "vche/errors.hpp"

namespace vche {

/// Pointwise box lower[c] <= h_c(x, t) <= upper[c]; infinite bounds allowed.
struct BoxConstraint {
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  std::array<double, kDim> lower{-kInf, -kInf};
  std::array<double, kDim> upper{kInf, kInf};

  static BoxConstraint unbounded() { return {}; }
  static BoxConstraint symmetric(double bound) { return {{-bound, -bound}, {bound, bound}}; }

  /// Throws InvalidArgument unless lower <= upper componentwise and no bound is NaN.
  void validate() const;
  bool contains(const ControlField& h) const;
};

/// Componentwise clamp onto the box.
ControlField project_control(const ControlField& h, const BoxConstraint& box);

/// |h - project(h - g)| in L2(Q); zero iff the discrete variational inequality holds.
double vi_residual(const ControlField& h, const ControlField& g, const BoxConstraint& box);

struct OptimizeOptions {
  double tol = 1e-6;
  int max_iter = 200;
  double sufficient_decrease = 1e-4;
  double backtrack = 0.5;
  double step_min = 1e-6;
  double step_max = 1e2;
  double initial_step = 1.0;
  int max_backtracks = 40;
};

struct IterateRecord {
  int iteration = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  double vi_residual = 0.0;
  double step = 0.0;  // accepted step length; 0 on the final record
  int backtracks = 0;
};

struct OptimizeReport {
  std::vector<IterateRecord> iterates;
  ControlField control;
  ControlField gradient;
  double cost = 0.0;
  double vi_residual = 0.0;
  int iterations = 0;  // accepted steps
  bool converged = false;
};

/// Thrown when backtracking cannot find sufficient decrease; carries the last iterate.
class LineSearchFailure : public LineSearchStalled {
 public:
  LineSearchFailure(const std::string& what, OptimizeReport report)
      : LineSearchStalled(what), report_(std::move(report)) {}
  const OptimizeReport& report() const noexcept { return report_; }

 private:
  OptimizeReport report_;
};

/// Projected gradient descent with Armijo backtracking along the projection arc
/// and Barzilai-Borwein initial steps. Stops when vi_residual <= tol or after
/// max_iter accepted steps. Throws InvalidArgument when h_init is infeasible.
OptimizeReport optimize(const ReducedProblem& problem, const ControlField& h_init, const BoxConstraint& box,
                        const OptimizeOptions& opts);

struct SscOptions {
  int samples = 100;
  /// Relative activity threshold: nodes at a bound with |g| > activity_tol * |g|_inf are strongly active.
  double activity_tol = 1e-6;
  std::uint64_t seed = 1;
  /// Worker threads for the independent tangent solves (>= 1).
  int threads = 1;
};

struct SscReport {
  std::vector<double> rayleigh_quotients;
  std::optional<double> mu_estimate;  // empty when no samples were drawn
  std::size_t free_nodes = 0;
  std::size_t frozen_nodes = 0;           // at a bound; directions vanish there
  std::size_t strongly_active_nodes = 0;  // frozen and |g| > activity_tol * |g|_inf
};

/// Samples Gaussian directions, restricts them to the discrete critical cone at
/// h_star (zero on nodes at a bound, orthogonal to g elsewhere) and returns
/// J''(h_star)[k, k] / |k|^2 per sample. Throws NoCriticalDirections when every
/// node sits at a bound.
SscReport ssc_probe(const ReducedProblem& problem, const ControlField& h_star, const BoxConstraint& box,
                    const SscOptions& opts);

}  // namespace vche
