#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "vche/control.hpp"
#include "vche/forward.hpp"

namespace vche {

using Vec2 = std::array<double, kDim>;

/// Where a pointwise integrand is evaluated: time node `step` (t = step * dt)
/// and grid node `point` at (x, y).
struct CostNode {
  int step = 0;
  std::size_t point = 0;
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
};

/// J(u, h) = int_Q L(x, t, u, h) + int_Omega F(x, u(T)), given by nodewise evaluators.
///
/// In time, L is sampled at the left node of each control interval; in space
/// both integrands use the grid quadrature.
class CostFunctional {
 public:
  virtual ~CostFunctional() = default;

  virtual double L(const CostNode& at, Vec2 u, Vec2 h) const = 0;
  virtual Vec2 L_u(const CostNode& at, Vec2 u, Vec2 h) const = 0;
  virtual Vec2 L_h(const CostNode& at, Vec2 u, Vec2 h) const = 0;
  /// Second derivative of L in v = (u, h) applied to (z1, k1), (z2, k2).
  virtual double L_vv(const CostNode& at, Vec2 u, Vec2 h, Vec2 z1, Vec2 k1, Vec2 z2, Vec2 k2) const = 0;

  virtual double F(const CostNode& at, Vec2 u) const = 0;
  virtual Vec2 F_u(const CostNode& at, Vec2 u) const = 0;
  virtual double F_uu(const CostNode& at, Vec2 u, Vec2 z1, Vec2 z2) const = 0;

  virtual bool convex_in_h() const = 0;
  virtual bool convex_terminal() const = 0;
};

/// alpha_Q/2 |u - u_d|^2 + gamma/2 |h|^2 on Q and alpha_T/2 |u(T) - u_T|^2 on Omega.
class QuadraticTracking final : public CostFunctional {
 public:
  struct Weights {
    double alpha_Q = 1.0;
    double alpha_T = 1.0;
    double gamma = 1e-2;
  };

  /// `desired` holds u_d at the time nodes 0..N-1 (empty means u_d = 0);
  /// `terminal` is u_T (nullopt means 0). Throws InvalidArgument on negative weights.
  QuadraticTracking(Weights w, GridPtr grid, std::vector<PhysicalField> desired,
                    std::optional<PhysicalField> terminal);

  /// Zero tracking data.
  static std::shared_ptr<QuadraticTracking> zero_data(Weights w, const GridPtr& grid);
  /// u_d = the nodes of `target`, u_T = its terminal state.
  static std::shared_ptr<QuadraticTracking> track(Weights w, const StateTrajectory& target);

  const Weights& weights() const noexcept { return w_; }
  /// Same data, every weight multiplied by c > 0.
  std::shared_ptr<QuadraticTracking> scaled(double c) const;

  double L(const CostNode& at, Vec2 u, Vec2 h) const override;
  Vec2 L_u(const CostNode& at, Vec2 u, Vec2 h) const override;
  Vec2 L_h(const CostNode& at, Vec2 u, Vec2 h) const override;
  double L_vv(const CostNode& at, Vec2 u, Vec2 h, Vec2 z1, Vec2 k1, Vec2 z2, Vec2 k2) const override;
  double F(const CostNode& at, Vec2 u) const override;
  Vec2 F_u(const CostNode& at, Vec2 u) const override;
  double F_uu(const CostNode& at, Vec2 u, Vec2 z1, Vec2 z2) const override;
  bool convex_in_h() const override { return w_.gamma >= 0.0; }
  bool convex_terminal() const override { return w_.alpha_T >= 0.0; }

 private:
  Vec2 desired(const CostNode& at) const;
  Vec2 terminal(const CostNode& at) const;

  Weights w_;
  GridPtr grid_;
  std::shared_ptr<const std::vector<PhysicalField>> desired_;
  std::shared_ptr<const PhysicalField> terminal_;
};

/// Rectangle rule in time (left nodes 0..N-1), grid quadrature in space.
double eval_cost(const StateTrajectory& traj, const ControlField& h, const CostFunctional& cf);

}  // namespace vche
