#include "vche/cost.hpp"

#include "vche/errors.hpp"

namespace vche {

QuadraticTracking::QuadraticTracking(Weights w, GridPtr grid, std::vector<PhysicalField> desired,
                                     std::optional<PhysicalField> terminal)
    : w_(w), grid_(std::move(grid)) {
  if (!(w.alpha_Q >= 0.0) || !(w.alpha_T >= 0.0) || !(w.gamma >= 0.0)) {
    throw InvalidArgument("QuadraticTracking: weights must be >= 0");
  }
  for (const auto& f : desired) require_same_grid(*grid_, f.grid(), "QuadraticTracking");
  if (terminal) require_same_grid(*grid_, terminal->grid(), "QuadraticTracking");
  if (!desired.empty()) desired_ = std::make_shared<const std::vector<PhysicalField>>(std::move(desired));
  if (terminal) terminal_ = std::make_shared<const PhysicalField>(std::move(*terminal));
}

std::shared_ptr<QuadraticTracking> QuadraticTracking::zero_data(Weights w, const GridPtr& grid) {
  return std::make_shared<QuadraticTracking>(w, grid, std::vector<PhysicalField>{}, std::nullopt);
}

std::shared_ptr<QuadraticTracking> QuadraticTracking::track(Weights w, const StateTrajectory& target) {
  std::vector<PhysicalField> nodes;
  nodes.reserve(target.snapshots.size() - 1);
  for (int n = 0; n < target.steps(); ++n) nodes.push_back(to_physical(target.snapshots[static_cast<std::size_t>(n)]));
  return std::make_shared<QuadraticTracking>(w, target.snapshots.front().grid_ptr(), std::move(nodes),
                                             to_physical(target.terminal()));
}

std::shared_ptr<QuadraticTracking> QuadraticTracking::scaled(double c) const {
  if (!(c > 0.0)) throw InvalidArgument("QuadraticTracking::scaled: factor must be > 0");
  auto out = std::make_shared<QuadraticTracking>(*this);
  out->w_ = {c * w_.alpha_Q, c * w_.alpha_T, c * w_.gamma};
  return out;
}

Vec2 QuadraticTracking::desired(const CostNode& at) const {
  if (!desired_) return {0.0, 0.0};
  if (at.step < 0 || static_cast<std::size_t>(at.step) >= desired_->size()) {
    throw InvalidArgument("QuadraticTracking: desired state missing for time node");
  }
  const auto& f = (*desired_)[static_cast<std::size_t>(at.step)];
  return {f.comp(0)[at.point], f.comp(1)[at.point]};
}

Vec2 QuadraticTracking::terminal(const CostNode& at) const {
  if (!terminal_) return {0.0, 0.0};
  return {terminal_->comp(0)[at.point], terminal_->comp(1)[at.point]};
}

double QuadraticTracking::L(const CostNode& at, Vec2 u, Vec2 h) const {
  const Vec2 d = desired(at);
  const double e0 = u[0] - d[0], e1 = u[1] - d[1];
  return 0.5 * w_.alpha_Q * (e0 * e0 + e1 * e1) + 0.5 * w_.gamma * (h[0] * h[0] + h[1] * h[1]);
}

Vec2 QuadraticTracking::L_u(const CostNode& at, Vec2 u, Vec2) const {
  const Vec2 d = desired(at);
  return {w_.alpha_Q * (u[0] - d[0]), w_.alpha_Q * (u[1] - d[1])};
}

Vec2 QuadraticTracking::L_h(const CostNode&, Vec2, Vec2 h) const {
  return {w_.gamma * h[0], w_.gamma * h[1]};
}

double QuadraticTracking::L_vv(const CostNode&, Vec2, Vec2, Vec2 z1, Vec2 k1, Vec2 z2, Vec2 k2) const {
  return w_.alpha_Q * (z1[0] * z2[0] + z1[1] * z2[1]) + w_.gamma * (k1[0] * k2[0] + k1[1] * k2[1]);
}

double QuadraticTracking::F(const CostNode& at, Vec2 u) const {
  const Vec2 d = terminal(at);
  const double e0 = u[0] - d[0], e1 = u[1] - d[1];
  return 0.5 * w_.alpha_T * (e0 * e0 + e1 * e1);
}

Vec2 QuadraticTracking::F_u(const CostNode& at, Vec2 u) const {
  const Vec2 d = terminal(at);
  return {w_.alpha_T * (u[0] - d[0]), w_.alpha_T * (u[1] - d[1])};
}

double QuadraticTracking::F_uu(const CostNode&, Vec2, Vec2 z1, Vec2 z2) const {
  return w_.alpha_T * (z1[0] * z2[0] + z1[1] * z2[1]);
}

double eval_cost(const StateTrajectory& traj, const ControlField& h, const CostFunctional& cf) {
  const ProblemConfig& cfg = traj.config;
  require_control_matches(h, cfg, "eval_cost");
  const Grid& g = traj.snapshots.front().grid();
  double running = 0.0;
  for (int n = 0; n < traj.steps(); ++n) {
    const PhysicalField u = to_physical(traj.snapshots[static_cast<std::size_t>(n)]);
    const auto h0 = h.comp(n, 0);
    const auto h1 = h.comp(n, 1);
    double sum = 0.0;
    for (std::size_t p = 0; p < g.points(); ++p) {
      const CostNode at{n, p, cfg.time(n), g.x_coord(p), g.y_coord(p)};
      sum += cf.L(at, {u.comp(0)[p], u.comp(1)[p]}, {h0[p], h1[p]});
    }
    running += cfg.dt * g.cell_area() * sum;
  }
  const PhysicalField uT = to_physical(traj.terminal());
  double terminal = 0.0;
  for (std::size_t p = 0; p < g.points(); ++p) {
    const CostNode at{traj.steps(), p, cfg.t_final, g.x_coord(p), g.y_coord(p)};
    terminal += cf.F(at, {uT.comp(0)[p], uT.comp(1)[p]});
  }
  return running + g.cell_area() * terminal;
}

}  // namespace vche
