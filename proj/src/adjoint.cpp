#include "vche/adjoint.hpp"

#include <cmath>

#include "kernels.hpp"
#include "vche/errors.hpp"
#include "vche/operators.hpp"

namespace vche {

namespace {

CostNode node_at(const Grid& g, const ProblemConfig& cfg, int n, std::size_t p) {
  return {n, p, cfg.time(n), g.x_coord(p), g.y_coord(p)};
}

// Pi_K P of the grid field returned by `eval(at, u, h)` at time node n.
template <class Eval>
SpectralField projected_derivative(const StateTrajectory& ref, const ControlField* h, int n, Eval eval) {
  const GridPtr& grid = ref.snapshots.front().grid_ptr();
  const Grid& g = *grid;
  const PhysicalField u = to_physical(ref.snapshots[static_cast<std::size_t>(n)]);
  PhysicalField v(grid);
  for (std::size_t p = 0; p < g.points(); ++p) {
    const Vec2 hp = h ? Vec2{h->comp(n, 0)[p], h->comp(n, 1)[p]} : Vec2{0.0, 0.0};
    const Vec2 r = eval(node_at(g, ref.config, n, p), Vec2{u.comp(0)[p], u.comp(1)[p]}, hp);
    v.comp(0)[p] = r[0];
    v.comp(1)[p] = r[1];
  }
  return detail::project_grid_vector(grid, v.comp(0), v.comp(1));
}

SpectralField terminal_source(const StateTrajectory& ref, const CostFunctional& cf) {
  return projected_derivative(ref, nullptr, ref.steps(),
                              [&](const CostNode& at, Vec2 u, Vec2) { return cf.F_u(at, u); });
}

void require_same_reference(const StateTrajectory& ref, const AdjointTrajectory& adj, const char* what) {
  if (adj.reference_id != ref.id) throw ConfigMismatch(std::string(what) + ": adjoint belongs to another trajectory");
}

}  // namespace

AdjointTrajectory solve_adjoint(const StateTrajectory& ref, const ControlField& h, const CostFunctional& cf,
                                const AdjointOptions& opts) {
  require_control_matches(h, ref.config, "solve_adjoint");
  if (!ref.linearization) throw InvalidArgument("solve_adjoint: reference trajectory carries no linearization data");
  const ProblemConfig& cfg = ref.config;
  const double alpha = cfg.params.alpha;
  const double dt = cfg.dt;
  const GridPtr& grid = ref.snapshots.front().grid_ptr();
  const Grid& g = *grid;
  const auto cn = detail::cn_factors(g, cfg.params.nu, alpha, dt);
  const int steps = ref.steps();
  const double sign = opts.negate_coupling ? -1.0 : 1.0;

  // mu_{m+1} multiplies the step m -> m+1; lambda_m = d mu_{m+1} / dt
  auto lambda_from = [&](const SpectralField& mu) {
    SpectralField lam = mu;
    for (int c = 0; c < kDim; ++c) {
      auto a = lam.comp(c);
      for (std::size_t m = 0; m < g.modes(); ++m) a[m] *= cn.d[m] / dt;
    }
    return lam;
  };

  AdjointTrajectory adj{cfg, std::vector<SpectralField>(static_cast<std::size_t>(steps) + 1, SpectralField(grid)),
                        ref.id};
  SpectralField mu = terminal_source(ref, cf);
  adj.snapshots[static_cast<std::size_t>(steps)] = solve_helmholtz(mu, alpha);
  adj.snapshots[static_cast<std::size_t>(steps) - 1] = lambda_from(mu);

  for (int m = steps - 1; m >= 1; --m) {
    const auto i = static_cast<std::size_t>(m);
    SpectralField arg = 1.5 * adj.snapshots[i];
    if (m + 1 <= steps - 1) arg.axpy(-0.5, adj.snapshots[i + 1]);
    const SpectralField coupling = detail::convection_adjoint(ref.linearization->nodes[i], arg, alpha);
    const SpectralField lu = projected_derivative(
        ref, &h, m, [&](const CostNode& at, Vec2 u, Vec2 hp) { return cf.L_u(at, u, hp); });
    for (int c = 0; c < kDim; ++c) {
      auto a = mu.comp(c);
      auto l = lu.comp(c);
      auto b = coupling.comp(c);
      for (std::size_t k = 0; k < g.modes(); ++k) a[k] = cn.c[k] * a[k] + dt * l[k] - sign * dt * b[k];
    }
    if (!mu.all_finite()) throw NonFinite("solve_adjoint: non-finite adjoint", i);
    adj.snapshots[i - 1] = lambda_from(mu);
  }
  return adj;
}

double terminal_residual(const AdjointTrajectory& adj, const StateTrajectory& ref, const CostFunctional& cf) {
  require_same_reference(ref, adj, "terminal_residual");
  const SpectralField src = terminal_source(ref, cf);
  const SpectralField res = apply_helmholtz(adj.snapshots.back(), ref.config.params.alpha) - src;
  const double scale = std::sqrt(inner(src, src));
  const double r = std::sqrt(inner(res, res));
  return scale > 0.0 ? r / scale : r;
}

ControlField reduced_gradient(const StateTrajectory& ref, const AdjointTrajectory& adj, const ControlField& h,
                              const CostFunctional& cf) {
  require_same_reference(ref, adj, "reduced_gradient");
  require_control_matches(h, ref.config, "reduced_gradient");
  const Grid& g = h.grid();
  ControlField grad(h.grid_ptr(), h.intervals(), h.dt());
  std::vector<double> l0(g.points()), l1(g.points());
  for (int n = 0; n < h.intervals(); ++n) {
    const auto i = static_cast<std::size_t>(n);
    const PhysicalField u = to_physical(ref.snapshots[i]);
    g.inverse(adj.snapshots[i].comp(0), l0);
    g.inverse(adj.snapshots[i].comp(1), l1);
    auto g0 = grad.comp(n, 0);
    auto g1 = grad.comp(n, 1);
    const auto h0 = h.comp(n, 0);
    const auto h1 = h.comp(n, 1);
    for (std::size_t p = 0; p < g.points(); ++p) {
      const Vec2 lh = cf.L_h(node_at(g, ref.config, n, p), {u.comp(0)[p], u.comp(1)[p]}, {h0[p], h1[p]});
      g0[p] = lh[0] + l0[p];
      g1[p] = lh[1] + l1[p];
    }
  }
  return grad;
}

ControlField reduced_gradient(const StateTrajectory& ref, const ControlField& h, const CostFunctional& cf,
                              const AdjointOptions& opts) {
  return reduced_gradient(ref, solve_adjoint(ref, h, cf, opts), h, cf);
}

double directional_derivative(const StateTrajectory& ref, const ControlField& h, const CostFunctional& cf,
                              const ControlField& k) {
  const TangentTrajectory z = solve_linearized(ref, k);
  const ProblemConfig& cfg = ref.config;
  const Grid& g = h.grid();
  double sum = 0.0;
  for (int n = 0; n < h.intervals(); ++n) {
    const auto i = static_cast<std::size_t>(n);
    const PhysicalField u = to_physical(ref.snapshots[i]);
    const PhysicalField zn = to_physical(z.snapshots[i]);
    double s = 0.0;
    for (std::size_t p = 0; p < g.points(); ++p) {
      const CostNode at = node_at(g, cfg, n, p);
      const Vec2 up{u.comp(0)[p], u.comp(1)[p]};
      const Vec2 hp{h.comp(n, 0)[p], h.comp(n, 1)[p]};
      const Vec2 lu = cf.L_u(at, up, hp);
      const Vec2 lh = cf.L_h(at, up, hp);
      s += lu[0] * zn.comp(0)[p] + lu[1] * zn.comp(1)[p] + lh[0] * k.comp(n, 0)[p] + lh[1] * k.comp(n, 1)[p];
    }
    sum += cfg.dt * g.cell_area() * s;
  }
  const PhysicalField uT = to_physical(ref.terminal());
  const PhysicalField zT = to_physical(z.snapshots.back());
  double s = 0.0;
  for (std::size_t p = 0; p < g.points(); ++p) {
    const Vec2 fu = cf.F_u(node_at(g, cfg, ref.steps(), p), {uT.comp(0)[p], uT.comp(1)[p]});
    s += fu[0] * zT.comp(0)[p] + fu[1] * zT.comp(1)[p];
  }
  return sum + g.cell_area() * s;
}

double hessian_quadratic_form(const StateTrajectory& ref, const AdjointTrajectory& adj, const ControlField& h,
                              const CostFunctional& cf, const ControlField& k1, const TangentTrajectory& z1,
                              const ControlField& k2, const TangentTrajectory& z2) {
  require_same_reference(ref, adj, "hessian_quadratic_form");
  if (z1.reference_id != ref.id || z2.reference_id != ref.id) {
    throw ConfigMismatch("hessian_quadratic_form: tangents belong to another trajectory");
  }
  const ProblemConfig& cfg = ref.config;
  const double alpha = cfg.params.alpha;
  const Grid& g = h.grid();
  double cost_part = 0.0;
  double curvature = 0.0;
  SpectralField b_prev(h.grid_ptr());
  for (int n = 0; n < h.intervals(); ++n) {
    const auto i = static_cast<std::size_t>(n);
    const PhysicalField u = to_physical(ref.snapshots[i]);
    const PhysicalField a = to_physical(z1.snapshots[i]);
    const PhysicalField b = to_physical(z2.snapshots[i]);
    double s = 0.0;
    for (std::size_t p = 0; p < g.points(); ++p) {
      s += cf.L_vv(node_at(g, cfg, n, p), {u.comp(0)[p], u.comp(1)[p]}, {h.comp(n, 0)[p], h.comp(n, 1)[p]},
                   {a.comp(0)[p], a.comp(1)[p]}, {k1.comp(n, 0)[p], k1.comp(n, 1)[p]}, {b.comp(0)[p], b.comp(1)[p]},
                   {k2.comp(n, 0)[p], k2.comp(n, 1)[p]});
    }
    cost_part += cfg.dt * g.cell_area() * s;
    if (n == 0) continue;  // both tangents vanish at t = 0
    SpectralField b_cur = detail::convection_prime(detail::point_state(z1.snapshots[i], alpha), z2.snapshots[i], alpha);
    SpectralField mixed = 1.5 * b_cur;
    if (n >= 2) mixed.axpy(-0.5, b_prev);
    curvature += cfg.dt * inner(adj.snapshots[i], mixed);
    b_prev = std::move(b_cur);
  }
  const PhysicalField uT = to_physical(ref.terminal());
  const PhysicalField aT = to_physical(z1.snapshots.back());
  const PhysicalField bT = to_physical(z2.snapshots.back());
  double s = 0.0;
  for (std::size_t p = 0; p < g.points(); ++p) {
    s += cf.F_uu(node_at(g, cfg, ref.steps(), p), {uT.comp(0)[p], uT.comp(1)[p]}, {aT.comp(0)[p], aT.comp(1)[p]},
                 {bT.comp(0)[p], bT.comp(1)[p]});
  }
  return cost_part + g.cell_area() * s - curvature;
}

double hessian_quadratic_form(const StateTrajectory& ref, const AdjointTrajectory& adj, const ControlField& h,
                              const CostFunctional& cf, const ControlField& k1, const ControlField& k2) {
  const TangentTrajectory z1 = solve_linearized(ref, k1);
  if (&k1 == &k2) return hessian_quadratic_form(ref, adj, h, cf, k1, z1, k2, z1);
  return hessian_quadratic_form(ref, adj, h, cf, k1, z1, k2, solve_linearized(ref, k2));
}

double hessian_quadratic_form(const StateTrajectory& ref, const ControlField& h, const CostFunctional& cf,
                              const ControlField& k1, const ControlField& k2) {
  return hessian_quadratic_form(ref, solve_adjoint(ref, h, cf), h, cf, k1, k2);
}

ReducedProblem::ReducedProblem(ProblemConfig config, SpectralField u0, std::shared_ptr<const CostFunctional> cost,
                               AdjointOptions adjoint)
    : config_(config), u0_(std::move(u0)), cost_(std::move(cost)), adjoint_(adjoint) {
  config_.validate();
  if (!cost_) throw InvalidArgument("ReducedProblem: missing cost functional");
  if (!(u0_.grid().spec() == config_.grid)) throw ConfigMismatch("ReducedProblem: initial state grid mismatch");
  require_valid_field(u0_, "ReducedProblem");
}

ControlField ReducedProblem::zero_control() const {
  return ControlField(u0_.grid_ptr(), config_.steps(), config_.dt);
}

ReducedProblem::Evaluation ReducedProblem::evaluate(const ControlField& h) const {
  Evaluation e{solve_state(u0_, h, config_), 0.0};
  e.cost = eval_cost(e.state, h, *cost_);
  return e;
}

AdjointTrajectory ReducedProblem::adjoint(const Evaluation& at, const ControlField& h) const {
  return solve_adjoint(at.state, h, *cost_, adjoint_);
}

ControlField ReducedProblem::gradient(const Evaluation& at, const ControlField& h) const {
  return reduced_gradient(at.state, adjoint(at, h), h, *cost_);
}

ReducedProblem ReducedProblem::with_initial_state(const SpectralField& u0) const {
  return ReducedProblem(config_, u0, cost_, adjoint_);
}

}  // namespace vche
