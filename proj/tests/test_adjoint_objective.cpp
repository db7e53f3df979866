#include <doctest.h>

#include "support.hpp"
#include "vche/errors.hpp"

using namespace vche;
using namespace vche::test;

namespace {

struct Case {
  GridPtr grid = grid32();
  ProblemConfig cfg;
  SpectralField u0{grid};
  ControlField h{grid, 1, 1.0};
  StateTrajectory target;
  std::shared_ptr<QuadraticTracking> cost;
  StateTrajectory ref;
};

// Random state and control, tracking a trajectory driven by another random control.
Case make_case(std::uint64_t seed, double t_final, QuadraticTracking::Weights w = {}) {
  Case c;
  c.cfg.t_final = t_final;
  std::mt19937_64 rng(seed);
  c.u0 = random_field(c.grid, rng, 1.0, 1.5);
  c.h = random_control(c.grid, c.cfg, rng, 0.3);
  c.target = solve_state(random_field(c.grid, rng, 1.0, 1.5), random_control(c.grid, c.cfg, rng, 0.3), c.cfg);
  c.cost = QuadraticTracking::track(w, c.target);
  c.ref = solve_state(c.u0, c.h, c.cfg);
  return c;
}

ControlField unit_direction(const Case& c, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  ControlField k = random_control(c.grid, c.cfg, rng);
  k *= scale / norm(k);
  return k;
}

double cost_at(const Case& c, const ControlField& h) { return eval_cost(solve_state(c.u0, h, c.cfg), h, *c.cost); }

}  // namespace

TEST_CASE("tracking cost: exact data gives zero, terminal-only value") {
  const Case c = make_case(1, 0.1);
  const ControlField zero(c.grid, c.cfg.steps(), c.cfg.dt);
  const StateTrajectory s = solve_state(c.u0, zero, c.cfg);
  CHECK(eval_cost(s, zero, *QuadraticTracking::track({}, s)) == 0.0);

  const StreamMode m[] = {{1, 1, 0.7, 0.0}};
  const SpectralField uT = from_stream_modes(c.grid, m);
  const QuadraticTracking::Weights w{1.0, 2.5, 1e-2};
  const QuadraticTracking terminal_only(w, c.grid, {}, to_physical(uT));
  const StateTrajectory rest = solve_state(SpectralField(c.grid), zero, c.cfg);
  CHECK(rel(eval_cost(rest, zero, terminal_only), 0.5 * w.alpha_T * inner(uT, uT)) <= 1e-13);
  CHECK_THROWS_AS(QuadraticTracking({-1.0, 1.0, 1.0}, c.grid, {}, std::nullopt), InvalidArgument);
}

TEST_CASE("tracking cost matches refined-grid quadrature") {
  const QuadraticTracking::Weights w{0.8, 1.7, 0.03};
  const Case c = make_case(2, 0.1, w);
  const GridPtr fine = grid64();
  double state = 0.0;
  for (int n = 0; n < c.cfg.steps(); ++n) {
    const auto i = static_cast<std::size_t>(n);
    const SpectralField d = refine(c.ref.snapshots[i] - c.target.snapshots[i], fine);
    state += c.cfg.dt * 0.5 * w.alpha_Q * inner(to_physical(d), to_physical(d));
  }
  const SpectralField dT = refine(c.ref.terminal() - c.target.terminal(), fine);
  state += 0.5 * w.alpha_T * inner(to_physical(dT), to_physical(dT));
  // the control is nodal data; its quadrature is the rectangle rule on the nodes
  const double control = 0.5 * w.gamma * inner(c.h, c.h);
  CHECK(rel(eval_cost(c.ref, c.h, *c.cost), state + control) <= 1e-9);
}

TEST_CASE("adjoint vanishes without tracking data and is terminal-only when alpha_Q = 0") {
  const GridPtr g = grid32();
  ProblemConfig cfg;
  cfg.t_final = 0.1;
  const ControlField zero(g, cfg.steps(), cfg.dt);
  const auto cf = QuadraticTracking::zero_data({1.0, 1.0, 1.0}, g);
  const StateTrajectory rest = solve_state(SpectralField(g), zero, cfg);
  const AdjointTrajectory adj = solve_adjoint(rest, zero, *cf);
  for (const auto& l : adj.snapshots) CHECK(norms(l).l2 == 0.0);

  const Case c = make_case(3, 0.1, {0.0, 1.3, 1e-2});
  const AdjointTrajectory a = solve_adjoint(c.ref, c.h, *c.cost);
  const SpectralField expect = 1.3 * solve_helmholtz(leray_project(c.ref.terminal() - c.target.terminal()), 0.5);
  CHECK(norms(a.snapshots.back() - expect).l2 <= 1e-13 * norms(expect).l2);
  CHECK(terminal_residual(a, c.ref, *c.cost) <= 1e-13);
}

TEST_CASE("gradient with gamma = 1 and no data is the control itself") {
  const GridPtr g = grid32();
  ProblemConfig cfg;
  cfg.t_final = 0.1;
  std::mt19937_64 rng(4);
  const ControlField h = random_control(g, cfg, rng);
  const ReducedProblem p(cfg, SpectralField(g), QuadraticTracking::zero_data({0.0, 0.0, 1.0}, g));
  const ControlField gr = p.gradient(p.evaluate(h), h);
  CHECK(norm(gr - h) <= 1e-15 * norm(h));
}

TEST_CASE("gradient and tangent duality for 10 directions") {
  const Case c = make_case(5, 0.5);
  const ControlField g = reduced_gradient(c.ref, c.h, *c.cost);
  for (std::uint64_t i = 0; i < 10; ++i) {
    const ControlField k = unit_direction(c, 100 + i);
    CHECK(rel(inner(g, k), directional_derivative(c.ref, c.h, *c.cost, k)) <= 1e-8);
  }
}

TEST_CASE("gradient matches central differences at the best delta of a sweep") {
  const Case c = make_case(6, 0.5);
  const ControlField g = reduced_gradient(c.ref, c.h, *c.cost);
  for (std::uint64_t i = 0; i < 10; ++i) {
    const ControlField k = unit_direction(c, 200 + i);
    const double gk = inner(g, k);
    double best = 1.0;
    for (double d : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
      best = std::min(best, rel((cost_at(c, c.h + d * k) - cost_at(c, c.h - d * k)) / (2.0 * d), gk));
    }
    CHECK(best <= 1e-6);
  }
}

TEST_CASE("gradient scales with the cost") {
  const Case c = make_case(7, 0.1);
  const ControlField g = reduced_gradient(c.ref, c.h, *c.cost);
  const ControlField g2 = reduced_gradient(c.ref, c.h, *c.cost->scaled(2.0));
  CHECK(norm(g2 - 2.0 * g) <= 1e-14 * norm(g2));
}

TEST_CASE("Hessian form: symmetry and second differences") {
  const Case c = make_case(8, 0.5);
  const AdjointTrajectory adj = solve_adjoint(c.ref, c.h, *c.cost);
  const ControlField k1 = unit_direction(c, 300, 5.0), k2 = unit_direction(c, 301, 5.0);
  CHECK(rel(hessian_quadratic_form(c.ref, adj, c.h, *c.cost, k1, k2),
            hessian_quadratic_form(c.ref, adj, c.h, *c.cost, k2, k1)) <= 1e-9);
  const double j0 = eval_cost(c.ref, c.h, *c.cost);
  for (std::uint64_t i = 0; i < 5; ++i) {
    const ControlField k = unit_direction(c, 310 + i, 5.0);
    const double q = hessian_quadratic_form(c.ref, adj, c.h, *c.cost, k, k);
    double best = 1.0;
    for (double d : {1e-1, 1e-2, 1e-3}) {
      best = std::min(best, rel((cost_at(c, c.h + d * k) - 2.0 * j0 + cost_at(c, c.h - d * k)) / (d * d), q));
    }
    CHECK(best <= 1e-4);
  }
}

TEST_CASE("Hessian form with vanishing adjoint is the sum of the positive terms") {
  const GridPtr g = grid32();
  ProblemConfig cfg;
  cfg.t_final = 0.2;
  const QuadraticTracking::Weights w{0.7, 1.9, 0.4};
  const auto cf = QuadraticTracking::zero_data(w, g);
  const ControlField zero(g, cfg.steps(), cfg.dt);
  const StateTrajectory rest = solve_state(SpectralField(g), zero, cfg);
  std::mt19937_64 rng(9);
  const ControlField k = random_control(g, cfg, rng);
  const TangentTrajectory z = solve_linearized(rest, k);
  double expect = w.gamma * inner(k, k) + w.alpha_T * inner(z.snapshots.back(), z.snapshots.back());
  for (int n = 0; n < cfg.steps(); ++n) {
    const auto& zn = z.snapshots[static_cast<std::size_t>(n)];
    expect += w.alpha_Q * cfg.dt * inner(zn, zn);
  }
  const double q = hessian_quadratic_form(rest, zero, *cf, k, k);
  CHECK(rel(q, expect) <= 1e-12);
  CHECK(q >= w.gamma * inner(k, k));
}

TEST_CASE("curvature display equals one half of the Hessian form") {
  // 1/2 (cost curvature) - sum_n dt b~(z, z + a^2 A z, lambda), with the
  // same Adams-Bashforth weights that the state scheme applies to convection
  const Case c = make_case(10, 0.3);
  const double alpha = c.cfg.params.alpha;
  const auto& w = c.cost->weights();
  const AdjointTrajectory adj = solve_adjoint(c.ref, c.h, *c.cost);
  const ControlField k = unit_direction(c, 400, 5.0);
  const TangentTrajectory z = solve_linearized(c.ref, k);
  double cost_part = w.gamma * inner(k, k) + w.alpha_T * inner(z.snapshots.back(), z.snapshots.back());
  double mixed = 0.0;
  for (int n = 0; n < c.cfg.steps(); ++n) {
    const auto i = static_cast<std::size_t>(n);
    cost_part += w.alpha_Q * c.cfg.dt * inner(z.snapshots[i], z.snapshots[i]);
    if (n == 0) continue;
    const auto& zc = z.snapshots[i];
    const auto& zp = z.snapshots[i - 1];
    mixed += c.cfg.dt * (1.5 * trilinear_btilde(zc, apply_helmholtz(zc, alpha), adj.snapshots[i]) -
                         0.5 * trilinear_btilde(zp, apply_helmholtz(zp, alpha), adj.snapshots[i]));
  }
  const double display = 0.5 * cost_part - mixed;
  CHECK(rel(display, 0.5 * hessian_quadratic_form(c.ref, adj, c.h, *c.cost, k, k)) <= 1e-10);
}

TEST_CASE("coercivity margin for weak tracking data") {
  QuadraticTracking::Weights w{1e-2, 1e-2, 1.0};
  const Case c = make_case(11, 0.3, w);
  const AdjointTrajectory adj = solve_adjoint(c.ref, c.h, *c.cost);
  double worst = std::numeric_limits<double>::infinity();
  for (std::uint64_t i = 0; i < 5; ++i) {
    const ControlField k = unit_direction(c, 500 + i, 1.0);
    worst = std::min(worst, hessian_quadratic_form(c.ref, adj, c.h, *c.cost, k, k));
  }
  MESSAGE("min Q(k,k)/|k|^2 = " << worst << ", margin against gamma " << w.gamma - worst);
  CHECK(worst >= 0.9 * w.gamma);
}

TEST_CASE("broken coupling hook is visible in the gradient") {
  const Case c = make_case(12, 0.3);
  const ControlField good = reduced_gradient(c.ref, c.h, *c.cost);
  const ControlField bad = reduced_gradient(c.ref, c.h, *c.cost, AdjointOptions{true});
  CHECK(norm(bad - good) > 1e-6 * norm(good));
}
