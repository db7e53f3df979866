#include <doctest.h>

#include "support.hpp"
#include "vche/errors.hpp"
#include "vche/optimizer.hpp"

using namespace vche;
using namespace vche::test;

namespace {

ControlField ramp(const GridPtr& g, const ProblemConfig& cfg, double slope) {
  ControlField h(g, cfg.steps(), cfg.dt);
  auto v = h.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = slope * (static_cast<double>(i % 97) - 48.0);
  return h;
}

OptimizeOptions tight(double tol) {
  OptimizeOptions o;
  o.tol = tol;
  o.max_iter = 300;
  return o;
}

}  // namespace

TEST_CASE("box validation and projection basics") {
  BoxConstraint bad;
  bad.lower = {1.0, 0.0};
  bad.upper = {0.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);

  const GridPtr g = grid32();
  ProblemConfig cfg;
  cfg.t_final = 0.01;
  const BoxConstraint box = BoxConstraint::symmetric(1.0);
  std::mt19937_64 rng(1);
  ControlField inside = random_control(g, cfg, rng, 0.2);
  for (double& x : inside.values()) x = std::clamp(x, -0.99, 0.99);
  CHECK(norm(project_control(inside, box) - inside) == 0.0);
  const ControlField sat = project_control(ramp(g, cfg, 1e3), box);
  for (double x : sat.values()) CHECK((x == 1.0 || x == -1.0 || x == 0.0));
  CHECK(box.contains(sat));
  CHECK(norm(project_control(inside, BoxConstraint::unbounded()) - inside) == 0.0);
}

TEST_CASE("projection is non-expansive over 20 random pairs") {
  const GridPtr g = grid32();
  ProblemConfig cfg;
  cfg.t_final = 0.01;
  BoxConstraint box;
  box.lower = {-0.5, -0.2};
  box.upper = {0.3, 0.8};
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const ControlField a = random_control(g, cfg, rng), b = random_control(g, cfg, rng);
    CHECK(norm(project_control(a, box) - project_control(b, box)) <= norm(a - b));
  }
}

TEST_CASE("variational inequality residual") {
  const GridPtr g = grid32();
  ProblemConfig cfg;
  cfg.t_final = 0.01;
  std::mt19937_64 rng(3);
  const ControlField h = random_control(g, cfg, rng);
  CHECK(vi_residual(h, ControlField(g, cfg.steps(), cfg.dt), BoxConstraint::unbounded()) == 0.0);

  const BoxConstraint box = BoxConstraint::symmetric(1.0);
  ControlField at_lower(g, cfg.steps(), cfg.dt), pos(g, cfg.steps(), cfg.dt);
  for (double& x : at_lower.values()) x = -1.0;
  for (double& x : pos.values()) x = std::abs(std::normal_distribution<double>()(rng)) + 0.1;
  CHECK(vi_residual(at_lower, pos, box) == 0.0);

  // sampled-direction oracle: the VI holds exactly when no feasible v gives <g, v - h> < 0
  auto sampled_descent = [&](const ControlField& hh, const ControlField& gg) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double most = 0.0;
    for (int s = 0; s < 200; ++s) {
      ControlField v(g, cfg.steps(), cfg.dt);
      for (double& x : v.values()) x = u(rng);
      most = std::min(most, inner(gg, v - hh));
    }
    // nodewise minimizer of the linear functional over the box
    ControlField corner(g, cfg.steps(), cfg.dt);
    for (std::size_t i = 0; i < corner.values().size(); ++i) corner.values()[i] = gg.values()[i] > 0.0 ? -1.0 : 1.0;
    return std::min(most, inner(gg, corner - hh));
  };
  for (int trial = 0; trial < 5; ++trial) {
    // random pair: the VI fails, and the oracle finds a descent direction
    ControlField hh = random_control(g, cfg, rng, 0.3);
    for (double& x : hh.values()) x = std::clamp(x, -1.0, 1.0);
    const ControlField gg = random_control(g, cfg, rng);
    CHECK(vi_residual(hh, gg, box) > 0.0);
    CHECK(sampled_descent(hh, gg) < 0.0);
    // stationary pair: h at the bound that g pushes towards, g = 0 elsewhere
    ControlField hs(g, cfg.steps(), cfg.dt), gs(g, cfg.steps(), cfg.dt);
    std::normal_distribution<double> nd;
    for (std::size_t i = 0; i < hs.values().size(); ++i) {
      const double r = nd(rng);
      if (i % 3 == 0) {
        hs.values()[i] = 0.5 * std::tanh(r);
      } else {
        gs.values()[i] = r;
        hs.values()[i] = r > 0.0 ? -1.0 : 1.0;
      }
    }
    CHECK(vi_residual(hs, gs, box) == 0.0);
    CHECK(sampled_descent(hs, gs) >= -1e-12);
  }
}

TEST_CASE("zero control is optimal when the data is the uncontrolled state") {
  const GridPtr g = grid32();
  ProblemConfig cfg;
  cfg.t_final = 0.1;
  const SpectralField u0 = reference_u0(g);
  const ControlField zero(g, cfg.steps(), cfg.dt);
  const ReducedProblem p(cfg, u0, QuadraticTracking::track({}, solve_state(u0, zero, cfg)));
  const OptimizeReport rep = optimize(p, zero, BoxConstraint::unbounded(), OptimizeOptions{});
  CHECK(rep.converged);
  CHECK(rep.iterations == 0);
  CHECK(rep.cost == 0.0);
  CHECK(rep.vi_residual == 0.0);
}

TEST_CASE("reachable target: monotone descent to the requested residual") {
  const ReducedProblem p = tracking_problem(0.1, 1e-2);
  const BoxConstraint box = BoxConstraint::symmetric(0.8);
  const OptimizeReport rep = optimize(p, p.zero_control(), box, tight(1e-6));
  CHECK(rep.converged);
  CHECK(rep.vi_residual <= 1e-6);
  CHECK(rep.cost < rep.iterates.front().cost);
  for (std::size_t i = 1; i < rep.iterates.size(); ++i) CHECK(rep.iterates[i].cost <= rep.iterates[i - 1].cost);
  CHECK(norm(project_control(rep.control, box) - rep.control) == 0.0);
  CHECK_THROWS_AS(optimize(p, ramp(p.initial_state().grid_ptr(), p.config(), 1.0), box, tight(1e-6)), InvalidArgument);
}

TEST_CASE("Tikhonov dominance: optimal control shrinks as gamma grows") {
  double prev = std::numeric_limits<double>::infinity();
  double first = 0.0;
  for (double gamma : {1.0, 10.0, 100.0, 1000.0}) {
    const ReducedProblem p = tracking_problem(0.1, gamma);
    const OptimizeReport rep = optimize(p, p.zero_control(), BoxConstraint::unbounded(), tight(1e-8));
    CHECK(rep.converged);
    const double n = norm(rep.control);
    if (gamma == 1.0) first = n;
    CHECK(n < prev);
    prev = n;
  }
  CHECK(prev <= 2e-3 * first);
}

TEST_CASE("scaling the cost leaves the optimal control unchanged") {
  const ReducedProblem p1 = tracking_problem(0.1, 1e-1);
  const ReducedProblem p3 = tracking_problem(0.1, 1e-1, 3.0);
  const OptimizeReport a = optimize(p1, p1.zero_control(), BoxConstraint::unbounded(), tight(1e-9));
  const OptimizeReport b = optimize(p3, p3.zero_control(), BoxConstraint::unbounded(), tight(3e-9));
  CHECK(norm(a.control - b.control) <= 1e-6 * norm(a.control));
  CHECK(rel(b.cost, 3.0 * a.cost) <= 1e-9);
}

TEST_CASE("quadratic growth around the converged control") {
  const ReducedProblem p = tracking_problem(0.1, 1e-2);
  const BoxConstraint box = BoxConstraint::symmetric(0.8);
  const OptimizeReport rep = optimize(p, p.zero_control(), box, tight(1e-9));
  const SscReport ssc = ssc_probe(p, rep.control, box, SscOptions{10, 1e-6, 3, 1});
  REQUIRE(ssc.mu_estimate.has_value());
  CHECK(*ssc.mu_estimate > 0.0);
  std::mt19937_64 rng(4);
  double eps_est = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 20; ++i) {
    ControlField d = random_control(p.initial_state().grid_ptr(), p.config(), rng);
    d *= 0.1 / norm(d);
    const ControlField h = project_control(rep.control + d, box);
    const ControlField step = h - rep.control;
    eps_est = std::min(eps_est, (p.cost_at(h) - rep.cost) / inner(step, step));
  }
  MESSAGE("growth constant estimate " << eps_est << " against mu " << *ssc.mu_estimate);
  CHECK(eps_est > 0.0);
}

TEST_CASE("stalled line search reports the last iterate") {
  const ReducedProblem p = tracking_problem(0.1, 1e-2);
  OptimizeOptions o;
  o.initial_step = 1e2;
  o.max_backtracks = 0;
  try {
    optimize(p, p.zero_control(), BoxConstraint::unbounded(), o);
    FAIL("expected a stalled line search");
  } catch (const LineSearchFailure& e) {
    CHECK(e.report().iterates.size() >= 1);
    CHECK(e.report().iterations == 0);
  }
}

TEST_CASE("SSC probe: zero data, empty sample set, all nodes active") {
  const GridPtr g = grid32();
  ProblemConfig cfg;
  cfg.t_final = 0.05;
  const ReducedProblem p(cfg, SpectralField(g), QuadraticTracking::zero_data({1.0, 1.0, 1.0}, g));
  const ControlField zero = p.zero_control();
  const SscReport r = ssc_probe(p, zero, BoxConstraint::unbounded(), SscOptions{8, 1e-6, 1, 1});
  CHECK(r.rayleigh_quotients.size() == 8);
  for (double q : r.rayleigh_quotients) CHECK(q >= 1.0);
  const SscReport none = ssc_probe(p, zero, BoxConstraint::unbounded(), SscOptions{0, 1e-6, 1, 1});
  CHECK(none.rayleigh_quotients.empty());
  CHECK_FALSE(none.mu_estimate.has_value());
  CHECK_THROWS_AS(ssc_probe(p, zero, BoxConstraint::symmetric(0.0), SscOptions{4, 1e-6, 1, 1}), NoCriticalDirections);
}

TEST_CASE("SSC probe on a tracking problem: positive, seed-stable, thread-independent") {
  const ReducedProblem p = tracking_problem(0.1, 1e-2);
  const BoxConstraint box = BoxConstraint::symmetric(0.8);
  const OptimizeReport rep = optimize(p, p.zero_control(), box, tight(1e-8));
  const SscReport a = ssc_probe(p, rep.control, box, SscOptions{12, 1e-6, 1, 1});
  const SscReport b = ssc_probe(p, rep.control, box, SscOptions{12, 1e-6, 2, 1});
  const SscReport a3 = ssc_probe(p, rep.control, box, SscOptions{12, 1e-6, 1, 3});
  REQUIRE(a.mu_estimate.has_value());
  REQUIRE(b.mu_estimate.has_value());
  CHECK(*a.mu_estimate > 0.0);
  CHECK(std::abs(*a.mu_estimate - *b.mu_estimate) <= 0.2 * *a.mu_estimate);
  CHECK(a.rayleigh_quotients == a3.rayleigh_quotients);
  CHECK(a.free_nodes + a.frozen_nodes == rep.control.values().size());
  CHECK(a.strongly_active_nodes <= a.frozen_nodes);
}
