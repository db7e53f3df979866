#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "support.hpp"
#include "vche/energy.hpp"
#include "vche/errors.hpp"
#include "vche/snapshot_io.hpp"

using namespace vche;
using namespace vche::test;

namespace {

ControlField zero_control(const GridPtr& g, const ProblemConfig& cfg) { return ControlField(g, cfg.steps(), cfg.dt); }

// |u_T(dt) - exact| / |exact| for the Taylor-Green field, whose convection vanishes
double taylor_green_error(double dt) {
  const GridPtr g = grid32();
  ProblemConfig cfg;
  cfg.dt = dt;
  const SpectralField u0 = taylor_green(g, 1.0);
  const StateTrajectory traj = solve_state(u0, zero_control(g, cfg), cfg);
  const SpectralField exact = std::exp(-cfg.params.nu * 2.0 * cfg.t_final) * u0;
  return norms(traj.terminal() - exact).l2 / norms(exact).l2;
}

SpectralField terminal_for(double dt, const SpectralField& u0) {
  const GridPtr g = u0.grid_ptr();
  ProblemConfig cfg;
  cfg.dt = dt;
  return solve_state(u0, kolmogorov(g, cfg, 1.0), cfg).terminal();
}

}  // namespace

TEST_CASE("zero data gives the zero trajectory") {
  const GridPtr g = grid32();
  ProblemConfig cfg;
  const StateTrajectory traj = solve_state(SpectralField(g), zero_control(g, cfg), cfg);
  CHECK(traj.steps() == 500);
  for (const auto& u : traj.snapshots) CHECK(norms(u).l2 == 0.0);
}

TEST_CASE("Taylor-Green field decays exactly at integrator order") {
  const GridPtr g = grid32();
  const SpectralField tg = taylor_green(g, 1.0);
  const SpectralField m = apply_helmholtz(tg, 0.5);
  CHECK(norms(btilde_apply(tg, m)).l2 <= 1e-14 * norms(tg).l2 * norms(m).h1);
  const double e1 = taylor_green_error(0.05), e2 = taylor_green_error(0.025);
  CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.02));
  CHECK(taylor_green_error(1e-3) <= 1e-10);
}

TEST_CASE("self-convergence under dt halving has order >= 1.9") {
  std::mt19937_64 rng(41);
  const SpectralField u0 = random_field(grid32(), rng, 1.0, 1.5);
  const SpectralField a = terminal_for(4e-3, u0), b = terminal_for(2e-3, u0), c = terminal_for(1e-3, u0),
                      d = terminal_for(5e-4, u0);
  const double e1 = norms(a - b).l2, e2 = norms(b - c).l2, e3 = norms(c - d).l2;
  MESSAGE("self-convergence orders " << std::log2(e1 / e2) << ", " << std::log2(e2 / e3));
  CHECK(std::log2(e1 / e2) >= 1.9);
  CHECK(std::log2(e2 / e3) >= 1.9);
}

TEST_CASE("discrete momentum equation and energy ledger on a forced run") {
  const GridPtr g = grid32();
  ProblemConfig cfg;
  std::mt19937_64 rng(43);
  const SpectralField u0 = random_field(g, rng, 1.0, 1.5);
  const ControlField h = random_control(g, cfg, rng, 0.3);
  const StateTrajectory traj = solve_state(u0, h, cfg);
  CHECK(momentum_residual(traj, h) <= 1e-12);
  const EnergyLedger led = energy_report(traj, h);
  CHECK(led.time.size() == 501);
  CHECK(led.inequality_holds);
  CHECK(led.constant == doctest::Approx(1.0 / cfg.params.nu));
  CHECK(led.c_min <= led.constant);
  CHECK(led.max_identity_residual <= 1e-12);
  for (std::size_t n = 0; n < led.lhs.size(); ++n) CHECK(led.lhs[n] <= led.rhs[n] + 1e-12 * led.energy.front());
  for (const auto& u : traj.snapshots) {
    CHECK(divergence_defect(u) <= 1e-12);
    CHECK(dealias_defect(u) == 0.0);
  }
}

TEST_CASE("unforced filtered energy is non-increasing") {
  const GridPtr g = grid32();
  ProblemConfig cfg;
  std::mt19937_64 rng(47);
  const SpectralField u0 = random_field(g, rng, 2.0, 1.0);
  const ControlField h = zero_control(g, cfg);
  const EnergyLedger led = energy_report(solve_state(u0, h, cfg), h);
  const double e0 = led.energy.front();
  CHECK(led.max_energy_increase <= 1e-8 * e0);
  for (double e : led.energy) CHECK(e <= e0 * (1.0 + 1e-8));
  CHECK(led.inequality_holds);
}

TEST_CASE("zero data gives a ledger of zeros") {
  const GridPtr g = grid32();
  ProblemConfig cfg;
  const ControlField h = zero_control(g, cfg);
  const EnergyLedger led = energy_report(solve_state(SpectralField(g), h, cfg), h);
  for (std::size_t n = 0; n < led.time.size(); ++n) {
    CHECK(led.energy[n] == 0.0);
    CHECK(led.dissipation[n] == 0.0);
    CHECK(led.lhs[n] == 0.0);
    CHECK(led.rhs[n] == 0.0);
    CHECK(led.identity_residual[n] == 0.0);
  }
  CHECK(led.c_min == 0.0);
}

TEST_CASE("Lipschitz ratio stays bounded as the data perturbation shrinks") {
  const GridPtr g = grid32();
  ProblemConfig cfg;
  std::mt19937_64 rng(53);
  const SpectralField u0 = random_field(g, rng, 1.0, 1.5);
  const ControlField h = random_control(g, cfg, rng, 0.3);
  const SpectralField du = random_field(g, rng, 1.0, 1.5);
  const ControlField dh = random_control(g, cfg, rng, 0.3);
  const StateTrajectory base = solve_state(u0, h, cfg);
  std::vector<double> ratios;
  for (double e : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const StateTrajectory p = solve_state(u0 + e * du, h + e * dh, cfg);
    double sup_v = 0.0, l2_h3 = 0.0;
    for (std::size_t n = 0; n < p.snapshots.size(); ++n) {
      const FieldNorms fn = norms(p.snapshots[n] - base.snapshots[n]);
      sup_v = std::max(sup_v, fn.h1);
      l2_h3 += cfg.dt * fn.h3 * fn.h3;
    }
    ratios.push_back((sup_v + std::sqrt(l2_h3)) / (e * (norms(du).h1 + norm(dh))));
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  CHECK(*hi / *lo <= 3.0);
}

TEST_CASE("identical inputs give bit-identical trajectories") {
  const GridPtr g = grid32();
  ProblemConfig cfg;
  cfg.t_final = 0.1;
  std::mt19937_64 rng(59);
  const SpectralField u0 = random_field(g, rng, 1.0);
  const ControlField h = random_control(g, cfg, rng, 0.3);
  const StateTrajectory a = solve_state(u0, h, cfg), b = solve_state(u0, h, cfg);
  CHECK(a.id != b.id);
  for (std::size_t n = 0; n < a.snapshots.size(); ++n) {
    for (int c = 0; c < kDim; ++c) {
      const auto x = a.snapshots[n].comp(c), y = b.snapshots[n].comp(c);
      CHECK(std::equal(x.begin(), x.end(), y.begin()));
    }
  }
}

TEST_CASE("blow-up is reported with the step index") {
  const GridPtr g = grid32();
  ProblemConfig cfg;
  cfg.dt = 0.1;
  cfg.t_final = 200.0;
  std::mt19937_64 rng(61);
  const SpectralField u0 = random_field(g, rng, 1e4, 0.5);
  CHECK(cfl_advisory(cfg, u0).has_value());
  try {
    solve_state(u0, zero_control(g, cfg), cfg);
    FAIL("expected NonFinite");
  } catch (const NonFinite& e) {
    CHECK(e.step() >= 1);
    CHECK(e.step() <= 2000);
  }
}

TEST_CASE("invalid inputs are rejected") {
  const GridPtr g = grid32();
  ProblemConfig cfg;
  std::mt19937_64 rng(67);
  CHECK_THROWS_AS(solve_state(raw_field(g, rng), zero_control(g, cfg), cfg), InvalidArgument);
  ProblemConfig other = cfg;
  other.dt = 2e-3;
  CHECK_THROWS_AS(solve_state(random_field(g, rng, 1.0), zero_control(g, other), cfg), ConfigMismatch);
  ProblemConfig bad = cfg;
  bad.dt = -1e-3;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = cfg;
  bad.dt = 3e-3;  // does not divide 0.5
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = cfg;
  bad.params.nu = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  ControlField h = zero_control(g, cfg);
  h.values()[5] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve_state(random_field(g, rng, 1.0), h, cfg), InvalidArgument);
}

TEST_CASE("snapshot files round-trip and trajectories export with a manifest") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "vche_forward_export";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const GridPtr g = grid32();
  std::mt19937_64 rng(71);
  const SpectralField u = random_field(g, rng, 1.0);
  write_snapshot(dir / "u.vche", u);
  const SpectralField back = read_snapshot(dir / "u.vche", g);
  CHECK(norms(back - u).l2 <= 1e-14 * norms(u).l2);
  GridSpec s;
  s.n = 16;
  CHECK_THROWS_AS(read_snapshot(dir / "u.vche", make_grid(s)), ConfigMismatch);
  std::ofstream(dir / "junk.vche") << "nope";
  CHECK_THROWS_AS(read_snapshot(dir / "junk.vche", g), Error);

  ProblemConfig cfg;
  cfg.t_final = 0.1;
  const StateTrajectory traj = solve_state(u, zero_control(g, cfg), cfg);
  export_trajectory(traj, dir / "traj", 30);
  std::ifstream in(dir / "traj" / "state_manifest.json");
  const auto manifest = nlohmann::json::parse(in);
  CHECK(manifest["steps"] == 100);
  CHECK(manifest["nodes"].size() == 5);  // 0, 30, 60, 90 and the last node
  CHECK(manifest["nodes"].back()["node"] == 100);
  const SpectralField last = read_snapshot(dir / "traj" / manifest["nodes"].back()["file"].get<std::string>(), g);
  CHECK(norms(last - traj.terminal()).l2 <= 1e-14 * norms(last).l2);
  fs::remove_all(dir);
}
