#include "vche/forward.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <string>

#include "kernels.hpp"
#include "vche/errors.hpp"

namespace vche {

namespace {

std::uint64_t next_trajectory_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

}  // namespace

void require_valid_field(const SpectralField& u, const char* what) {
  const double scale = max_abs_coeff(u);
  if (!u.all_finite()) throw InvalidArgument(std::string(what) + ": non-finite field");
  if (divergence_defect(u) > 1e-10 || mean_defect(u) > 1e-10 ||
      dealias_defect(u) > 1e-10 * scale) {
    throw InvalidArgument(std::string(what) + ": field must be divergence-free, mean-zero and dealiased");
  }
}

void require_control_matches(const ControlField& h, const ProblemConfig& config, const char* what) {
  if (!(h.grid().spec() == config.grid)) throw ConfigMismatch(std::string(what) + ": control grid mismatch");
  if (h.intervals() != config.steps() || h.dt() != config.dt) {
    throw ConfigMismatch(std::string(what) + ": control time grid mismatch");
  }
}

StateTrajectory solve_state(const SpectralField& u0, const ControlField& h,
                            const ProblemConfig& config) {
  config.validate();
  if (!(u0.grid().spec() == config.grid)) throw ConfigMismatch("solve_state: initial state grid mismatch");
  require_control_matches(h, config, "solve_state");
  require_valid_field(u0, "solve_state");
  if (!h.all_finite()) throw InvalidArgument("solve_state: control has non-finite values");

  const int steps = config.steps();
  const double alpha = config.params.alpha;
  const GridPtr& grid = u0.grid_ptr();
  const auto cn = detail::cn_factors(*grid, config.params.nu, alpha, config.dt);

  StateTrajectory traj{config, {}, next_trajectory_id(), nullptr};
  auto lin = std::make_shared<detail::LinearizationData>();
  traj.snapshots.reserve(static_cast<std::size_t>(steps) + 1);
  lin->nodes.reserve(static_cast<std::size_t>(steps));
  traj.snapshots.push_back(u0);

  SpectralField n_prev(grid);
  for (int n = 0; n < steps; ++n) {
    const SpectralField& u = traj.snapshots.back();
    lin->nodes.push_back(detail::point_state(u, alpha));
    SpectralField n_cur = detail::convection(lin->nodes.back(), grid);

    SpectralField rhs = detail::project_grid_vector(grid, h.comp(n, 0), h.comp(n, 1));
    if (n == 0) {
      rhs -= n_cur;
    } else {
      rhs.axpy(-1.5, n_cur);
      rhs.axpy(0.5, n_prev);
    }
    SpectralField next = u;
    detail::cn_update(cn, next, rhs);
    if (!next.all_finite()) throw NonFinite("solve_state: non-finite state", static_cast<std::size_t>(n + 1));
    traj.snapshots.push_back(std::move(next));
    n_prev = std::move(n_cur);
  }
  traj.linearization = std::move(lin);
  return traj;
}

double momentum_residual(const StateTrajectory& traj, const ControlField& h) {
  const ProblemConfig& cfg = traj.config;
  require_control_matches(h, cfg, "momentum_residual");
  const GridPtr& grid = traj.snapshots.front().grid_ptr();
  const Grid& g = *grid;
  const double a2 = cfg.params.alpha * cfg.params.alpha;
  const double nu = cfg.params.nu;
  double worst = 0.0;
  SpectralField n_prev(grid);
  for (int n = 0; n < traj.steps(); ++n) {
    const SpectralField& u0 = traj.snapshots[static_cast<std::size_t>(n)];
    const SpectralField& u1 = traj.snapshots[static_cast<std::size_t>(n) + 1];
    SpectralField n_cur = detail::convection(detail::point_state(u0, cfg.params.alpha), grid);
    SpectralField conv = n == 0 ? n_cur : 1.5 * n_cur - 0.5 * n_prev;
    const SpectralField f = detail::project_grid_vector(grid, h.comp(n, 0), h.comp(n, 1));

    SpectralField tend(grid), visc(grid);
    for (int c = 0; c < kDim; ++c) {
      for (std::size_t m = 0; m < g.modes(); ++m) {
        const double eta = 1.0 + a2 * g.k2(m);
        tend.comp(c)[m] = eta * (u1.comp(c)[m] - u0.comp(c)[m]) / cfg.dt;
        visc.comp(c)[m] = nu * g.k2(m) * eta * 0.5 * (u1.comp(c)[m] + u0.comp(c)[m]);
      }
    }
    const SpectralField res = tend + visc + conv - f;
    const double scale = std::sqrt(inner(tend, tend)) + std::sqrt(inner(visc, visc)) +
                         std::sqrt(inner(conv, conv)) + std::sqrt(inner(f, f));
    if (scale > 0.0) worst = std::max(worst, std::sqrt(inner(res, res)) / scale);
    n_prev = std::move(n_cur);
  }
  return worst;
}

std::optional<std::string> cfl_advisory(const ProblemConfig& config, const SpectralField& u0) {
  const PhysicalField v = to_physical(u0);
  double umax = 0.0;
  for (std::size_t p = 0; p < u0.grid().points(); ++p) {
    umax = std::max(umax, std::hypot(v.comp(0)[p], v.comp(1)[p]));
  }
  const double kmax = config.grid.retained_max() * 2.0 * std::numbers::pi / config.grid.length;
  const double number = config.dt * umax * kmax;
  if (number <= 0.5) return std::nullopt;
  char buf[160];
  std::snprintf(buf, sizeof buf, "dt * max|u| * k_max = %.3g exceeds 0.5; the explicit convection step may be unstable",
                number);
  return std::string(buf);
}

}  // namespace vche
