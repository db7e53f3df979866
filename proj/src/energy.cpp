#include "vche/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kernels.hpp"
#include "vche/operators.hpp"

namespace vche {

EnergyLedger energy_report(const StateTrajectory& traj, const ControlField& h, double tolerance) {
  const ProblemConfig& cfg = traj.config;
  require_control_matches(h, cfg, "energy_report");
  const double alpha = cfg.params.alpha;
  const double a2 = alpha * alpha;
  const double nu = cfg.params.nu;
  const double dt = cfg.dt;
  const GridPtr& grid = traj.snapshots.front().grid_ptr();
  const int steps = traj.steps();

  auto filtered = [&](const SpectralField& u) {
    const FieldNorms fn = norms(u);
    return fn.l2 * fn.l2 + a2 * fn.h1 * fn.h1;
  };

  EnergyLedger led;
  led.constant = 1.0 / nu;
  const double e0 = filtered(traj.snapshots.front());
  double diss = 0.0, forcing = 0.0, defect = 0.0;
  double c_min = 0.0;
  bool unforced_violation = false;

  auto record = [&](int n) {
    const double e = filtered(traj.snapshots[static_cast<std::size_t>(n)]);
    led.time.push_back(cfg.time(n));
    led.energy.push_back(e);
    led.dissipation.push_back(diss);
    led.lhs.push_back(e + diss);
    led.rhs.push_back(e0 + led.constant * forcing);
    led.convection_defect.push_back(defect);
    const double excess = led.lhs.back() - e0;
    if (forcing > 0.0) {
      c_min = std::max(c_min, excess / forcing);
    } else if (excess > tolerance * std::max(1.0, e0)) {
      unforced_violation = true;
    }
    led.max_violation = std::max(led.max_violation, led.lhs.back() - led.rhs.back());
  };

  led.max_violation = -std::numeric_limits<double>::infinity();
  led.max_energy_increase = -std::numeric_limits<double>::infinity();
  record(0);
  SpectralField n_prev(grid);
  double push = 0.0;  // sum 2 dt <P h_j, u_bar_j>
  for (int n = 0; n < steps; ++n) {
    const SpectralField& u0 = traj.snapshots[static_cast<std::size_t>(n)];
    const SpectralField& u1 = traj.snapshots[static_cast<std::size_t>(n) + 1];
    const SpectralField mid = 0.5 * (u0 + u1);
    const FieldNorms fm = norms(mid);
    diss += nu * dt * (fm.h1 * fm.h1 + a2 * fm.h2 * fm.h2);

    SpectralField n_cur = detail::convection(detail::point_state(u0, alpha), grid);
    const SpectralField g = n == 0 ? n_cur : 1.5 * n_cur - 0.5 * n_prev;
    defect += -2.0 * dt * inner(g, mid);
    const SpectralField f = detail::project_grid_vector(grid, h.comp(n, 0), h.comp(n, 1));
    push += 2.0 * dt * inner(f, mid);

    const PhysicalField hn = h.interval(n);
    forcing += dt * inner(hn, hn);
    record(n + 1);

    // E_{n+1} + 2 * dissipation_{n+1} = E_0 + push + defect
    const double res = led.energy.back() + 2.0 * diss - e0 - push - defect;
    led.identity_residual.push_back(res);
    led.max_identity_residual = std::max(led.max_identity_residual, std::abs(res));
    led.max_energy_increase = std::max(led.max_energy_increase, led.energy[static_cast<std::size_t>(n) + 1] -
                                                                    led.energy[static_cast<std::size_t>(n)]);
    n_prev = std::move(n_cur);
  }
  if (steps == 0) led.max_energy_increase = 0.0;
  led.identity_residual.insert(led.identity_residual.begin(), 0.0);
  led.c_min = unforced_violation ? std::numeric_limits<double>::infinity() : c_min;
  led.inequality_holds = led.max_violation <= tolerance * std::max(1.0, e0);
  return led;
}

}  // namespace vche
