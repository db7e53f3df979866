#include "vche/sensitivity.hpp"

#include <cmath>
#include <functional>

#include "kernels.hpp"
#include "vche/errors.hpp"

namespace vche {

namespace {

const detail::LinearizationData& linearization_of(const StateTrajectory& ref, const char* what) {
  if (!ref.linearization || ref.linearization->nodes.size() != static_cast<std::size_t>(ref.steps())) {
    throw InvalidArgument(std::string(what) + ": reference trajectory carries no linearization data");
  }
  return *ref.linearization;
}

// z_{n+1} = c z_n + d (s_n - G'_n z), z_0 = 0, where G'_n follows the
// Adams-Bashforth pattern of the forward scheme and s_n is the source of step n.
TangentTrajectory march(const StateTrajectory& ref, const char* what,
                        const std::function<SpectralField(int)>& source) {
  const auto& lin = linearization_of(ref, what);
  const ProblemConfig& cfg = ref.config;
  const double alpha = cfg.params.alpha;
  const GridPtr& grid = ref.snapshots.front().grid_ptr();
  const auto cn = detail::cn_factors(*grid, cfg.params.nu, alpha, cfg.dt);
  const int steps = ref.steps();

  TangentTrajectory out{cfg, {}, ref.id};
  out.snapshots.reserve(static_cast<std::size_t>(steps) + 1);
  out.snapshots.emplace_back(grid);
  SpectralField lin_prev(grid);
  for (int n = 0; n < steps; ++n) {
    const SpectralField& z = out.snapshots.back();
    SpectralField rhs = source(n);
    SpectralField lin_cur = n == 0 ? SpectralField(grid)
                                   : detail::convection_prime(lin.nodes[static_cast<std::size_t>(n)], z, alpha);
    if (n == 0) {
      rhs -= lin_cur;
    } else {
      rhs.axpy(-1.5, lin_cur);
      rhs.axpy(0.5, lin_prev);
    }
    SpectralField next = z;
    detail::cn_update(cn, next, rhs);
    if (!next.all_finite()) throw NonFinite(std::string(what) + ": non-finite value", static_cast<std::size_t>(n + 1));
    out.snapshots.push_back(std::move(next));
    lin_prev = std::move(lin_cur);
  }
  return out;
}

}  // namespace

TangentTrajectory solve_linearized(const StateTrajectory& ref, const ControlField& k) {
  require_control_matches(k, ref.config, "solve_linearized");
  const GridPtr& grid = ref.snapshots.front().grid_ptr();
  return march(ref, "solve_linearized", [&](int n) {
    return detail::project_grid_vector(grid, k.comp(n, 0), k.comp(n, 1));
  });
}

TangentTrajectory solve_second(const StateTrajectory& ref, const TangentTrajectory& z1,
                               const TangentTrajectory& z2) {
  if (z1.reference_id != ref.id || z2.reference_id != ref.id) {
    throw ConfigMismatch("solve_second: tangents were computed against another reference");
  }
  const double alpha = ref.config.params.alpha;
  const GridPtr& grid = ref.snapshots.front().grid_ptr();
  SpectralField prev(grid);
  // -G''_n with G''_n = 3/2 B~''(z1_n, z2_n) - 1/2 B~''(z1_{n-1}, z2_{n-1}); the n = 0 term vanishes
  return march(ref, "solve_second", [&](int n) {
    const auto i = static_cast<std::size_t>(n);
    SpectralField cur = n == 0 ? SpectralField(grid)
                               : detail::convection_prime(detail::point_state(z1.snapshots[i], alpha),
                                                          z2.snapshots[i], alpha);
    SpectralField src = n == 0 ? SpectralField(grid) : -1.5 * cur + 0.5 * prev;
    prev = std::move(cur);
    return src;
  });
}

double trajectory_norm(const std::vector<SpectralField>& v, double dt) {
  double sum = 0.0;
  for (std::size_t n = 0; n < v.size(); ++n) {
    const double w = (n == 0 || n + 1 == v.size()) ? 0.5 : 1.0;
    sum += w * inner(v[n], v[n]);
  }
  return std::sqrt(dt * sum);
}

}  // namespace vche
