#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "vche/adjoint.hpp"
#include "vche/control.hpp"
#include "vche/cost.hpp"
#include "vche/fields.hpp"
#include "vche/forward.hpp"
#include "vche/operators.hpp"
#include "vche/sensitivity.hpp"

namespace vche::test {

inline GridPtr grid32() { return make_grid(GridSpec{}); }
inline GridPtr grid64() {
  GridSpec s;
  s.n = 64;
  return make_grid(s);
}

inline double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s > 0.0 ? std::abs(a - b) / s : 0.0;
}

inline int wavenumber(double k, const Grid& g) {
  return static_cast<int>(std::lround(k * g.spec().length / (2.0 * std::numbers::pi)));
}

// Zero-padded copy onto a finer grid of the same length. Exact for fields
// without Nyquist content, which covers every dealiased field.
inline SpectralField refine(const SpectralField& u, const GridPtr& fine) {
  const Grid& g = u.grid();
  SpectralField out(fine);
  const auto nf = static_cast<std::size_t>(fine->n());
  for (std::size_t m = 0; m < g.modes(); ++m) {
    const int kx = wavenumber(g.kx(m), g), ky = wavenumber(g.ky(m), g);
    if (std::abs(kx) * 2 >= g.n() || ky * 2 >= g.n()) continue;
    const std::size_t i = static_cast<std::size_t>((kx + static_cast<int>(nf)) % static_cast<int>(nf));
    const std::size_t idx = i * fine->half() + static_cast<std::size_t>(ky);
    for (int c = 0; c < kDim; ++c) out.comp(c)[idx] = u.comp(c)[m];
  }
  return out;
}

// d/dx_dir of every component, by spectral differentiation.
inline SpectralField derivative(const SpectralField& u, int dir) {
  const Grid& g = u.grid();
  SpectralField d(u.grid_ptr());
  for (std::size_t m = 0; m < g.modes(); ++m) {
    const double k = dir == 0 ? g.dkx(m) : g.dky(m);
    for (int c = 0; c < kDim; ++c) d.comp(c)[m] = Complex(0.0, k) * u.comp(c)[m];
  }
  return d;
}

// b(u, v, w) = sum_ij int u_i d_i v_j w_j by quadrature on the 2x grid.
inline double trilinear_refined(const SpectralField& u, const SpectralField& v, const SpectralField& w) {
  const GridPtr fine = grid64();
  const PhysicalField U = to_physical(refine(u, fine));
  const PhysicalField W = to_physical(refine(w, fine));
  const SpectralField vf = refine(v, fine);
  const PhysicalField D0 = to_physical(derivative(vf, 0));
  const PhysicalField D1 = to_physical(derivative(vf, 1));
  double s = 0.0;
  for (std::size_t p = 0; p < fine->points(); ++p) {
    for (int j = 0; j < kDim; ++j) {
      s += (U.comp(0)[p] * D0.comp(j)[p] + U.comp(1)[p] * D1.comp(j)[p]) * W.comp(j)[p];
    }
  }
  return s * fine->cell_area();
}

// Raw field with generic content in the retained band: neither solenoidal nor mean-free.
inline SpectralField raw_field(const GridPtr& grid, std::mt19937_64& rng) {
  PhysicalField v(grid);
  std::normal_distribution<double> nd;
  for (int c = 0; c < kDim; ++c)
    for (double& x : v.comp(c)) x = nd(rng);
  return dealias(to_spectral(v));
}

inline ControlField random_control(const GridPtr& grid, const ProblemConfig& cfg, std::mt19937_64& rng,
                                   double scale = 1.0) {
  ControlField k(grid, cfg.steps(), cfg.dt);
  std::normal_distribution<double> nd;
  for (double& x : k.values()) x = scale * nd(rng);
  return k;
}

inline ControlField kolmogorov(const GridPtr& grid, const ProblemConfig& cfg, double amp) {
  PhysicalField f(grid);
  for (std::size_t p = 0; p < grid->points(); ++p) f.comp(0)[p] = amp * std::sin(2.0 * grid->y_coord(p));
  return constant_control(f, cfg.steps(), cfg.dt);
}

inline SpectralField reference_u0(const GridPtr& grid) {
  const StreamMode m[] = {{1, 0, 1.0, 0.0}, {0, 1, 0.0, 0.8}, {1, 1, 0.5, 0.3}};
  return from_stream_modes(grid, m);
}

// Short-horizon version of the reachable-target tracking problem.
inline ReducedProblem tracking_problem(double t_final, double gamma, double cost_scale = 1.0) {
  const GridPtr grid = grid32();
  ProblemConfig cfg;
  cfg.t_final = t_final;
  const SpectralField u0 = reference_u0(grid);
  const StateTrajectory target = solve_state(u0, kolmogorov(grid, cfg, 1.0), cfg);
  QuadraticTracking::Weights w{cost_scale, cost_scale, cost_scale * gamma};
  return ReducedProblem(cfg, u0, QuadraticTracking::track(w, target));
}

inline std::vector<SpectralField> difference(const std::vector<SpectralField>& a, const std::vector<SpectralField>& b) {
  std::vector<SpectralField> out;
  for (std::size_t n = 0; n < a.size(); ++n) out.push_back(a[n] - b[n]);
  return out;
}

inline double max_rel_diff(const std::vector<SpectralField>& a, const std::vector<SpectralField>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    num = std::max(num, norms(a[n] - b[n]).l2);
    den = std::max(den, norms(a[n]).l2);
  }
  return den > 0.0 ? num / den : num;
}

}  // namespace vche::test
