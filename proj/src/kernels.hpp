#pragma once

// Pseudo-spectral building blocks shared by the operators and the time integrators.

#include <span>
#include <vector>

#include "vche/spectral_field.hpp"

namespace vche::detail {

/// Leray projection plus dealiasing, in place.
void project_dealias(SpectralField& v);

/// Grid values of the scalar curl d_x v_2 - d_y v_1.
void curl_values(const SpectralField& v, std::span<double> out);

/// Grid values of the curl of (I + alpha^2 A) v.
void helmholtz_curl_values(const SpectralField& v, double alpha, std::span<double> out);

/// Pi_K P applied to the grid vector field (p1, p2).
SpectralField project_grid_vector(const GridPtr& grid, std::span<const double> p1,
                                  std::span<const double> p2);

/// Pointwise values of a field and of curl((I + alpha^2 A) field); everything
/// the convection kernels need at one time level.
struct PointState {
  std::vector<double> u1, u2, omega;
};

PointState point_state(const SpectralField& u, double alpha);

/// B~(u, u + alpha^2 A u).
SpectralField convection(const PointState& s, const GridPtr& grid);

/// B~(z, H u) + B~(u, H z) for the cached state u.
SpectralField convection_prime(const PointState& s, const SpectralField& z, double alpha);

/// Adjoint of convection_prime at the cached state u applied to lambda.
SpectralField convection_adjoint(const PointState& s, const SpectralField& lambda, double alpha);

/// Point states of the snapshots 0..steps-1 of a state trajectory.
struct LinearizationData {
  std::vector<PointState> nodes;
};

/// Mode-wise Crank-Nicolson factors of one step:
/// u_{n+1} = c u_n + d (f_n - G_n), c = (1 - dt a/2)/(1 + dt a/2),
/// d = dt / ((1 + dt a/2)(1 + alpha^2 |k|^2)), a = nu |k|^2.
struct CnFactors {
  std::vector<double> c, d;
};

CnFactors cn_factors(const Grid& grid, double nu, double alpha, double dt);

/// c * x + d * y, mode-wise, in place into x.
void cn_update(const CnFactors& f, SpectralField& x, const SpectralField& y);

}  // namespace vche::detail
