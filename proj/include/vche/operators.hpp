#pragma once

#include "vche/spectral_field.hpp"

namespace vche {

/// Filter length and viscosity of the viscous Camassa-Holm model.
struct OperatorParams {
  double alpha = 0.5;
  double nu = 0.05;

  void validate() const;
};

/// Orthogonal L2 projection onto divergence-free, mean-zero fields.
SpectralField leray_project(const SpectralField& v);

/// Zeroes every mode outside the 2/3-rule retained set.
SpectralField dealias(const SpectralField& v);

/// Stokes operator; on the torus it multiplies each mode of a solenoidal field by |k|^2.
SpectralField apply_A(const SpectralField& u);

/// Momentum map u -> u + alpha^2 A u, symbol (1 + alpha^2 |k|^2).
SpectralField apply_helmholtz(const SpectralField& u, double alpha);
/// Inverse of apply_helmholtz.
SpectralField solve_helmholtz(const SpectralField& m, double alpha);

/// b(u, v, w) = sum_ij int u_i d_i v_j w_j, evaluated by exact grid quadrature
/// of the dealiased inputs.
double trilinear_b(const SpectralField& u, const SpectralField& v, const SpectralField& w);

/// b~(u, v, w) = b(u, v, w) - b(w, v, u).
double trilinear_btilde(const SpectralField& u, const SpectralField& v, const SpectralField& w);

/// L2 Riesz representative of w -> b~(u, v, w) on dealiased solenoidal fields:
/// P[(u.grad)v - (grad v)^T u] = -P[u x curl v].
SpectralField btilde_apply(const SpectralField& u, const SpectralField& v);

/// Linearization of u -> B~(u, u + alpha^2 A u) at u_hat in `direction`.
SpectralField btilde_prime(const SpectralField& u_hat, const SpectralField& direction, double alpha);

/// Second derivative B~(u1, u2 + alpha^2 A u2) + B~(u2, u1 + alpha^2 A u1);
/// independent of the linearization point.
SpectralField btilde_second(const SpectralField& u1, const SpectralField& u2, double alpha);

/// Riesz representative of w -> b~(u_hat, w + alpha^2 A w, lambda) + b~(w, u_hat + alpha^2 A u_hat, lambda),
/// the L2-adjoint of btilde_prime(u_hat, .).
SpectralField bhat_apply(const SpectralField& u_hat, const SpectralField& lambda, double alpha);

struct FieldNorms {
  double l2 = 0.0;  // |u|
  double h1 = 0.0;  // |grad u|
  double h2 = 0.0;  // |A u|
  double h3 = 0.0;  // |grad A u|
};

FieldNorms norms(const SpectralField& u);

}  // namespace vche
