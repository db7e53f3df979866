#pragma once

#include <array>
#include <span>
#include <vector>

#include "vche/grid.hpp"

namespace vche {

/// Velocity field stored as half-layout Fourier coefficients per component.
///
/// Valid velocity fields are divergence-free, mean-zero and confined to the
/// dealiased mode set. Those properties are established by the operators
/// (leray_project, dealias) and checked by `divergence_defect`, not enforced
/// on every mutation.
class SpectralField {
 public:
  explicit SpectralField(GridPtr grid);

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }

  std::span<Complex> comp(int c) noexcept { return c_[static_cast<std::size_t>(c)]; }
  std::span<const Complex> comp(int c) const noexcept { return c_[static_cast<std::size_t>(c)]; }

  void set_zero();
  /// this += a * x
  void axpy(double a, const SpectralField& x);

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double a);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

  bool all_finite() const;

 private:
  GridPtr grid_;
  std::array<std::vector<Complex>, kDim> c_;
};

/// Real vector field sampled on the grid nodes, row-major per component.
class PhysicalField {
 public:
  explicit PhysicalField(GridPtr grid);

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }

  std::span<double> comp(int c) noexcept { return v_[static_cast<std::size_t>(c)]; }
  std::span<const double> comp(int c) const noexcept { return v_[static_cast<std::size_t>(c)]; }

 private:
  GridPtr grid_;
  std::array<std::vector<double>, kDim> v_;
};

/// Throws ConfigMismatch when the two grids differ.
void require_same_grid(const Grid& a, const Grid& b, const char* what);

PhysicalField to_physical(const SpectralField& u);
/// Raw transform; no projection or truncation.
SpectralField to_spectral(const PhysicalField& v);

/// L2(Omega) pairing computed in Fourier space.
double inner(const SpectralField& u, const SpectralField& v);
/// L2(Omega) pairing by grid quadrature.
double inner(const PhysicalField& u, const PhysicalField& v);

/// max_k |k . u_k| / (|k| max_k |u_k|); zero for the zero field.
double divergence_defect(const SpectralField& u);
/// |u_0| relative to the largest coefficient.
double mean_defect(const SpectralField& u);
/// Largest |coefficient| outside the dealiased mode set.
double dealias_defect(const SpectralField& u);
double max_abs_coeff(const SpectralField& u);

}  // namespace vche
