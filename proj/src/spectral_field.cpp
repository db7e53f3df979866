#include "vche/spectral_field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vche/errors.hpp"

namespace vche {

SpectralField::SpectralField(GridPtr grid) : grid_(std::move(grid)) {
  for (auto& c : c_) c.assign(grid_->modes(), Complex{});
}

void SpectralField::set_zero() {
  for (auto& c : c_) std::fill(c.begin(), c.end(), Complex{});
}

void SpectralField::axpy(double a, const SpectralField& x) {
  require_same_grid(grid(), x.grid(), "SpectralField::axpy");
  for (int c = 0; c < kDim; ++c) {
    auto dst = comp(c);
    auto src = x.comp(c);
    for (std::size_t m = 0; m < dst.size(); ++m) dst[m] += a * src[m];
  }
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  axpy(1.0, o);
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  axpy(-1.0, o);
  return *this;
}

SpectralField& SpectralField::operator*=(double a) {
  for (auto& c : c_) {
    for (auto& v : c) v *= a;
  }
  return *this;
}

bool SpectralField::all_finite() const {
  for (const auto& c : c_) {
    for (const auto& v : c) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
  }
  return true;
}

PhysicalField::PhysicalField(GridPtr grid) : grid_(std::move(grid)) {
  for (auto& c : v_) c.assign(grid_->points(), 0.0);
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (&a != &b && !(a.spec() == b.spec())) {
    throw ConfigMismatch(std::string(what) + ": grid mismatch");
  }
}

PhysicalField to_physical(const SpectralField& u) {
  PhysicalField out(u.grid_ptr());
  for (int c = 0; c < kDim; ++c) u.grid().inverse(u.comp(c), out.comp(c));
  return out;
}

SpectralField to_spectral(const PhysicalField& v) {
  SpectralField out(v.grid_ptr());
  for (int c = 0; c < kDim; ++c) v.grid().forward(v.comp(c), out.comp(c));
  return out;
}

double inner(const SpectralField& u, const SpectralField& v) {
  require_same_grid(u.grid(), v.grid(), "inner");
  const Grid& g = u.grid();
  double sum = 0.0;
  for (int c = 0; c < kDim; ++c) {
    auto a = u.comp(c);
    auto b = v.comp(c);
    for (std::size_t m = 0; m < g.modes(); ++m) {
      sum += g.weight(m) * (a[m].real() * b[m].real() + a[m].imag() * b[m].imag());
    }
  }
  return g.domain_area() * sum;
}

double inner(const PhysicalField& u, const PhysicalField& v) {
  require_same_grid(u.grid(), v.grid(), "inner");
  double sum = 0.0;
  for (int c = 0; c < kDim; ++c) {
    auto a = u.comp(c);
    auto b = v.comp(c);
    for (std::size_t p = 0; p < a.size(); ++p) sum += a[p] * b[p];
  }
  return u.grid().cell_area() * sum;
}

double max_abs_coeff(const SpectralField& u) {
  double m = 0.0;
  for (int c = 0; c < kDim; ++c) {
    for (const auto& v : u.comp(c)) m = std::max(m, std::abs(v));
  }
  return m;
}

double divergence_defect(const SpectralField& u) {
  const double scale = max_abs_coeff(u);
  if (scale == 0.0) return 0.0;
  const Grid& g = u.grid();
  double worst = 0.0;
  for (std::size_t m = 0; m < g.modes(); ++m) {
    if (g.k2(m) == 0.0) continue;
    const Complex div = g.kx(m) * u.comp(0)[m] + g.ky(m) * u.comp(1)[m];
    worst = std::max(worst, std::abs(div) / std::sqrt(g.k2(m)));
  }
  return worst / scale;
}

double mean_defect(const SpectralField& u) {
  const double scale = max_abs_coeff(u);
  if (scale == 0.0) return 0.0;
  return std::max(std::abs(u.comp(0)[0]), std::abs(u.comp(1)[0])) / scale;
}

double dealias_defect(const SpectralField& u) {
  const Grid& g = u.grid();
  double worst = 0.0;
  for (std::size_t m = 0; m < g.modes(); ++m) {
    if (g.retained(m)) continue;
    for (int c = 0; c < kDim; ++c) worst = std::max(worst, std::abs(u.comp(c)[m]));
  }
  return worst;
}

}  // namespace vche
