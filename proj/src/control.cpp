#include "vche/control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vche/errors.hpp"

namespace vche {

ControlField::ControlField(GridPtr grid, int intervals, double dt)
    : grid_(std::move(grid)), intervals_(intervals), dt_(dt) {
  if (intervals < 0) throw InvalidArgument("ControlField: negative interval count");
  if (!(dt > 0.0)) throw InvalidArgument("ControlField: dt must be > 0");
  data_.assign(static_cast<std::size_t>(intervals) * kDim * grid_->points(), 0.0);
}

std::span<double> ControlField::comp(int interval, int c) noexcept {
  const std::size_t np = grid_->points();
  return std::span<double>(data_).subspan((static_cast<std::size_t>(interval) * kDim + c) * np, np);
}

std::span<const double> ControlField::comp(int interval, int c) const noexcept {
  const std::size_t np = grid_->points();
  return std::span<const double>(data_).subspan((static_cast<std::size_t>(interval) * kDim + c) * np,
                                                np);
}

PhysicalField ControlField::interval(int n) const {
  PhysicalField v(grid_);
  for (int c = 0; c < kDim; ++c) std::ranges::copy(comp(n, c), v.comp(c).begin());
  return v;
}

void ControlField::set_interval(int n, const PhysicalField& v) {
  require_same_grid(*grid_, v.grid(), "ControlField::set_interval");
  for (int c = 0; c < kDim; ++c) std::ranges::copy(v.comp(c), comp(n, c).begin());
}

void ControlField::set_zero() { std::ranges::fill(data_, 0.0); }

void ControlField::require_compatible(const ControlField& o, const char* what) const {
  require_same_grid(*grid_, o.grid(), what);
  if (intervals_ != o.intervals_ || dt_ != o.dt_) {
    throw ConfigMismatch(std::string(what) + ": time grid mismatch");
  }
}

void ControlField::axpy(double a, const ControlField& x) {
  require_compatible(x, "ControlField::axpy");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * x.data_[i];
}

ControlField& ControlField::operator*=(double a) {
  for (auto& v : data_) v *= a;
  return *this;
}

bool ControlField::all_finite() const {
  return std::ranges::all_of(data_, [](double v) { return std::isfinite(v); });
}

double inner(const ControlField& a, const ControlField& b) {
  a.require_compatible(b, "inner");
  const auto x = a.values();
  const auto y = b.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * y[i];
  return a.dt() * a.grid().cell_area() * sum;
}

double norm(const ControlField& a) { return std::sqrt(inner(a, a)); }

double max_abs(const ControlField& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

ControlField constant_control(const PhysicalField& v, int intervals, double dt) {
  ControlField h(v.grid_ptr(), intervals, dt);
  for (int n = 0; n < intervals; ++n) h.set_interval(n, v);
  return h;
}

}  // namespace vche
