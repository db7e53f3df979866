#pragma once

#include <span>
#include <vector>

#include "vche/spectral_field.hpp"

namespace vche {

/// Space-time control, piecewise constant in time: interval n = [t_n, t_{n+1})
/// carries one physical vector field on the grid nodes.
///
/// Values are stored contiguously, interval-major, then component, then node.
/// The L2(Q) pairing is the matching rectangle rule: sum_n dt * <a_n, b_n>_grid.
class ControlField {
 public:
  ControlField(GridPtr grid, int intervals, double dt);

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  int intervals() const noexcept { return intervals_; }
  double dt() const noexcept { return dt_; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::span<double> comp(int interval, int c) noexcept;
  std::span<const double> comp(int interval, int c) const noexcept;

  PhysicalField interval(int n) const;
  void set_interval(int n, const PhysicalField& v);

  void set_zero();
  /// this += a * x
  void axpy(double a, const ControlField& x);
  ControlField& operator*=(double a);
  friend ControlField operator+(ControlField a, const ControlField& b) {
    a.axpy(1.0, b);
    return a;
  }
  friend ControlField operator-(ControlField a, const ControlField& b) {
    a.axpy(-1.0, b);
    return a;
  }
  friend ControlField operator*(double s, ControlField a) { return a *= s; }

  bool all_finite() const;
  /// Throws ConfigMismatch unless grid, interval count and dt agree.
  void require_compatible(const ControlField& o, const char* what) const;

 private:
  GridPtr grid_;
  int intervals_ = 0;
  double dt_ = 0.0;
  std::vector<double> data_;
};

double inner(const ControlField& a, const ControlField& b);
double norm(const ControlField& a);
double max_abs(const ControlField& a);

/// Same constant-in-time field on every interval.
ControlField constant_control(const PhysicalField& v, int intervals, double dt);

}  // namespace vche
