#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

namespace vche {

using Complex = std::complex<double>;

/// Number of velocity components. The toolkit works on the two-dimensional torus.
inline constexpr int kDim = 2;

/// Periodic grid description: `n` points per direction on a square of side `length`.
struct GridSpec {
  int dim = kDim;
  int n = 32;
  double length = 2.0 * std::numbers::pi;
  double dealias_fraction = 2.0 / 3.0;

  /// Throws InvalidArgument unless n >= 8 is a power of two, dim == 2, length > 0
  /// and 0 < dealias_fraction <= 1.
  void validate() const;

  /// Largest integer wavenumber component kept by the dealiasing mask.
  int retained_max() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

class FftPlan;

/// Immutable per-grid data: wavenumber tables, spectral masks and FFT plans.
///
/// Spectral data uses the real-to-complex half layout: index `i * (n/2+1) + j`
/// holds the coefficient of wavenumber (kx(i), j). Coefficients are normalized
/// as Fourier-series coefficients, u(x) = sum_k u_k exp(i k.x).
class Grid {
 public:
  explicit Grid(const GridSpec& spec);
  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  const GridSpec& spec() const noexcept { return spec_; }
  int n() const noexcept { return spec_.n; }
  std::size_t points() const noexcept { return points_; }
  std::size_t modes() const noexcept { return modes_; }
  std::size_t half() const noexcept { return half_; }

  /// Physical wavenumbers (Nyquist kept, used by even symbols such as |k|^2).
  double kx(std::size_t mode) const noexcept { return kx_[mode]; }
  double ky(std::size_t mode) const noexcept { return ky_[mode]; }
  /// Wavenumbers for odd symbols (derivatives); zero on the Nyquist lines.
  double dkx(std::size_t mode) const noexcept { return dkx_[mode]; }
  double dky(std::size_t mode) const noexcept { return dky_[mode]; }
  double k2(std::size_t mode) const noexcept { return k2_[mode]; }
  /// Multiplicity of a stored mode in the full spectrum (1 or 2).
  double weight(std::size_t mode) const noexcept { return weight_[mode]; }
  bool retained(std::size_t mode) const noexcept { return retained_[mode] != 0; }
  std::span<const double> k2_table() const noexcept { return k2_; }

  /// Area element of the grid quadrature, (length/n)^2.
  double cell_area() const noexcept { return cell_area_; }
  /// Domain area, length^2. The L2 pairing of two fields is
  /// domain_area * sum_k weight * Re(u_k conj(v_k)).
  double domain_area() const noexcept { return domain_area_; }

  /// Physical coordinates of grid node `p` (row-major, x index major).
  double x_coord(std::size_t p) const noexcept;
  double y_coord(std::size_t p) const noexcept;

  /// Physical values -> normalized coefficients. Both spans are sized by points()/modes().
  void forward(std::span<const double> values, std::span<Complex> coeffs) const;
  /// Normalized coefficients -> physical values.
  void inverse(std::span<const Complex> coeffs, std::span<double> values) const;

 private:
  GridSpec spec_;
  std::size_t half_ = 0;
  std::size_t points_ = 0;
  std::size_t modes_ = 0;
  double cell_area_ = 0.0;
  double domain_area_ = 0.0;
  std::vector<double> kx_, ky_, dkx_, dky_, k2_, weight_;
  std::vector<unsigned char> retained_;
  std::unique_ptr<FftPlan> fft_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Returns a shared grid for `spec`; identical specs share one instance.
GridPtr make_grid(const GridSpec& spec);

}  // namespace vche
