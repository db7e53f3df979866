#include "vche/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <utility>

#include "vche/errors.hpp"

namespace vche {

namespace {

// fftw planning is not thread-safe; execution with the new-array interface is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

class FftPlan {
 public:
  explicit FftPlan(int n) : n_(n), half_(static_cast<std::size_t>(n / 2 + 1)) {
    std::vector<double> real(static_cast<std::size_t>(n) * n);
    std::vector<Complex> spec(static_cast<std::size_t>(n) * half_);
    auto* cspec = reinterpret_cast<fftw_complex*>(spec.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lock(fftw_planner_mutex());
    r2c_ = fftw_plan_dft_r2c_2d(n, n, real.data(), cspec, flags);
    c2r_ = fftw_plan_dft_c2r_2d(n, n, cspec, real.data(), flags);
    if (r2c_ == nullptr || c2r_ == nullptr) throw Error("fftw planning failed");
  }

  ~FftPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(r2c_);
    fftw_destroy_plan(c2r_);
  }

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  void forward(std::span<const double> values, std::span<Complex> coeffs) const {
    std::vector<double> scratch(values.begin(), values.end());
    fftw_execute_dft_r2c(r2c_, scratch.data(), reinterpret_cast<fftw_complex*>(coeffs.data()));
    const double scale = 1.0 / (static_cast<double>(n_) * n_);
    for (auto& c : coeffs) c *= scale;
  }

  void inverse(std::span<const Complex> coeffs, std::span<double> values) const {
    // c2r overwrites its input
    std::vector<Complex> scratch(coeffs.begin(), coeffs.end());
    fftw_execute_dft_c2r(c2r_, reinterpret_cast<fftw_complex*>(scratch.data()), values.data());
  }

 private:
  int n_;
  std::size_t half_;
  fftw_plan r2c_ = nullptr;
  fftw_plan c2r_ = nullptr;
};

void GridSpec::validate() const {
  if (dim != kDim) throw InvalidArgument("grid: only dim = 2 is supported");
  if (n < 8 || (n & (n - 1)) != 0) throw InvalidArgument("grid: n must be a power of two >= 8");
  if (!(length > 0.0) || !std::isfinite(length)) throw InvalidArgument("grid: length must be > 0");
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0)) {
    throw InvalidArgument("grid: dealias_fraction must lie in (0, 1]");
  }
}

int GridSpec::retained_max() const {
  return static_cast<int>(std::floor(dealias_fraction * n / 2.0 + 1e-12));
}

Grid::Grid(const GridSpec& spec) : spec_(spec) {
  spec_.validate();
  const int n = spec_.n;
  half_ = static_cast<std::size_t>(n / 2 + 1);
  points_ = static_cast<std::size_t>(n) * n;
  modes_ = static_cast<std::size_t>(n) * half_;
  cell_area_ = (spec_.length / n) * (spec_.length / n);
  domain_area_ = spec_.length * spec_.length;

  const double scale = 2.0 * std::numbers::pi / spec_.length;
  const int kmax = spec_.retained_max();
  kx_.resize(modes_);
  ky_.resize(modes_);
  dkx_.resize(modes_);
  dky_.resize(modes_);
  k2_.resize(modes_);
  weight_.resize(modes_);
  retained_.resize(modes_);
  for (int i = 0; i < n; ++i) {
    const int ix = i <= n / 2 ? i : i - n;
    for (std::size_t j = 0; j < half_; ++j) {
      const std::size_t m = static_cast<std::size_t>(i) * half_ + j;
      const int iy = static_cast<int>(j);
      kx_[m] = scale * ix;
      ky_[m] = scale * iy;
      dkx_[m] = ix == n / 2 ? 0.0 : kx_[m];
      dky_[m] = iy == n / 2 ? 0.0 : ky_[m];
      k2_[m] = kx_[m] * kx_[m] + ky_[m] * ky_[m];
      weight_[m] = (iy == 0 || iy == n / 2) ? 1.0 : 2.0;
      retained_[m] = (std::abs(ix) <= kmax && iy <= kmax) ? 1 : 0;
    }
  }
  fft_ = std::make_unique<FftPlan>(n);
}

Grid::~Grid() = default;

double Grid::x_coord(std::size_t p) const noexcept {
  return spec_.length * static_cast<double>(p / static_cast<std::size_t>(spec_.n)) / spec_.n;
}

double Grid::y_coord(std::size_t p) const noexcept {
  return spec_.length * static_cast<double>(p % static_cast<std::size_t>(spec_.n)) / spec_.n;
}

void Grid::forward(std::span<const double> values, std::span<Complex> coeffs) const {
  fft_->forward(values, coeffs);
}

void Grid::inverse(std::span<const Complex> coeffs, std::span<double> values) const {
  fft_->inverse(coeffs, values);
}

GridPtr make_grid(const GridSpec& spec) {
  static std::mutex mutex;
  static std::vector<std::pair<GridSpec, std::weak_ptr<const Grid>>> cache;
  std::lock_guard lock(mutex);
  for (auto& [s, weak] : cache) {
    if (s == spec) {
      if (auto g = weak.lock()) return g;
    }
  }
  auto grid = std::make_shared<const Grid>(spec);
  std::erase_if(cache, [](const auto& e) { return e.second.expired(); });
  cache.emplace_back(spec, grid);
  return grid;
}

}  // namespace vche
