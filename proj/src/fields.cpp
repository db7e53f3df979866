#include "vche/fields.hpp"

#include <cmath>

#include "kernels.hpp"
#include "vche/errors.hpp"
#include "vche/operators.hpp"

namespace vche {

SpectralField from_stream_modes(const GridPtr& grid, std::span<const StreamMode> modes) {
  PhysicalField v(grid);
  const double s = 2.0 * std::numbers::pi / grid->spec().length;
  for (const auto& mode : modes) {
    for (std::size_t p = 0; p < grid->points(); ++p) {
      const double th = s * (mode.kx * grid->x_coord(p) + mode.ky * grid->y_coord(p));
      const double dpsi = -mode.cos_amp * std::sin(th) + mode.sin_amp * std::cos(th);
      v.comp(0)[p] += s * mode.ky * dpsi;
      v.comp(1)[p] -= s * mode.kx * dpsi;
    }
  }
  SpectralField u = to_spectral(v);
  detail::project_dealias(u);
  return u;
}

SpectralField taylor_green(const GridPtr& grid, double amplitude) {
  // sin x sin y = (cos(x - y) - cos(x + y)) / 2
  const StreamMode modes[] = {{1, -1, 0.5 * amplitude, 0.0}, {1, 1, -0.5 * amplitude, 0.0}};
  return from_stream_modes(grid, modes);
}

SpectralField random_field(const GridPtr& grid, std::mt19937_64& rng, double l2_norm,
                           double decay) {
  if (!(l2_norm >= 0.0)) throw InvalidArgument("random_field: norm must be >= 0");
  std::normal_distribution<double> normal;
  const Grid& g = *grid;
  std::vector<Complex> psi(g.modes());
  for (std::size_t m = 0; m < g.modes(); ++m) {
    const double re = normal(rng);
    const double im = normal(rng);
    if (!g.retained(m) || g.k2(m) == 0.0) continue;
    psi[m] = Complex(re, im) * std::pow(1.0 + g.k2(m), -decay);
  }
  // round trip through physical space enforces the conjugate symmetry of the j = 0 line
  std::vector<double> values(g.points());
  g.inverse(psi, values);
  g.forward(values, psi);

  SpectralField u(grid);
  const Complex i{0.0, 1.0};
  for (std::size_t m = 0; m < g.modes(); ++m) {
    u.comp(0)[m] = i * g.dky(m) * psi[m];
    u.comp(1)[m] = -i * g.dkx(m) * psi[m];
  }
  detail::project_dealias(u);
  const double n = norms(u).l2;
  if (n > 0.0) u *= l2_norm / n;
  return u;
}

}  // namespace vche
