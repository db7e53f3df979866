#pragma once

#include <random>
#include <span>

#include "vche/spectral_field.hpp"

namespace vche {

/// One term a*cos(k.x) + b*sin(k.x) of a stream function; wavenumbers are
/// integer multiples of 2*pi/length.
struct StreamMode {
  int kx = 0;
  int ky = 0;
  double cos_amp = 0.0;
  double sin_amp = 0.0;
};

/// Velocity u = (d_y psi, -d_x psi) of the stream function built from `modes`,
/// projected and dealiased.
SpectralField from_stream_modes(const GridPtr& grid, std::span<const StreamMode> modes);

/// psi = amplitude * sin(x) sin(y); the convection term of this field vanishes.
SpectralField taylor_green(const GridPtr& grid, double amplitude);

/// Random valid field with spectrum decaying like (1+|k|^2)^(-decay), scaled to
/// the requested L2 norm. Draws only from `rng`.
SpectralField random_field(const GridPtr& grid, std::mt19937_64& rng, double l2_norm,
                           double decay = 1.0);

}  // namespace vche
