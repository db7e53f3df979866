#pragma once

#include <filesystem>
#include <string>

#include "vche/forward.hpp"
#include "vche/spectral_field.hpp"

namespace vche {

/// Field snapshot file: "VCHE", then u32 version (1), u32 dim, u32 n, u32
/// component count, then little-endian float64 physical values, component by
/// component, each in row-major node order.
void write_snapshot(const std::filesystem::path& path, const SpectralField& u);

/// Reads a snapshot written for a grid of the same size. Values are transformed,
/// projected and dealiased. Throws Error on malformed files and ConfigMismatch
/// when dim or n differ from `grid`.
SpectralField read_snapshot(const std::filesystem::path& path, const GridPtr& grid);

/// Writes every `stride`-th node (and the last) as snapshot files into `dir`
/// together with <prefix>_manifest.json (config, step count, files and norms per node).
void export_trajectory(const StateTrajectory& traj, const std::filesystem::path& dir, int stride = 1,
                       const std::string& prefix = "state");

}  // namespace vche
