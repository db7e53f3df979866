#include "vche/snapshot_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "kernels.hpp"
#include "vche/errors.hpp"
#include "vche/operators.hpp"

namespace vche {

namespace {

constexpr char kMagic[4] = {'V', 'C', 'H', 'E'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "snapshot IO assumes a little-endian host");

void put_u32(std::ofstream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint32_t get_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const SpectralField& u) {
  const PhysicalField v = to_physical(u);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(u.grid().spec().dim));
  put_u32(out, static_cast<std::uint32_t>(u.grid().n()));
  put_u32(out, static_cast<std::uint32_t>(kDim));
  for (int c = 0; c < kDim; ++c) {
    const auto vals = v.comp(c);
    out.write(reinterpret_cast<const char*>(vals.data()), static_cast<std::streamsize>(vals.size_bytes()));
  }
  if (!out) throw Error("write failed: " + path.string());
}

SpectralField read_snapshot(const std::filesystem::path& path, const GridPtr& grid) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw Error(path.string() + ": not a snapshot file");
  const std::uint32_t version = get_u32(in);
  const std::uint32_t dim = get_u32(in);
  const std::uint32_t n = get_u32(in);
  const std::uint32_t comps = get_u32(in);
  if (!in || version != kVersion) throw Error(path.string() + ": unsupported snapshot version");
  if (dim != static_cast<std::uint32_t>(grid->spec().dim) || n != static_cast<std::uint32_t>(grid->n()) ||
      comps != static_cast<std::uint32_t>(kDim)) {
    throw ConfigMismatch(path.string() + ": snapshot grid does not match the configured grid");
  }
  PhysicalField v(grid);
  for (int c = 0; c < kDim; ++c) {
    auto vals = v.comp(c);
    in.read(reinterpret_cast<char*>(vals.data()), static_cast<std::streamsize>(vals.size_bytes()));
  }
  if (!in) throw Error(path.string() + ": truncated snapshot");
  SpectralField u = to_spectral(v);
  detail::project_dealias(u);
  return u;
}

void export_trajectory(const StateTrajectory& traj, const std::filesystem::path& dir, int stride,
                       const std::string& prefix) {
  if (stride < 1) throw InvalidArgument("export_trajectory: stride must be >= 1");
  std::filesystem::create_directories(dir);
  const ProblemConfig& cfg = traj.config;
  nlohmann::ordered_json manifest;
  manifest["config"] = {{"nu", cfg.params.nu},
                        {"alpha", cfg.params.alpha},
                        {"t_final", cfg.t_final},
                        {"dt", cfg.dt},
                        {"n", cfg.grid.n},
                        {"length", cfg.grid.length},
                        {"dealias_fraction", cfg.grid.dealias_fraction}};
  manifest["steps"] = traj.steps();
  manifest["stride"] = stride;
  auto nodes = nlohmann::ordered_json::array();
  for (int n = 0; n <= traj.steps(); ++n) {
    if (n % stride != 0 && n != traj.steps()) continue;
    char index[16];
    std::snprintf(index, sizeof index, "%06d", n);
    const std::string name = prefix + "_" + index + ".vche";
    const SpectralField& u = traj.snapshots[static_cast<std::size_t>(n)];
    write_snapshot(dir / name, u);
    const FieldNorms fn = norms(u);
    nodes.push_back({{"node", n}, {"t", cfg.time(n)}, {"file", name}, {"l2", fn.l2}, {"h1", fn.h1}, {"h2", fn.h2},
                     {"h3", fn.h3}});
  }
  manifest["nodes"] = std::move(nodes);
  std::ofstream out(dir / (prefix + "_manifest.json"), std::ios::trunc);
  if (!out) throw Error("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

}  // namespace vche
