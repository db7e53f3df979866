#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vche/adjoint.hpp"
#include "vche/fields.hpp"
#include "vche/optimizer.hpp"
#include "vche/problem.hpp"
#include "vche/stability.hpp"

namespace vche::cli {

/// Raised for every configuration problem; mapped to exit code 2.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A velocity field description: zero | taylor_green | modes | random | file.
struct FieldSpec {
  std::string kind = "zero";
  double amplitude = 1.0;          // taylor_green
  std::vector<StreamMode> modes;   // modes
  double l2_norm = 1.0;            // random
  double decay = 1.0;              // random
  std::string path;                // file
};

/// A time-constant forcing description: zero | kolmogorov | modes | random.
/// kolmogorov is (amplitude * sin(wavenumber * y), 0); modes uses the velocity
/// of a stream function; random draws i.i.d. normal node values times amplitude.
struct ForcingSpec {
  std::string kind = "zero";
  double amplitude = 1.0;
  int wavenumber = 2;
  std::vector<StreamMode> modes;
};

/// Tracking data: zero | uncontrolled (u_d = S(0)) | reachable (u_d = S(forcing)) | file (u_T from file, u_d = 0).
struct TargetSpec {
  std::string kind = "zero";
  ForcingSpec forcing;
  std::string path;
};

struct GradCheckSpec {
  int directions = 10;
  std::vector<double> deltas{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  std::vector<double> taylor_t{1e-1, 1e-2, 1e-3};
  double direction_norm = 200.0;  // L2(Q) norm of the random directions
  double gradient_tol = 1e-6;
  double hessian_tol = 1e-4;
  double first_order_min = 1.9;
  double second_order_min = 2.7;
};

struct RunConfig {
  ProblemConfig problem;
  FieldSpec initial_state;
  ForcingSpec control;  // forcing of simulate and initial guess of the optimizer
  QuadraticTracking::Weights weights;
  TargetSpec target;
  BoxConstraint box;
  OptimizeOptions optimizer;
  double activity_tol = 1e-6;
  int ssc_samples = 100;
  std::vector<std::uint64_t> ssc_seeds{1, 2};
  double ssc_stability = 0.2;  // allowed relative spread of mu across seeds
  std::vector<double> epsilons = default_epsilons();
  FieldSpec phi;  // kind "default" selects default_perturbation_shape
  double ratio_band = 3.0;
  bool cold_start = false;
  GradCheckSpec grad_check;
  int export_stride = 50;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  bool negate_bhat = false;
};

/// Parses and validates a configuration document. Relative file paths are
/// resolved against `base_dir` and must exist. Unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical document with every field spelled out; parse_config(to_json(c)) == c.
nlohmann::ordered_json to_json(const RunConfig& cfg);

/// Independent stream seed for one consumer of cfg.seed (tags are fixed per use).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

// Builders; all randomness is derived from cfg.seed.
GridPtr build_grid(const RunConfig& cfg);
SpectralField build_field(const FieldSpec& spec, const GridPtr& grid, std::uint64_t seed);
ControlField build_forcing(const ForcingSpec& spec, const RunConfig& cfg, const GridPtr& grid, std::uint64_t seed);
std::shared_ptr<QuadraticTracking> build_cost(const RunConfig& cfg, const GridPtr& grid, const SpectralField& u0);
ReducedProblem build_problem(const RunConfig& cfg);

}  // namespace vche::cli
