#include "vche/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "vche/energy.hpp"
#include "vche/snapshot_io.hpp"

namespace vche::cli {

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

// Tags for derive_seed; config.cpp owns 1 (initial state) and 3 (target forcing).
constexpr std::uint64_t kControlSeed = 2;
constexpr std::uint64_t kDirectionSeed = 4;
constexpr std::uint64_t kPhiSeed = 5;

void report_error(const char* kind, const char* type, const std::string& msg) {
  const ordered_json j{{"error", kind}, {"type", type}, {"message", msg}};
  std::cerr << j.dump() << '\n';
}

// Maps exceptions onto the exit-code contract.
int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    report_error("config", "ConfigError", e.what());
    return kConfigError;
  } catch (const InvalidArgument& e) {
    report_error("config", "InvalidArgument", e.what());
    return kConfigError;
  } catch (const ConfigMismatch& e) {
    report_error("config", "ConfigMismatch", e.what());
    return kConfigError;
  } catch (const NonFinite& e) {
    report_error("solver", "NonFinite", e.what());
    return kSolverError;
  } catch (const LineSearchStalled& e) {
    report_error("solver", "LineSearchStalled", e.what());
    return kSolverError;
  } catch (const NoCriticalDirections& e) {
    report_error("solver", "NoCriticalDirections", e.what());
    return kSolverError;
  } catch (const NominalNotCertified& e) {
    report_error("solver", "NominalNotCertified", e.what());
    return kSolverError;
  } catch (const std::exception& e) {
    report_error("solver", "Error", e.what());
    return kSolverError;
  }
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Csv {
 public:
  explicit Csv(std::initializer_list<const char*> header) {
    bool first = true;
    for (const char* h : header) {
      text_ += first ? "" : ",";
      text_ += h;
      first = false;
    }
    text_ += '\n';
  }
  Csv& row() {
    if (open_) text_ += '\n';
    open_ = true;
    fresh_ = true;
    return *this;
  }
  Csv& operator<<(double v) { return cell(num(v)); }
  Csv& operator<<(int v) { return cell(std::to_string(v)); }
  Csv& operator<<(unsigned long v) { return cell(std::to_string(v)); }
  std::string str() const { return open_ ? text_ + '\n' : text_; }

 private:
  Csv& cell(const std::string& s) {
    text_ += fresh_ ? "" : ",";
    text_ += s;
    fresh_ = false;
    return *this;
  }
  std::string text_;
  bool open_ = false;
  bool fresh_ = true;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

void write_json(const fs::path& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

// Creates the output directory and records the resolved configuration. Called
// only after everything that can fail validation has been built.
fs::path prepare_output(const RunConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  write_json(dir / "resolved_config.json", to_json(cfg));
  return dir;
}

ordered_json opt_json(const double* v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ControlField initial_control(const RunConfig& cfg, const GridPtr& grid) {
  return build_forcing(cfg.control, cfg, grid, derive_seed(cfg.seed, kControlSeed));
}

std::string iterates_csv(const OptimizeReport& rep) {
  Csv csv{"iteration", "cost", "grad_norm", "vi_residual", "step", "backtracks"};
  for (const auto& r : rep.iterates) {
    csv.row() << r.iteration << r.cost << r.grad_norm << r.vi_residual << r.step << r.backtracks;
  }
  return csv.str();
}

bool monotone_cost(const OptimizeReport& rep) {
  for (std::size_t i = 1; i < rep.iterates.size(); ++i) {
    if (rep.iterates[i].cost > rep.iterates[i - 1].cost) return false;
  }
  return true;
}

ordered_json optimize_json(const OptimizeReport& rep, const RunConfig& cfg) {
  return {{"converged", rep.converged},
          {"iterations", rep.iterations},
          {"cost", rep.cost},
          {"vi_residual", rep.vi_residual},
          {"tol", cfg.optimizer.tol},
          {"max_iter", cfg.optimizer.max_iter},
          {"monotone_cost", monotone_cost(rep)},
          {"initial_cost", rep.iterates.empty() ? 0.0 : rep.iterates.front().cost},
          {"control_norm", norm(rep.control)},
          {"control_max_abs", max_abs(rep.control)},
          {"gradient_norm", norm(rep.gradient)}};
}

// Runs the optimizer from the projected configured control. A stalled line
// search still leaves its iterate table behind before the error propagates.
OptimizeReport run_optimizer(const RunConfig& cfg, const ReducedProblem& problem, const fs::path& dir,
                             const std::string& prefix) {
  const ControlField h0 = project_control(initial_control(cfg, problem.initial_state().grid_ptr()), cfg.box);
  try {
    OptimizeReport rep = optimize(problem, h0, cfg.box, cfg.optimizer);
    write_text(dir / (prefix + "_iterates.csv"), iterates_csv(rep));
    return rep;
  } catch (const LineSearchFailure& e) {
    write_text(dir / (prefix + "_iterates.csv"), iterates_csv(e.report()));
    throw;
  }
}

ControlField random_direction(const GridPtr& grid, const ProblemConfig& pc, std::mt19937_64& rng, double target_norm) {
  ControlField k(grid, pc.steps(), pc.dt);
  std::normal_distribution<double> normal;
  for (double& v : k.values()) v = normal(rng);
  k *= target_norm / norm(k);
  return k;
}

double rel_err(double approx, double exact) {
  const double scale = std::max(std::abs(exact), std::abs(approx));
  return scale > 0.0 ? std::abs(approx - exact) / scale : 0.0;
}

std::vector<double> observed_orders(const std::vector<double>& t, const std::vector<double>& r) {
  std::vector<double> out;
  for (std::size_t i = 1; i < t.size(); ++i) out.push_back(std::log(r[i - 1] / r[i]) / std::log(t[i - 1] / t[i]));
  return out;
}

int threads_from_env() {
  if (const char* env = std::getenv("VCHE_OPT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError("VCHE_OPT_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  return 1;
}

}  // namespace

int cmd_simulate(const RunConfig& cfg) {
  return guarded([&] {
    const GridPtr grid = build_grid(cfg);
    const SpectralField u0 = build_field(cfg.initial_state, grid, derive_seed(cfg.seed, 1));
    const ControlField h = initial_control(cfg, grid);
    require_valid_field(u0, "initial_state");
    const StateTrajectory traj = solve_state(u0, h, cfg.problem);
    const EnergyLedger led = energy_report(traj, h);

    const fs::path dir = prepare_output(cfg);
    export_trajectory(traj, dir / "trajectory", cfg.export_stride);
    Csv csv{"node", "time", "energy", "dissipation", "lhs", "rhs", "convection_defect", "identity_residual"};
    for (std::size_t n = 0; n < led.time.size(); ++n) {
      csv.row() << n << led.time[n] << led.energy[n] << led.dissipation[n] << led.lhs[n] << led.rhs[n]
                << led.convection_defect[n] << led.identity_residual[n];
    }
    write_text(dir / "energy_ledger.csv", csv.str());
    const auto advisory = cfl_advisory(cfg.problem, u0);
    if (advisory) std::cerr << "notice: " << *advisory << '\n';
    const ordered_json summary{{"steps", traj.steps()},
                               {"energy_inequality_holds", led.inequality_holds},
                               {"constant", led.constant},
                               {"c_min", led.c_min},
                               {"max_violation", led.max_violation},
                               {"max_energy_increase", led.max_energy_increase},
                               {"max_identity_residual", led.max_identity_residual},
                               {"momentum_residual", momentum_residual(traj, h)},
                               {"initial_energy", led.energy.front()},
                               {"final_energy", led.energy.back()},
                               {"cfl_advisory", advisory ? ordered_json(*advisory) : ordered_json(nullptr)}};
    write_json(dir / "simulate.json", summary);
    return kOk;
  });
}

int cmd_grad_check(const RunConfig& cfg) {
  return guarded([&] {
    const ReducedProblem problem = build_problem(cfg);
    const GridPtr grid = problem.initial_state().grid_ptr();
    const ControlField h = initial_control(cfg, grid);
    const GradCheckSpec& gc = cfg.grad_check;
    const fs::path dir = prepare_output(cfg);

    const auto base = problem.evaluate(h);
    std::mt19937_64 rng(derive_seed(cfg.seed, kDirectionSeed));
    std::vector<ControlField> dirs;
    for (int i = 0; i < gc.directions; ++i) dirs.push_back(random_direction(grid, cfg.problem, rng, gc.direction_norm));

    ordered_json report;
    const auto& w = cfg.weights;
    const bool zero_weights = w.alpha_Q == 0.0 && w.alpha_T == 0.0 && w.gamma == 0.0;
    bool gradient_ok = true;
    bool hessian_ok = true;
    if (zero_weights) {
      std::cerr << "notice: all cost weights vanish, the reduced gradient is identically zero; gradient and "
                   "Hessian checks skipped\n";
      report["gradient_check"] = "skipped";
      report["hessian_check"] = "skipped";
    } else {
      const ControlField g = problem.gradient(base, h);
      const AdjointTrajectory adj = problem.adjoint(base, h);
      Csv csv{"direction", "delta", "central_difference", "adjoint", "gradient_rel_err", "second_difference",
              "hessian", "hessian_rel_err"};
      double worst_grad = 0.0, worst_hess = 0.0;
      for (std::size_t i = 0; i < dirs.size(); ++i) {
        const ControlField& k = dirs[i];
        const double gk = inner(g, k);
        const double q = hessian_quadratic_form(base.state, adj, h, problem.cost(), k, k);
        double best_grad = std::numeric_limits<double>::infinity();
        double best_hess = std::numeric_limits<double>::infinity();
        for (double d : gc.deltas) {
          const double jp = problem.cost_at(h + d * k);
          const double jm = problem.cost_at(h - d * k);
          const double fd = (jp - jm) / (2.0 * d);
          const double sd = (jp - 2.0 * base.cost + jm) / (d * d);
          const double eg = rel_err(fd, gk), eh = rel_err(sd, q);
          best_grad = std::min(best_grad, eg);
          best_hess = std::min(best_hess, eh);
          csv.row() << i << d << fd << gk << eg << sd << q << eh;
        }
        worst_grad = std::max(worst_grad, best_grad);
        worst_hess = std::max(worst_hess, best_hess);
      }
      write_text(dir / "gradient_sweep.csv", csv.str());
      gradient_ok = worst_grad <= gc.gradient_tol;
      hessian_ok = worst_hess <= gc.hessian_tol;
      report["gradient_check"] = {{"worst_best_rel_err", worst_grad}, {"tol", gc.gradient_tol}, {"pass", gradient_ok}};
      report["hessian_check"] = {{"worst_best_rel_err", worst_hess}, {"tol", gc.hessian_tol}, {"pass", hessian_ok}};
    }

    // Taylor remainders of the state map along the first direction
    const ControlField& k = dirs.front();
    const TangentTrajectory z = solve_linearized(base.state, k);
    const TangentTrajectory w2 = solve_second(base.state, z, z);
    std::vector<double> r1, r2;
    for (double t : gc.taylor_t) {
      const StateTrajectory tr = solve_state(problem.initial_state(), h + t * k, cfg.problem);
      std::vector<SpectralField> e1, e2;
      for (std::size_t n = 0; n < tr.snapshots.size(); ++n) {
        SpectralField e = tr.snapshots[n] - base.state.snapshots[n];
        e.axpy(-t, z.snapshots[n]);
        e1.push_back(e);
        e.axpy(-0.5 * t * t, w2.snapshots[n]);
        e2.push_back(std::move(e));
      }
      r1.push_back(trajectory_norm(e1, cfg.problem.dt));
      r2.push_back(trajectory_norm(e2, cfg.problem.dt));
    }
    const auto o1 = observed_orders(gc.taylor_t, r1);
    const auto o2 = observed_orders(gc.taylor_t, r2);
    Csv taylor{"t", "first_order_remainder", "second_order_remainder", "first_order_rate", "second_order_rate"};
    for (std::size_t i = 0; i < gc.taylor_t.size(); ++i) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      taylor.row() << gc.taylor_t[i] << r1[i] << r2[i] << (i ? o1[i - 1] : nan) << (i ? o2[i - 1] : nan);
    }
    write_text(dir / "taylor.csv", taylor.str());
    const double min1 = *std::min_element(o1.begin(), o1.end());
    const double min2 = *std::min_element(o2.begin(), o2.end());
    const bool first_ok = min1 >= gc.first_order_min;
    const bool second_ok = min2 >= gc.second_order_min;
    report["taylor"] = {{"first_order_min_rate", min1}, {"first_order_threshold", gc.first_order_min},
                        {"first_order_pass", first_ok}, {"second_order_min_rate", min2},
                        {"second_order_threshold", gc.second_order_min}, {"second_order_pass", second_ok}};
    const bool pass = gradient_ok && hessian_ok && first_ok && second_ok;
    report["pass"] = pass;
    write_json(dir / "grad_check.json", report);
    return pass ? kOk : kVerificationFailed;
  });
}

int cmd_optimize(const RunConfig& cfg) {
  return guarded([&] {
    const ReducedProblem problem = build_problem(cfg);
    const fs::path dir = prepare_output(cfg);
    const OptimizeReport rep = run_optimizer(cfg, problem, dir, "optimize");
    write_json(dir / "optimize.json", optimize_json(rep, cfg));
    return rep.converged ? kOk : kVerificationFailed;
  });
}

int cmd_ssc_probe(const RunConfig& cfg, int threads) {
  return guarded([&] {
    const ReducedProblem problem = build_problem(cfg);
    if (cfg.ssc_samples < 1) throw ConfigError("ssc-probe needs ssc_samples >= 1");
    const fs::path dir = prepare_output(cfg);
    const OptimizeReport rep = run_optimizer(cfg, problem, dir, "optimize");

    Csv csv{"seed", "sample", "rayleigh_quotient"};
    ordered_json seeds = ordered_json::array();
    std::vector<double> mus;
    SscReport first;
    for (std::size_t s = 0; s < cfg.ssc_seeds.size(); ++s) {
      const SscOptions o{cfg.ssc_samples, cfg.activity_tol, cfg.ssc_seeds[s], threads};
      const SscReport r = ssc_probe(problem, rep.control, cfg.box, o);
      for (std::size_t i = 0; i < r.rayleigh_quotients.size(); ++i) csv.row() << cfg.ssc_seeds[s] << i << r.rayleigh_quotients[i];
      mus.push_back(*r.mu_estimate);
      seeds.push_back({{"seed", cfg.ssc_seeds[s]}, {"mu_estimate", *r.mu_estimate}});
      if (s == 0) first = r;
    }
    write_text(dir / "ssc_samples.csv", csv.str());

    const double mu = *std::min_element(mus.begin(), mus.end());
    double spread = 0.0;
    for (double m : mus) spread = std::max(spread, std::abs(m - mus.front()) / std::abs(mus.front()));
    const bool positive = mu > 0.0;
    const bool stable = spread <= cfg.ssc_stability;
    const ordered_json out{{"optimize", optimize_json(rep, cfg)},
                           {"seeds", seeds},
                           {"mu_estimate", mu},
                           {"relative_spread", spread},
                           {"allowed_spread", cfg.ssc_stability},
                           {"free_nodes", first.free_nodes},
                           {"frozen_nodes", first.frozen_nodes},
                           {"strongly_active_nodes", first.strongly_active_nodes},
                           {"mu_positive", positive},
                           {"mu_stable", stable}};
    write_json(dir / "ssc.json", out);
    return rep.converged && positive && stable ? kOk : kVerificationFailed;
  });
}

int cmd_stability(const RunConfig& cfg, int threads) {
  return guarded([&] {
    const ReducedProblem problem = build_problem(cfg);
    const GridPtr grid = problem.initial_state().grid_ptr();
    const PerturbationFamily family{build_field(cfg.phi, grid, derive_seed(cfg.seed, kPhiSeed)), cfg.epsilons};
    family.validate();
    if (cfg.ssc_samples < 1) throw ConfigError("stability needs ssc_samples >= 1");
    const fs::path dir = prepare_output(cfg);

    const OptimizeReport nominal = run_optimizer(cfg, problem, dir, "nominal");
    const SscOptions so{cfg.ssc_samples, cfg.activity_tol, cfg.ssc_seeds.front(), threads};
    const SscReport ssc = ssc_probe(problem, nominal.control, cfg.box, so);
    StabilityOptions opts;
    opts.optimize = cfg.optimizer;
    opts.ratio_band = cfg.ratio_band;
    opts.cold_start = cfg.cold_start;
    opts.threads = threads;
    const StabilityReport rep = stability_sweep(family, problem, nominal, *ssc.mu_estimate, cfg.box, opts);

    Csv csv{"eps", "phi_norm", "control_deviation", "control_ratio", "state_deviation", "state_ratio",
            "adjoint_deviation", "adjoint_ratio", "iterations", "tolerance", "vi_residual", "cost_at_nominal",
            "cost", "curvature_0", "curvature_half", "curvature_1", "curvature_ok"};
    for (const auto& r : rep.records) {
      csv.row() << r.eps << r.phi_norm << r.control_deviation << r.control_ratio << r.state_adjoint.state_deviation
                << r.state_adjoint.state_ratio << r.state_adjoint.adjoint_deviation << r.state_adjoint.adjoint_ratio
                << r.iterations << r.tolerance << r.vi_residual << r.cost_at_nominal << r.cost << r.curvature[0]
                << r.curvature[1] << r.curvature[2] << (r.curvature_ok ? 1 : 0);
    }
    write_text(dir / "stability.csv", csv.str());
    const double* eps0 = rep.eps0 ? &*rep.eps0 : nullptr;
    const ordered_json out{{"nominal", optimize_json(nominal, cfg)},
                           {"mu_estimate", rep.mu_estimate},
                           {"ssc_seed", cfg.ssc_seeds.front()},
                           {"control_band", rep.control_band},
                           {"state_band", rep.state_band},
                           {"adjoint_band", rep.adjoint_band},
                           {"ratio_band", cfg.ratio_band},
                           {"eps0", opt_json(eps0)},
                           {"monotone_decay", rep.monotone_decay},
                           {"lipschitz_bounded", rep.lipschitz_bounded},
                           {"state_adjoint_bounded", rep.state_adjoint_bounded},
                           {"curvature_persistent", rep.curvature_persistent},
                           {"all_passed", rep.all_passed()}};
    write_json(dir / "stability.json", out);
    return rep.all_passed() ? kOk : kVerificationFailed;
  });
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Optimal control of the viscous Camassa-Holm equations on the periodic square"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  const char* names[] = {"simulate", "grad-check", "optimize", "ssc-probe", "stability"};
  const char* help[] = {"forward solve, trajectory export and energy ledger",
                        "gradient, Hessian and Taylor-remainder checks",
                        "projected gradient optimization",
                        "optimize, then sample second-order curvature on the critical cone",
                        "perturbation sweep around a certified optimal control"};
  std::vector<CLI::App*> subs;
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], help[i]);
    sub->add_option("--config", config_path, "JSON configuration")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "random seed (overrides seed)");
    sub->add_option("--threads", threads, "worker threads (falls back to VCHE_OPT_THREADS, then 1)")
        ->check(CLI::PositiveNumber);
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("config", "UsageError", e.what());
    return kConfigError;
  }

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (subs[0]->count("--seed") + subs[1]->count("--seed") + subs[2]->count("--seed") + subs[3]->count("--seed") +
        subs[4]->count("--seed")) {
      cfg.seed = seed;
    }
    if (threads == 0) threads = threads_from_env();
  } catch (const ConfigError& e) {
    report_error("config", "ConfigError", e.what());
    return kConfigError;
  }

  if (subs[0]->parsed()) return cmd_simulate(cfg);
  if (subs[1]->parsed()) return cmd_grad_check(cfg);
  if (subs[2]->parsed()) return cmd_optimize(cfg);
  if (subs[3]->parsed()) return cmd_ssc_probe(cfg, threads);
  return cmd_stability(cfg, threads);
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> copy = args;
  std::vector<char*> argv;
  for (auto& a : copy) argv.push_back(a.data());
  argv.push_back(nullptr);
  return run_cli(static_cast<int>(copy.size()), argv.data());
}

}  // namespace vche::cli
