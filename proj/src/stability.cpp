#include "vche/stability.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "vche/fields.hpp"
#include "vche/operators.hpp"

namespace vche {

namespace {

double max_deviation(const std::vector<SpectralField>& a, const std::vector<SpectralField>& b) {
  double worst = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) worst = std::max(worst, norms(a[n] - b[n]).l2);
  return worst;
}

// max/min over positive-eps records; +inf when some ratio vanishes
double band(const std::vector<double>& ratios) {
  if (ratios.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  if (*lo <= 0.0) return *hi <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return *hi / *lo;
}

StabilityRecord run_one(double eps, const PerturbationFamily& family, const ReducedProblem& problem,
                        const OptimizeReport& nominal, double mu, const BoxConstraint& box,
                        const StabilityOptions& opts) {
  StabilityRecord rec;
  rec.eps = eps;
  const SpectralField phi_eps = family.member(eps);
  rec.phi_norm = norms(phi_eps).l2;

  OptimizeOptions o = opts.optimize;
  if (rec.phi_norm > 0.0) o.tol = std::min(o.tol, 0.1 * rec.phi_norm * mu);
  rec.tolerance = o.tol;

  const ControlField& h_hat = nominal.control;
  const ControlField start = opts.cold_start ? problem.zero_control() : h_hat;
  const ReducedProblem perturbed = problem.with_initial_state(problem.initial_state() + phi_eps);
  const OptimizeReport sol = optimize(perturbed, project_control(start, box), box, o);
  rec.iterations = sol.iterations;
  rec.vi_residual = sol.vi_residual;
  rec.cost = sol.cost;
  rec.cost_at_nominal = perturbed.cost_at(h_hat);

  const ControlField d = sol.control - h_hat;
  rec.control_deviation = norm(d);
  rec.control_ratio = rec.phi_norm > 0.0 ? rec.control_deviation / rec.phi_norm : 0.0;
  rec.state_adjoint = state_adjoint_perturbation(problem, h_hat, phi_eps);

  const double dd = inner(d, d);
  if (dd > 0.0) {
    const double thetas[] = {0.0, 0.5, 1.0};
    for (int i = 0; i < 3; ++i) {
      ControlField h_theta = h_hat;
      h_theta.axpy(thetas[i], d);
      const auto eval = problem.evaluate(h_theta);
      const AdjointTrajectory adj = problem.adjoint(eval, h_theta);
      rec.curvature[static_cast<std::size_t>(i)] =
          hessian_quadratic_form(eval.state, adj, h_theta, problem.cost(), d, d) / dd;
      if (rec.curvature[static_cast<std::size_t>(i)] < 0.5 * mu) rec.curvature_ok = false;
    }
  }
  return rec;
}

}  // namespace

void PerturbationFamily::validate() const {
  if (!phi.all_finite() || divergence_defect(phi) > 1e-10 || mean_defect(phi) > 1e-10 ||
      dealias_defect(phi) > 1e-10 * max_abs_coeff(phi)) {
    throw InvalidArgument("perturbation shape must be divergence-free, mean-zero and dealiased");
  }
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!std::isfinite(epsilons[i]) || epsilons[i] < 0.0) throw InvalidArgument("epsilons must be finite and >= 0");
    if (i > 0 && epsilons[i] > epsilons[i - 1]) throw InvalidArgument("epsilons must be non-increasing");
  }
}

SpectralField default_perturbation_shape(const GridPtr& grid) {
  const StreamMode modes[] = {
      {1, 0, 0.6, 0.2}, {0, 1, -0.3, 0.5}, {1, 1, 0.25, -0.15}, {1, -1, 0.1, 0.3}, {2, 0, -0.12, 0.08}, {0, 2, 0.05, 0.1},
  };
  SpectralField phi = from_stream_modes(grid, modes);
  phi *= 1.0 / norms(phi).l2;
  return phi;
}

std::vector<double> default_epsilons() { return {1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4}; }

StateAdjointDeviation state_adjoint_perturbation(const ReducedProblem& nominal, const ControlField& h,
                                                 const SpectralField& phi_eps) {
  StateAdjointDeviation dev;
  dev.phi_norm = norms(phi_eps).l2;
  const auto base = nominal.evaluate(h);
  const AdjointTrajectory base_adj = nominal.adjoint(base, h);
  const ReducedProblem perturbed = nominal.with_initial_state(nominal.initial_state() + phi_eps);
  const auto pert = perturbed.evaluate(h);
  const AdjointTrajectory pert_adj = perturbed.adjoint(pert, h);

  dev.initial_deviation = norms(pert.state.snapshots.front() - base.state.snapshots.front()).l2;
  dev.state_deviation = max_deviation(base.state.snapshots, pert.state.snapshots);
  dev.adjoint_deviation = max_deviation(base_adj.snapshots, pert_adj.snapshots);
  if (dev.phi_norm > 0.0) {
    dev.state_ratio = dev.state_deviation / dev.phi_norm;
    dev.adjoint_ratio = dev.adjoint_deviation / dev.phi_norm;
  }
  return dev;
}

OptimizeReport solve_perturbed(const ReducedProblem& nominal, const SpectralField& phi_eps,
                               const ControlField& h_init, const BoxConstraint& box, const OptimizeOptions& opts) {
  return optimize(nominal.with_initial_state(nominal.initial_state() + phi_eps), h_init, box, opts);
}

StabilityReport stability_sweep(const PerturbationFamily& family, const ReducedProblem& problem,
                                const OptimizeReport& nominal, double mu_estimate, const BoxConstraint& box,
                                const StabilityOptions& opts) {
  family.validate();
  box.validate();
  if (!nominal.converged || nominal.vi_residual > opts.optimize.tol) {
    throw NominalNotCertified("stability_sweep: nominal control is not converged to the requested tolerance");
  }
  if (!(mu_estimate > 0.0)) throw NominalNotCertified("stability_sweep: SSC estimate is not positive");
  if (opts.threads < 1) throw InvalidArgument("stability_sweep: threads must be >= 1");

  StabilityReport rep;
  rep.mu_estimate = mu_estimate;
  const std::size_t total = family.epsilons.size();
  rep.records.resize(total);
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(opts.threads), total));
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < total; i += workers) {
        rep.records[i] = run_one(family.epsilons[i], family, problem, nominal, mu_estimate, box, opts);
      }
    }));
  }
  for (auto& j : jobs) j.get();

  std::vector<double> control_ratios, state_ratios, adjoint_ratios;
  const StabilityRecord* prev = nullptr;
  for (const auto& r : rep.records) {
    if (!(r.eps > 0.0)) continue;
    control_ratios.push_back(r.control_ratio);
    state_ratios.push_back(r.state_adjoint.state_ratio);
    adjoint_ratios.push_back(r.state_adjoint.adjoint_ratio);
    if (prev && !(r.control_deviation < prev->control_deviation)) rep.monotone_decay = false;
    prev = &r;
  }
  rep.control_band = band(control_ratios);
  rep.state_band = band(state_ratios);
  rep.adjoint_band = band(adjoint_ratios);
  rep.lipschitz_bounded = rep.control_band <= opts.ratio_band;
  rep.state_adjoint_bounded = rep.state_band <= opts.ratio_band && rep.adjoint_band <= opts.ratio_band;

  for (auto it = rep.records.rbegin(); it != rep.records.rend(); ++it) {
    if (!it->curvature_ok) break;
    rep.eps0 = it->eps;
  }
  rep.curvature_persistent = rep.eps0.has_value();
  return rep;
}

}  // namespace vche
