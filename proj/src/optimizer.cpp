#include "vche/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <string>

namespace vche {

namespace {

bool at_bound(double v, double bound) {
  return std::isfinite(bound) && std::abs(v - bound) <= 1e-12 * std::max(1.0, std::abs(bound));
}

std::uint64_t sample_seed(std::uint64_t seed, std::size_t index) {
  // splitmix64 finalizer keeps per-sample streams independent of thread scheduling
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

void BoxConstraint::validate() const {
  for (int c = 0; c < kDim; ++c) {
    if (std::isnan(lower[c]) || std::isnan(upper[c])) throw InvalidArgument("box: NaN bound");
    if (lower[c] > upper[c]) throw InvalidArgument("box: lower bound exceeds upper bound");
  }
}

bool BoxConstraint::contains(const ControlField& h) const {
  for (int n = 0; n < h.intervals(); ++n) {
    for (int c = 0; c < kDim; ++c) {
      for (double v : h.comp(n, c)) {
        if (!(v >= lower[c] && v <= upper[c])) return false;
      }
    }
  }
  return true;
}

ControlField project_control(const ControlField& h, const BoxConstraint& box) {
  box.validate();
  ControlField out = h;
  for (int n = 0; n < h.intervals(); ++n) {
    for (int c = 0; c < kDim; ++c) {
      for (double& v : out.comp(n, c)) v = std::clamp(v, box.lower[c], box.upper[c]);
    }
  }
  return out;
}

double vi_residual(const ControlField& h, const ControlField& g, const BoxConstraint& box) {
  h.require_compatible(g, "vi_residual");
  ControlField trial = h;
  trial.axpy(-1.0, g);
  return norm(h - project_control(trial, box));
}

OptimizeReport optimize(const ReducedProblem& problem, const ControlField& h_init, const BoxConstraint& box,
                        const OptimizeOptions& opts) {
  box.validate();
  if (!(opts.tol >= 0.0) || opts.max_iter < 0 || !(opts.sufficient_decrease > 0.0 && opts.sufficient_decrease < 1.0) ||
      !(opts.backtrack > 0.0 && opts.backtrack < 1.0) || !(opts.step_min > 0.0) || !(opts.step_max >= opts.step_min)) {
    throw InvalidArgument("optimize: invalid options");
  }
  if (!box.contains(h_init)) throw InvalidArgument("optimize: initial control is infeasible");

  OptimizeReport rep{{}, h_init, h_init, 0.0, 0.0, 0, false};
  ControlField h = h_init;
  auto eval = problem.evaluate(h);
  ControlField g = problem.gradient(eval, h);
  double step = std::clamp(opts.initial_step, opts.step_min, opts.step_max);

  auto finish = [&](double vi) {
    rep.control = h;
    rep.gradient = g;
    rep.cost = eval.cost;
    rep.vi_residual = vi;
  };

  for (int iter = 0;; ++iter) {
    const double vi = vi_residual(h, g, box);
    rep.iterates.push_back({iter, eval.cost, norm(g), vi, 0.0, 0});
    if (vi <= opts.tol) {
      rep.converged = true;
      finish(vi);
      return rep;
    }
    if (iter >= opts.max_iter) {
      finish(vi);
      return rep;
    }

    double s = step;
    bool accepted = false;
    int backtracks = 0;
    for (; backtracks <= opts.max_backtracks; ++backtracks, s *= opts.backtrack) {
      ControlField trial = h;
      trial.axpy(-s, g);
      trial = project_control(trial, box);
      const ControlField d = trial - h;
      auto trial_eval = problem.evaluate(trial);
      if (trial_eval.cost <= eval.cost + opts.sufficient_decrease * inner(g, d)) {
        ControlField g_new = problem.gradient(trial_eval, trial);
        const ControlField y = g_new - g;
        const double sy = inner(d, y);
        const double ss = inner(d, d);
        step = sy > 0.0 ? std::clamp(ss / sy, opts.step_min, opts.step_max) : opts.step_max;
        h = std::move(trial);
        g = std::move(g_new);
        eval = std::move(trial_eval);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      finish(vi);
      throw LineSearchFailure("optimize: line search stalled at iteration " + std::to_string(iter), rep);
    }
    rep.iterates.back().step = s;
    rep.iterates.back().backtracks = backtracks;
    ++rep.iterations;
  }
}

SscReport ssc_probe(const ReducedProblem& problem, const ControlField& h_star, const BoxConstraint& box,
                    const SscOptions& opts) {
  box.validate();
  if (opts.samples < 0 || !(opts.activity_tol >= 0.0) || opts.threads < 1) {
    throw InvalidArgument("ssc_probe: invalid options");
  }
  SscReport rep;
  if (opts.samples == 0) return rep;

  const auto eval = problem.evaluate(h_star);
  const AdjointTrajectory adj = problem.adjoint(eval, h_star);
  const ControlField g = reduced_gradient(eval.state, adj, h_star, problem.cost());

  // Nodes at a bound are frozen; the sign condition of the tangent cone there is
  // met by zeroing. Strongly active nodes are a subset of these.
  const double gmax = max_abs(g);
  std::vector<unsigned char> free(h_star.values().size(), 1);
  ControlField g_free = g;
  for (int n = 0; n < h_star.intervals(); ++n) {
    for (int c = 0; c < kDim; ++c) {
      const auto hv = h_star.comp(n, c);
      const auto gv = g.comp(n, c);
      auto gf = g_free.comp(n, c);
      const std::size_t base = (static_cast<std::size_t>(n) * kDim + c) * hv.size();
      for (std::size_t p = 0; p < hv.size(); ++p) {
        if (at_bound(hv[p], box.lower[c]) || at_bound(hv[p], box.upper[c])) {
          free[base + p] = 0;
          gf[p] = 0.0;
          if (std::abs(gv[p]) > opts.activity_tol * gmax) ++rep.strongly_active_nodes;
        }
      }
    }
  }
  rep.free_nodes = static_cast<std::size_t>(std::count(free.begin(), free.end(), 1));
  rep.frozen_nodes = free.size() - rep.free_nodes;
  if (rep.free_nodes == 0) throw NoCriticalDirections("ssc_probe: every control node is active");
  const double gg = inner(g_free, g_free);

  auto quotient = [&](std::size_t i) {
    std::mt19937_64 rng(sample_seed(opts.seed, i));
    std::normal_distribution<double> normal;
    ControlField k(h_star.grid_ptr(), h_star.intervals(), h_star.dt());
    auto kv = k.values();
    for (std::size_t j = 0; j < kv.size(); ++j) {
      const double v = normal(rng);
      kv[j] = free[j] ? v : 0.0;
    }
    if (gg > 0.0) k.axpy(-inner(k, g_free) / gg, g_free);
    const double kk = inner(k, k);
    const double q = hessian_quadratic_form(eval.state, adj, h_star, problem.cost(), k, k);
    return q / kk;
  };

  const auto total = static_cast<std::size_t>(opts.samples);
  rep.rayleigh_quotients.assign(total, 0.0);
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(opts.threads), total);
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < total; i += workers) rep.rayleigh_quotients[i] = quotient(i);
    }));
  }
  for (auto& j : jobs) j.get();
  rep.mu_estimate = *std::min_element(rep.rayleigh_quotients.begin(), rep.rayleigh_quotients.end());
  return rep;
}

}  // namespace vche
