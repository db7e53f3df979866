#include "vche/cli/config.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include "vche/snapshot_io.hpp"

namespace vche::cli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Reads one JSON object, remembering which keys were consumed so that the
// rest can be rejected as unknown.
class Section {
 public:
  Section(const json* j, std::string where) : j_(j), where_(std::move(where)) {
    if (j_ && !j_->is_object()) fail("must be an object");
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(where_ + ": " + msg); }
  std::string where(const char* key) const { return where_ + "." + key; }

  const json* find(const char* key) {
    used_.insert(key);
    if (!j_) return nullptr;
    auto it = j_->find(key);
    return it == j_->end() ? nullptr : &*it;
  }

  double number(const char* key, double def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_number()) throw ConfigError(where(key) + ": expected a number");
    const double d = v->get<double>();
    if (!std::isfinite(d)) throw ConfigError(where(key) + ": must be finite");
    return d;
  }

  // null stands for an infinite bound
  double bound(const json& v, double inf, const std::string& at) {
    if (v.is_null()) return inf;
    if (!v.is_number()) throw ConfigError(at + ": expected a number or null");
    return v.get<double>();
  }

  long long integer(const char* key, long long def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
    return v->get<long long>();
  }

  bool boolean(const char* key, bool def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    return v->get<bool>();
  }

  std::string string(const char* key, const std::string& def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_string()) throw ConfigError(where(key) + ": expected a string");
    return v->get<std::string>();
  }

  std::vector<double> numbers(const char* key, const std::vector<double>& def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_array()) throw ConfigError(where(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number()) throw ConfigError(where(key) + ": expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  Section child(const char* key) { return Section(find(key), where(key)); }

  void finish() const {
    if (!j_) return;
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  const json* j_;
  std::string where_;
  std::set<std::string> used_;
};

std::string resolve_path(const std::string& p, const std::filesystem::path& base, const std::string& at) {
  if (p.empty()) throw ConfigError(at + ": path must not be empty");
  std::filesystem::path path(p);
  if (path.is_relative()) path = base / path;
  if (!std::filesystem::is_regular_file(path)) throw ConfigError(at + ": file not found: " + path.string());
  return path.lexically_normal().string();
}

std::vector<StreamMode> parse_modes(Section& s, const char* key, int kmax) {
  const json* v = s.find(key);
  if (!v) return {};
  if (!v->is_array()) s.fail(std::string(key) + " must be an array");
  std::vector<StreamMode> out;
  for (std::size_t i = 0; i < v->size(); ++i) {
    Section m(&(*v)[i], s.where(key) + "[" + std::to_string(i) + "]");
    StreamMode sm;
    sm.kx = static_cast<int>(m.integer("kx", 0));
    sm.ky = static_cast<int>(m.integer("ky", 0));
    sm.cos_amp = m.number("cos", 0.0);
    sm.sin_amp = m.number("sin", 0.0);
    m.finish();
    if (sm.kx == 0 && sm.ky == 0) m.fail("wavenumber (0, 0) carries no velocity");
    if (std::abs(sm.kx) > kmax || std::abs(sm.ky) > kmax) m.fail("wavenumber outside the dealiased range");
    out.push_back(sm);
  }
  return out;
}

FieldSpec parse_field(Section s, const std::filesystem::path& base, int kmax, bool allow_default,
                      const FieldSpec& def) {
  FieldSpec f;
  f.kind = s.string("kind", def.kind);
  if (f.kind == "zero") {
  } else if (f.kind == "default" && allow_default) {
  } else if (f.kind == "taylor_green") {
    f.amplitude = s.number("amplitude", 1.0);
  } else if (f.kind == "modes") {
    f.modes = parse_modes(s, "modes", kmax);
    if (f.modes.empty()) s.fail("modes must not be empty");
  } else if (f.kind == "random") {
    f.l2_norm = s.number("l2_norm", 1.0);
    f.decay = s.number("decay", 1.0);
    if (f.l2_norm < 0.0) s.fail("l2_norm must be >= 0");
  } else if (f.kind == "file") {
    f.path = resolve_path(s.string("path", ""), base, s.where("path"));
  } else {
    s.fail("unknown kind '" + f.kind + "'");
  }
  s.finish();
  return f;
}

ForcingSpec parse_forcing(Section s, int kmax) {
  ForcingSpec f;
  f.kind = s.string("kind", "zero");
  if (f.kind == "zero") {
  } else if (f.kind == "kolmogorov") {
    f.amplitude = s.number("amplitude", 1.0);
    f.wavenumber = static_cast<int>(s.integer("wavenumber", 2));
    if (f.wavenumber < 1 || f.wavenumber > kmax) s.fail("wavenumber must lie in [1, k_max]");
  } else if (f.kind == "modes") {
    f.modes = parse_modes(s, "modes", kmax);
    if (f.modes.empty()) s.fail("modes must not be empty");
  } else if (f.kind == "random") {
    f.amplitude = s.number("amplitude", 1.0);
  } else {
    s.fail("unknown kind '" + f.kind + "'");
  }
  s.finish();
  return f;
}

ordered_json modes_json(const std::vector<StreamMode>& modes) {
  ordered_json a = ordered_json::array();
  for (const auto& m : modes) a.push_back({{"kx", m.kx}, {"ky", m.ky}, {"cos", m.cos_amp}, {"sin", m.sin_amp}});
  return a;
}

ordered_json field_json(const FieldSpec& f) {
  ordered_json j{{"kind", f.kind}};
  if (f.kind == "taylor_green") j["amplitude"] = f.amplitude;
  if (f.kind == "modes") j["modes"] = modes_json(f.modes);
  if (f.kind == "random") {
    j["l2_norm"] = f.l2_norm;
    j["decay"] = f.decay;
  }
  if (f.kind == "file") j["path"] = f.path;
  return j;
}

ordered_json forcing_json(const ForcingSpec& f) {
  ordered_json j{{"kind", f.kind}};
  if (f.kind == "kolmogorov") {
    j["amplitude"] = f.amplitude;
    j["wavenumber"] = f.wavenumber;
  }
  if (f.kind == "modes") j["modes"] = modes_json(f.modes);
  if (f.kind == "random") j["amplitude"] = f.amplitude;
  return j;
}

ordered_json bound_json(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  RunConfig c;
  Section root(&doc, "config");

  {
    Section p = root.child("problem");
    c.problem.params.nu = p.number("nu", c.problem.params.nu);
    c.problem.params.alpha = p.number("alpha", c.problem.params.alpha);
    c.problem.t_final = p.number("t_final", c.problem.t_final);
    c.problem.dt = p.number("dt", c.problem.dt);
    c.problem.grid.n = static_cast<int>(p.integer("n", c.problem.grid.n));
    c.problem.grid.length = p.number("length", c.problem.grid.length);
    c.problem.grid.dealias_fraction = p.number("dealias_fraction", c.problem.grid.dealias_fraction);
    p.finish();
    try {
      c.problem.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("config.problem: ") + e.what());
    }
  }
  const int kmax = c.problem.grid.retained_max();

  c.initial_state = parse_field(root.child("initial_state"), base_dir, kmax, false, FieldSpec{});
  c.control = parse_forcing(root.child("control"), kmax);

  {
    Section s = root.child("cost");
    c.weights.alpha_Q = s.number("alpha_Q", c.weights.alpha_Q);
    c.weights.alpha_T = s.number("alpha_T", c.weights.alpha_T);
    c.weights.gamma = s.number("gamma", c.weights.gamma);
    require(c.weights.alpha_Q >= 0.0 && c.weights.alpha_T >= 0.0 && c.weights.gamma >= 0.0,
            "config.cost: weights must be >= 0");
    Section t = s.child("target");
    c.target.kind = t.string("kind", "zero");
    if (c.target.kind == "reachable") {
      c.target.forcing = parse_forcing(t.child("forcing"), kmax);
    } else if (c.target.kind == "file") {
      c.target.path = resolve_path(t.string("path", ""), base_dir, t.where("path"));
    } else if (c.target.kind != "zero" && c.target.kind != "uncontrolled") {
      t.fail("unknown kind '" + c.target.kind + "'");
    }
    t.finish();
    s.finish();
  }

  {
    Section s = root.child("constraints");
    const double inf = BoxConstraint::kInf;
    for (const char* key : {"lower", "upper"}) {
      const json* v = s.find(key);
      if (!v) continue;
      const bool lower = std::string(key) == "lower";
      const double sign_inf = lower ? -inf : inf;
      std::array<double, kDim> b{sign_inf, sign_inf};
      if (v->is_array()) {
        require(v->size() == kDim, s.where(key) + ": expected one bound per component");
        for (int i = 0; i < kDim; ++i) b[static_cast<std::size_t>(i)] = s.bound((*v)[static_cast<std::size_t>(i)], sign_inf, s.where(key));
      } else {
        const double x = s.bound(*v, sign_inf, s.where(key));
        b = {x, x};
      }
      (lower ? c.box.lower : c.box.upper) = b;
    }
    s.finish();
    try {
      c.box.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("config.constraints: ") + e.what());
    }
  }

  {
    Section s = root.child("optimizer");
    c.optimizer.tol = s.number("tol", c.optimizer.tol);
    c.optimizer.max_iter = static_cast<int>(s.integer("max_iter", c.optimizer.max_iter));
    c.activity_tol = s.number("activity_tol", c.activity_tol);
    c.ssc_samples = static_cast<int>(s.integer("ssc_samples", c.ssc_samples));
    c.ssc_stability = s.number("ssc_stability", c.ssc_stability);
    if (const json* v = s.find("ssc_seeds")) {
      require(v->is_array() && !v->empty(), "config.optimizer.ssc_seeds: expected a non-empty array");
      c.ssc_seeds.clear();
      for (const auto& e : *v) {
        require(e.is_number_unsigned(), "config.optimizer.ssc_seeds: expected non-negative integers");
        c.ssc_seeds.push_back(e.get<std::uint64_t>());
      }
    }
    s.finish();
    require(c.optimizer.tol >= 0.0, "config.optimizer.tol must be >= 0");
    require(c.optimizer.max_iter >= 0, "config.optimizer.max_iter must be >= 0");
    require(c.activity_tol >= 0.0, "config.optimizer.activity_tol must be >= 0");
    require(c.ssc_samples >= 0, "config.optimizer.ssc_samples must be >= 0");
    require(c.ssc_stability > 0.0, "config.optimizer.ssc_stability must be > 0");
  }

  {
    Section s = root.child("stability");
    c.epsilons = s.numbers("epsilons", c.epsilons);
    c.ratio_band = s.number("ratio_band", c.ratio_band);
    c.cold_start = s.boolean("cold_start", c.cold_start);
    FieldSpec def;
    def.kind = "default";
    c.phi = parse_field(s.child("phi"), base_dir, kmax, true, def);
    s.finish();
    for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
      require(std::isfinite(c.epsilons[i]) && c.epsilons[i] >= 0.0, "config.stability.epsilons must be >= 0");
      require(i == 0 || c.epsilons[i] <= c.epsilons[i - 1], "config.stability.epsilons must be non-increasing");
    }
    require(c.ratio_band >= 1.0, "config.stability.ratio_band must be >= 1");
  }

  {
    Section s = root.child("grad_check");
    auto& g = c.grad_check;
    g.directions = static_cast<int>(s.integer("directions", g.directions));
    g.deltas = s.numbers("deltas", g.deltas);
    g.taylor_t = s.numbers("taylor_t", g.taylor_t);
    g.direction_norm = s.number("direction_norm", g.direction_norm);
    g.gradient_tol = s.number("gradient_tol", g.gradient_tol);
    g.hessian_tol = s.number("hessian_tol", g.hessian_tol);
    g.first_order_min = s.number("first_order_min", g.first_order_min);
    g.second_order_min = s.number("second_order_min", g.second_order_min);
    s.finish();
    require(g.directions >= 1, "config.grad_check.directions must be >= 1");
    require(!g.deltas.empty(), "config.grad_check.deltas must not be empty");
    for (double d : g.deltas) require(d > 0.0, "config.grad_check.deltas must be > 0");
    require(g.taylor_t.size() >= 2, "config.grad_check.taylor_t needs at least two values");
    for (std::size_t i = 0; i < g.taylor_t.size(); ++i) {
      require(g.taylor_t[i] > 0.0, "config.grad_check.taylor_t must be > 0");
      require(i == 0 || g.taylor_t[i] < g.taylor_t[i - 1], "config.grad_check.taylor_t must be decreasing");
    }
    require(g.direction_norm > 0.0, "config.grad_check.direction_norm must be > 0");
    require(g.gradient_tol > 0.0 && g.hessian_tol > 0.0, "config.grad_check tolerances must be > 0");
  }

  {
    Section s = root.child("output");
    c.export_stride = static_cast<int>(s.integer("export_stride", c.export_stride));
    s.finish();
    require(c.export_stride >= 1, "config.output.export_stride must be >= 1");
  }

  {
    const json* v = root.find("seed");
    if (v) {
      require(v->is_number_unsigned(), "config.seed: expected a non-negative integer");
      c.seed = v->get<std::uint64_t>();
    }
  }
  c.output_dir = root.string("output_dir", c.output_dir);
  require(!c.output_dir.empty(), "config.output_dir must not be empty");
  {
    Section s = root.child("debug");
    c.negate_bhat = s.boolean("negate_bhat", c.negate_bhat);
    s.finish();
  }
  root.finish();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc, path.parent_path());
}

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["problem"] = {{"nu", c.problem.params.nu},
                  {"alpha", c.problem.params.alpha},
                  {"t_final", c.problem.t_final},
                  {"dt", c.problem.dt},
                  {"n", c.problem.grid.n},
                  {"length", c.problem.grid.length},
                  {"dealias_fraction", c.problem.grid.dealias_fraction}};
  j["initial_state"] = field_json(c.initial_state);
  j["control"] = forcing_json(c.control);
  ordered_json target{{"kind", c.target.kind}};
  if (c.target.kind == "reachable") target["forcing"] = forcing_json(c.target.forcing);
  if (c.target.kind == "file") target["path"] = c.target.path;
  j["cost"] = {{"alpha_Q", c.weights.alpha_Q}, {"alpha_T", c.weights.alpha_T}, {"gamma", c.weights.gamma},
               {"target", target}};
  j["constraints"] = {{"lower", {bound_json(c.box.lower[0]), bound_json(c.box.lower[1])}},
                      {"upper", {bound_json(c.box.upper[0]), bound_json(c.box.upper[1])}}};
  j["optimizer"] = {{"tol", c.optimizer.tol},
                    {"max_iter", c.optimizer.max_iter},
                    {"activity_tol", c.activity_tol},
                    {"ssc_samples", c.ssc_samples},
                    {"ssc_seeds", c.ssc_seeds},
                    {"ssc_stability", c.ssc_stability}};
  j["stability"] = {{"epsilons", c.epsilons},
                    {"ratio_band", c.ratio_band},
                    {"cold_start", c.cold_start},
                    {"phi", field_json(c.phi)}};
  const auto& g = c.grad_check;
  j["grad_check"] = {{"directions", g.directions},
                     {"deltas", g.deltas},
                     {"taylor_t", g.taylor_t},
                     {"direction_norm", g.direction_norm},
                     {"gradient_tol", g.gradient_tol},
                     {"hessian_tol", g.hessian_tol},
                     {"first_order_min", g.first_order_min},
                     {"second_order_min", g.second_order_min}};
  j["output"] = {{"export_stride", c.export_stride}};
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["debug"] = {{"negate_bhat", c.negate_bhat}};
  return j;
}

GridPtr build_grid(const RunConfig& cfg) { return make_grid(cfg.problem.grid); }

SpectralField build_field(const FieldSpec& spec, const GridPtr& grid, std::uint64_t seed) {
  if (spec.kind == "zero") return SpectralField(grid);
  if (spec.kind == "default") return default_perturbation_shape(grid);
  if (spec.kind == "taylor_green") return taylor_green(grid, spec.amplitude);
  if (spec.kind == "modes") return from_stream_modes(grid, spec.modes);
  if (spec.kind == "random") {
    std::mt19937_64 rng(seed);
    return random_field(grid, rng, spec.l2_norm, spec.decay);
  }
  if (spec.kind == "file") return read_snapshot(spec.path, grid);
  throw ConfigError("unknown field kind '" + spec.kind + "'");
}

ControlField build_forcing(const ForcingSpec& spec, const RunConfig& cfg, const GridPtr& grid, std::uint64_t seed) {
  const int steps = cfg.problem.steps();
  const double dt = cfg.problem.dt;
  if (spec.kind == "zero") return ControlField(grid, steps, dt);
  if (spec.kind == "random") {
    ControlField h(grid, steps, dt);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (double& v : h.values()) v = spec.amplitude * normal(rng);
    return h;
  }
  PhysicalField f(grid);
  if (spec.kind == "kolmogorov") {
    const double s = 2.0 * std::numbers::pi / grid->spec().length;
    for (std::size_t p = 0; p < grid->points(); ++p) {
      f.comp(0)[p] = spec.amplitude * std::sin(s * spec.wavenumber * grid->y_coord(p));
    }
  } else if (spec.kind == "modes") {
    f = to_physical(from_stream_modes(grid, spec.modes));
  } else {
    throw ConfigError("unknown forcing kind '" + spec.kind + "'");
  }
  return constant_control(f, steps, dt);
}

std::shared_ptr<QuadraticTracking> build_cost(const RunConfig& cfg, const GridPtr& grid, const SpectralField& u0) {
  const auto& t = cfg.target;
  if (t.kind == "zero") return QuadraticTracking::zero_data(cfg.weights, grid);
  if (t.kind == "file") {
    return std::make_shared<QuadraticTracking>(cfg.weights, grid, std::vector<PhysicalField>{},
                                               to_physical(read_snapshot(t.path, grid)));
  }
  const ControlField forcing = t.kind == "reachable" ? build_forcing(t.forcing, cfg, grid, derive_seed(cfg.seed, 3))
                                                     : ControlField(grid, cfg.problem.steps(), cfg.problem.dt);
  return QuadraticTracking::track(cfg.weights, solve_state(u0, forcing, cfg.problem));
}

ReducedProblem build_problem(const RunConfig& cfg) {
  const GridPtr grid = build_grid(cfg);
  SpectralField u0 = build_field(cfg.initial_state, grid, derive_seed(cfg.seed, 1));
  auto cost = build_cost(cfg, grid, u0);
  return ReducedProblem(cfg.problem, std::move(u0), std::move(cost), AdjointOptions{cfg.negate_bhat});
}

}  // namespace vche::cli
