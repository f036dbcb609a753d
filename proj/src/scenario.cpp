#include "homflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "homflow/nemytskii.hpp"
#include "homflow/oracles.hpp"
#include "homflow/rng.hpp"

namespace homflow {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Fail-closed JSON access.

namespace {

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError("config: expected an object at " + path);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  require_object(j, path);
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known) throw ConfigError("config: unknown key '" + it.key() + "' at " + path);
  }
}

const json* find(const json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double get_num(const json& j, const std::string& path, const char* key,
               std::optional<double> def = std::nullopt) {
  const json* v = find(j, key);
  if (!v) {
    if (def) return *def;
    throw ConfigError("config: missing key '" + std::string(key) + "' at " + path);
  }
  if (!v->is_number()) throw ConfigError("config: '" + path + "." + key + "' must be a number");
  return v->get<double>();
}

int get_int(const json& j, const std::string& path, const char* key,
            std::optional<int> def = std::nullopt) {
  const json* v = find(j, key);
  if (!v) {
    if (def) return *def;
    throw ConfigError("config: missing key '" + std::string(key) + "' at " + path);
  }
  if (!v->is_number_integer())
    throw ConfigError("config: '" + path + "." + key + "' must be an integer");
  return v->get<int>();
}

std::string get_str(const json& j, const std::string& path, const char* key,
                    std::optional<std::string> def = std::nullopt) {
  const json* v = find(j, key);
  if (!v) {
    if (def) return *def;
    throw ConfigError("config: missing key '" + std::string(key) + "' at " + path);
  }
  if (!v->is_string()) throw ConfigError("config: '" + path + "." + key + "' must be a string");
  return v->get<std::string>();
}

bool get_bool(const json& j, const std::string& path, const char* key, bool def) {
  const json* v = find(j, key);
  if (!v) return def;
  if (!v->is_boolean()) throw ConfigError("config: '" + path + "." + key + "' must be a boolean");
  return v->get<bool>();
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

BoundaryKind parse_boundary(const std::string& b, const std::string& path) {
  if (b == "neumann") return BoundaryKind::neumann;
  if (b == "dirichlet_zero") return BoundaryKind::dirichlet_zero;
  throw ConfigError("config: " + path + ".boundary must be 'neumann' or 'dirichlet_zero'");
}

void parse_backend(const json& j, Scenario& sc) {
  const std::string path = "backend";
  const std::string kind = get_str(j, path, "kind");
  if (kind == "tv_1d") {
    sc.backend_kind = Scenario::BackendKind::tv_1d;
    check_keys(j, path, {"kind", "length", "cells", "boundary"});
    sc.domain = Domain::interval(get_num(j, path, "length", 1.0), get_int(j, path, "cells"),
                                 parse_boundary(get_str(j, path, "boundary", "neumann"), path));
  } else if (kind == "tv_2d") {
    sc.backend_kind = Scenario::BackendKind::tv_2d;
    check_keys(j, path, {"kind", "lx", "ly", "nx", "ny", "boundary", "dual_step"});
    sc.domain = Domain::rectangle(get_num(j, path, "lx", 1.0), get_num(j, path, "ly", 1.0),
                                  get_int(j, path, "nx"), get_int(j, path, "ny"),
                                  parse_boundary(get_str(j, path, "boundary", "neumann"), path));
    sc.tv_spec.dual_step = get_num(j, path, "dual_step", sc.tv_spec.dual_step);
    sc.tv_spec.validate();
  } else if (kind == "fractional") {
    sc.backend_kind = Scenario::BackendKind::fractional;
    check_keys(j, path, {"kind", "s", "cells", "collar_cells", "length"});
    sc.frac_spec.s = get_num(j, path, "s", 0.5);
    sc.frac_spec.cells = get_int(j, path, "cells");
    sc.frac_spec.collar_cells = get_int(j, path, "collar_cells", 0);
    sc.frac_spec.length = get_num(j, path, "length", 1.0);
    sc.frac_spec.validate();
  } else {
    throw ConfigError("config: backend.kind must be 'tv_1d', 'tv_2d' or 'fractional'");
  }
}

void parse_initial(const json& j, Scenario& sc) {
  const std::string path = "initial";
  const std::string kind = get_str(j, path, "kind");
  if (kind == "constant") {
    sc.init_kind = Scenario::InitKind::constant;
    check_keys(j, path, {"kind", "value"});
    sc.init_value = get_num(j, path, "value");
  } else if (kind == "bump") {
    sc.init_kind = Scenario::InitKind::bump;
    check_keys(j, path, {"kind", "center", "width", "height"});
    sc.init_center = get_num(j, path, "center", 0.5);
    sc.init_width = get_num(j, path, "width", 0.25);
    sc.init_height = get_num(j, path, "height", 1.0);
    if (!(sc.init_width > 0.0)) throw ConfigError("config: bump width must be positive");
  } else if (kind == "file") {
    sc.init_kind = Scenario::InitKind::file;
    check_keys(j, path, {"kind", "path"});
    sc.init_path = get_str(j, path, "path");
  } else if (kind == "indicator") {
    sc.init_kind = Scenario::InitKind::indicator;
    check_keys(j, path, {"kind", "left", "right", "height"});
    sc.init_left = get_num(j, path, "left");
    sc.init_right = get_num(j, path, "right");
    sc.init_height = get_num(j, path, "height", 1.0);
    if (!(sc.init_left < sc.init_right))
      throw ConfigError("config: initial indicator needs left < right");
  } else if (kind == "random_plateaus") {
    sc.init_kind = Scenario::InitKind::random_plateaus;
    check_keys(j, path, {"kind", "pieces", "amplitude", "offset"});
    sc.init_pieces = get_int(j, path, "pieces", 4);
    sc.init_amplitude = get_num(j, path, "amplitude", 1.0);
    sc.init_offset = get_num(j, path, "offset", 0.0);
    if (sc.init_pieces < 2) throw ConfigError("config: random_plateaus needs pieces >= 2");
  } else if (kind == "random_cells") {
    sc.init_kind = Scenario::InitKind::random_cells;
    check_keys(j, path, {"kind", "amplitude", "offset"});
    sc.init_amplitude = get_num(j, path, "amplitude", 1.0);
    sc.init_offset = get_num(j, path, "offset", 0.0);
  } else if (kind == "values") {
    sc.init_kind = Scenario::InitKind::values;
    check_keys(j, path, {"kind", "values"});
    const json* v = find(j, "values");
    if (!v || !v->is_array()) throw ConfigError("config: initial.values must be an array");
    for (const json& e : *v) {
      if (!e.is_number()) throw ConfigError("config: initial.values entries must be numbers");
      sc.init_values.push_back(e.get<double>());
    }
  } else {
    throw ConfigError(
        "config: initial.kind must be one of 'constant', 'indicator', 'bump', "
        "'random_plateaus', 'random_cells', 'values', 'file'");
  }
}

void parse_time(const json& j, Scenario& sc) {
  const std::string path = "time";
  const std::string kind = get_str(j, path, "kind", "linear");
  if (kind == "linear") {
    check_keys(j, path, {"kind", "t_end", "segments"});
    sc.grid = TimeGrid::linear(get_num(j, path, "t_end"), get_int(j, path, "segments", 10));
  } else if (kind == "log") {
    check_keys(j, path, {"kind", "t_first", "t_end", "points"});
    sc.grid = TimeGrid::log_spaced(get_num(j, path, "t_first"), get_num(j, path, "t_end"),
                                   get_int(j, path, "points", 8));
  } else {
    throw ConfigError("config: time.kind must be 'linear' or 'log'");
  }
}

void parse_refine(const json& j, Scenario& sc) {
  const std::string path = "refine";
  const std::string kind = get_str(j, path, "kind", "fixed");
  if (kind == "fixed") {
    check_keys(j, path, {"kind", "n"});
    sc.refine = RefinePolicy::fixed_n(get_int(j, path, "n", 256));
  } else if (kind == "doubling") {
    check_keys(j, path, {"kind", "n_start", "n_max", "tol_rel"});
    sc.refine = RefinePolicy::doubling(get_int(j, path, "n_start", 64),
                                       get_int(j, path, "n_max", 65536),
                                       get_num(j, path, "tol_rel", 1e-6));
  } else {
    throw ConfigError("config: refine.kind must be 'fixed' or 'doubling'");
  }
}

void parse_tolerance(const json& j, Scenario& sc) {
  const std::string path = "tolerance";
  check_keys(j, path, {"mode", "rel_gap", "max_iters"});
  const std::string mode = get_str(j, path, "mode", "exact");
  if (mode == "exact")
    sc.tol.mode = ResolventTolerance::Mode::exact;
  else if (mode == "duality_gap")
    sc.tol.mode = ResolventTolerance::Mode::duality_gap;
  else
    throw ConfigError("config: tolerance.mode must be 'exact' or 'duality_gap'");
  sc.tol.rel_gap = get_num(j, path, "rel_gap", 1e-8);
  sc.tol.max_iters = get_int(j, path, "max_iters", 400000);
  sc.tol.validate();
}

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {
      "global_decay",    "pointwise",    "mass",      "homogeneity", "contraction",
      "perturbed_decay", "forced_decay", "smoothing", "trajectory"};
  return names;
}

void parse_checks(const json& root, Scenario& sc) {
  if (const json* arr = find(root, "checks")) {
    if (!arr->is_array()) throw ConfigError("config: checks must be an array");
    for (const json& e : *arr) {
      std::string name;
      double slack = std::numeric_limits<double>::quiet_NaN();
      if (e.is_string()) {
        name = e.get<std::string>();
      } else if (e.is_object()) {
        check_keys(e, "checks[]", {"name", "slack"});
        name = get_str(e, "checks[]", "name");
        slack = get_num(e, "checks[]", "slack");
        if (!(slack >= 0.0)) throw ConfigError("config: check slack must be nonnegative");
      } else {
        throw ConfigError("config: checks entries must be names or {name, slack} objects");
      }
      const auto& known = known_checks();
      if (std::find(known.begin(), known.end(), name) == known.end())
        throw ConfigError("config: unknown check '" + name + "'");
      sc.checks.push_back(name);
      sc.check_slacks.push_back(slack);
    }
  }
  if (const json* cp = find(root, "check_params")) {
    const std::string path = "check_params";
    check_keys(*cp, path,
               {"h_over_t", "quotient_n", "norms", "levels", "lambda", "mu", "slack_rel",
                "smoothing_q"});
    sc.h_over_t = get_num(*cp, path, "h_over_t", sc.h_over_t);
    sc.quotient_n = get_int(*cp, path, "quotient_n", sc.quotient_n);
    sc.levels = get_int(*cp, path, "levels", sc.levels);
    sc.check_lambda = get_num(*cp, path, "lambda", sc.check_lambda);
    sc.check_mu = get_num(*cp, path, "mu", sc.check_mu);
    sc.slack_rel = get_num(*cp, path, "slack_rel", sc.slack_rel);
    sc.smoothing_q = get_num(*cp, path, "smoothing_q", sc.smoothing_q);
    if (const json* norms = find(*cp, "norms")) {
      if (!norms->is_array()) throw ConfigError("config: check_params.norms must be an array");
      sc.norms.clear();
      for (const json& e : *norms) {
        if (e.is_number()) {
          sc.norms.push_back(e.get<double>());
        } else if (e.is_string() && e.get<std::string>() == "inf") {
          sc.norms.push_back(inf());
        } else {
          throw ConfigError("config: check_params.norms entries must be 1, 2 or \"inf\"");
        }
      }
    }
    for (double p : sc.norms)
      if (p != 1.0 && p != 2.0 && !std::isinf(p))
        throw ConfigError("config: check_params.norms entries must be 1, 2 or \"inf\"");
    if (!(sc.h_over_t > 0.0) || sc.h_over_t > 1.0)
      throw ConfigError("config: check_params.h_over_t must lie in (0, 1]");
    if (sc.quotient_n < 1) throw ConfigError("config: check_params.quotient_n must be >= 1");
  }
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const std::string& origin) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + origin + " is not valid JSON: " + e.what());
  }
  check_keys(root, origin,
             {"name", "seed", "backend", "initial", "time", "refine", "tolerance", "forcing",
              "perturbation", "checks", "check_params", "sweep", "corrupt_trajectory",
              "outputs"});
  Scenario sc;
  sc.name = get_str(root, origin, "name");
  if (sc.name.empty() || sc.name.find_first_of("/\\ \t\n") != std::string::npos)
    throw ConfigError("config: name must be a nonempty token without spaces or slashes");
  const int seed = get_int(root, origin, "seed", 1);
  if (seed < 0) throw ConfigError("config: seed must be nonnegative");
  sc.seed = static_cast<uint64_t>(seed);

  const json* backend = find(root, "backend");
  if (!backend) throw ConfigError("config: missing 'backend'");
  parse_backend(*backend, sc);

  const json* initial = find(root, "initial");
  if (!initial) throw ConfigError("config: missing 'initial'");
  parse_initial(*initial, sc);

  const json* time = find(root, "time");
  if (!time) throw ConfigError("config: missing 'time'");
  parse_time(*time, sc);

  if (const json* refine = find(root, "refine")) parse_refine(*refine, sc);
  if (const json* tol = find(root, "tolerance")) parse_tolerance(*tol, sc);

  if (const json* forcing = find(root, "forcing")) {
    check_keys(*forcing, "forcing", {"value"});
    sc.has_forcing = true;
    sc.forcing_value = get_num(*forcing, "forcing", "value");
  }
  if (const json* pert = find(root, "perturbation")) {
    check_keys(*pert, "perturbation", {"family", "omega"});
    sc.has_perturbation = true;
    sc.perturbation_family = get_str(*pert, "perturbation", "family", "linear");
    if (sc.perturbation_family != "linear" && sc.perturbation_family != "saturating")
      throw ConfigError("config: perturbation.family must be 'linear' or 'saturating'");
    sc.perturbation_omega = get_num(*pert, "perturbation", "omega");
    if (!(sc.perturbation_omega >= 0.0))
      throw ConfigError("config: perturbation.omega must be nonnegative");
  }
  if (sc.has_forcing && sc.has_perturbation)
    throw ConfigError("config: choose either a forcing or a perturbation, not both");

  parse_checks(root, sc);

  if (const json* sweep = find(root, "sweep")) {
    check_keys(*sweep, "sweep", {"axis", "values"});
    sc.has_sweep = true;
    sc.sweep_axis = get_str(*sweep, "sweep", "axis");
    static const char* axes[] = {"t", "h", "lambda", "mu", "s", "omega"};
    if (std::find_if(std::begin(axes), std::end(axes),
                     [&](const char* a) { return sc.sweep_axis == a; }) == std::end(axes))
      throw ConfigError("config: sweep.axis must be one of t, h, lambda, mu, s, omega");
    const json* vals = find(*sweep, "values");
    if (!vals || !vals->is_array() || vals->empty())
      throw ConfigError("config: sweep.values must be a nonempty array of numbers");
    for (const json& e : *vals) {
      if (!e.is_number()) throw ConfigError("config: sweep.values entries must be numbers");
      sc.sweep_values.push_back(e.get<double>());
    }
  }

  sc.corrupt_trajectory = get_bool(root, origin, "corrupt_trajectory", false);
  if (const json* outputs = find(root, "outputs")) {
    check_keys(*outputs, "outputs", {"trajectory_csv", "report_json"});
    sc.write_trajectory = get_bool(*outputs, "outputs", "trajectory_csv", true);
    sc.write_report = get_bool(*outputs, "outputs", "report_json", true);
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

// ---------------------------------------------------------------------------
// Builders.

std::unique_ptr<OperatorBackend> make_backend(const Scenario& sc) {
  switch (sc.backend_kind) {
    case Scenario::BackendKind::tv_1d:
      return std::make_unique<TvBackend1d>(sc.domain);
    case Scenario::BackendKind::tv_2d:
      return std::make_unique<TvBackend2d>(sc.domain, sc.tv_spec);
    case Scenario::BackendKind::fractional:
      return std::make_unique<FractionalBackend>(sc.frac_spec);
  }
  throw ConfigError("config: unreachable backend kind");
}

namespace {

// Compactly supported cosine-squared profile, 1 at the center, 0 outside.
double bump_profile(double x, double center, double width) {
  const double r = (x - center) / width;
  if (std::fabs(r) >= 1.0) return 0.0;
  const double c = std::cos(0.5 * 3.14159265358979323846 * r);
  return c * c;
}

}  // namespace

GridFunction make_initial(const Scenario& sc, const Domain& dom, uint64_t seed) {
  Rng rng(seed);
  switch (sc.init_kind) {
    case Scenario::InitKind::constant:
      return GridFunction::constant(dom, sc.init_value);
    case Scenario::InitKind::bump: {
      GridFunction u = GridFunction::zeros(dom);
      if (dom.is_1d()) {
        const double h = dom.spacing(0);
        for (int i = 0; i < dom.cells[0]; ++i)
          u.values[static_cast<size_t>(i)] =
              sc.init_height * bump_profile((i + 0.5) * h, sc.init_center, sc.init_width);
      } else {
        const double hx = dom.spacing(0), hy = dom.spacing(1);
        for (int iy = 0; iy < dom.cells[1]; ++iy)
          for (int ix = 0; ix < dom.cells[0]; ++ix)
            u.values[static_cast<size_t>(ix + dom.cells[0] * iy)] =
                sc.init_height * bump_profile((ix + 0.5) * hx, sc.init_center, sc.init_width) *
                bump_profile((iy + 0.5) * hy, sc.init_center, sc.init_width);
      }
      return u;
    }
    case Scenario::InitKind::file: {
      std::ifstream in(sc.init_path);
      if (!in) throw ConfigError("config: cannot read initial state file " + sc.init_path);
      std::vector<double> vals;
      double x = 0.0;
      while (in >> x) vals.push_back(x);
      return GridFunction::from_values(dom, vals);
    }
    case Scenario::InitKind::indicator: {
      GridFunction u = GridFunction::zeros(dom);
      if (dom.is_1d()) {
        const double h = dom.spacing(0);
        for (int i = 0; i < dom.cells[0]; ++i) {
          const double x = (i + 0.5) * h;
          if (x >= sc.init_left && x <= sc.init_right)
            u.values[static_cast<size_t>(i)] = sc.init_height;
        }
      } else {
        const double hx = dom.spacing(0), hy = dom.spacing(1);
        for (int iy = 0; iy < dom.cells[1]; ++iy)
          for (int ix = 0; ix < dom.cells[0]; ++ix) {
            const double x = (ix + 0.5) * hx, y = (iy + 0.5) * hy;
            if (x >= sc.init_left && x <= sc.init_right && y >= sc.init_left &&
                y <= sc.init_right)
              u.values[static_cast<size_t>(ix + dom.cells[0] * iy)] = sc.init_height;
          }
      }
      return u;
    }
    case Scenario::InitKind::random_plateaus: {
      if (!dom.is_1d())
        throw ConfigError("config: random_plateaus initial states need a 1d domain");
      const double L = dom.length[0];
      std::vector<double> breaks(static_cast<size_t>(sc.init_pieces) - 1);
      for (double& b : breaks) b = rng.uniform(0.05 * L, 0.95 * L);
      std::sort(breaks.begin(), breaks.end());
      std::vector<double> heights(static_cast<size_t>(sc.init_pieces));
      for (double& hgt : heights) hgt = sc.init_offset + rng.uniform(0.0, sc.init_amplitude);
      GridFunction u = GridFunction::zeros(dom);
      const double h = dom.spacing(0);
      for (int i = 0; i < dom.cells[0]; ++i) {
        const double x = (i + 0.5) * h;
        size_t piece = 0;
        while (piece < breaks.size() && x > breaks[piece]) ++piece;
        u.values[static_cast<size_t>(i)] = heights[piece];
      }
      return u;
    }
    case Scenario::InitKind::random_cells: {
      GridFunction u = GridFunction::zeros(dom);
      for (double& v : u.values)
        v = sc.init_offset + rng.uniform(-sc.init_amplitude, sc.init_amplitude);
      return u;
    }
    case Scenario::InitKind::values: {
      return GridFunction::from_values(dom, sc.init_values);
    }
  }
  throw ConfigError("config: unreachable initial kind");
}

// ---------------------------------------------------------------------------
// Runner.

namespace {

CaratheodoryMap make_perturbation(const std::string& family, double omega) {
  if (family == "linear") return CaratheodoryMap::linear(omega);
  return CaratheodoryMap::saturating(omega);
}

// Certified sup-norm error of one evolved state under the scenario settings.
double state_error_budget(const Scenario& sc, const OperatorBackend& op, double scale) {
  if (op.exact_resolvent) return 1e-12 * scale;
  if (sc.tol.mode == ResolventTolerance::Mode::exact) return 1e-9 * scale;
  return 0.25 * sc.tol.rel_gap * static_cast<double>(sc.quotient_n) * scale;
}

}  // namespace

std::vector<double> default_sweep_values(const std::string& axis, const Scenario& sc) {
  const double T = sc.grid.times.back();
  if (axis == "t") return {0.25 * T, 0.5 * T, T, 2.0 * T};
  if (axis == "h") return {1e-2 * T, 3e-3 * T, 1e-3 * T};
  if (axis == "lambda") return {0.25, 0.5, 1.0, 2.0, 4.0};
  if (axis == "mu") return {1e-3, 1e-2, 1e-1};
  if (axis == "s") return {0.3, 0.5, 0.7};
  if (axis == "omega") return {0.1, 0.25, 0.5};
  throw ConfigError("config: sweep axis must be one of t, h, lambda, mu, s, omega");
}

ScenarioResult run_scenario(const Scenario& sc, bool run_sweep) {
  auto op = make_backend(sc);
  const Domain& dom = op->domain();
  const GridFunction u0 = make_initial(sc, dom, sc.seed);
  ScenarioResult res;
  res.name = sc.name;

  // Solvers certify relative to max(state scale, scale_hint); the budget
  // below is relative to the same reference, so decayed states do not demand
  // unattainable certificates.
  const double scale = std::max({u0.norm(inf()),
                                 sc.has_forcing ? std::fabs(sc.forcing_value) : 0.0, 1e-30});
  ResolventTolerance tol = sc.tol;
  tol.scale_hint = scale;

  std::optional<ForcingTerm> forcing;
  if (sc.has_forcing) {
    const double horizon = 2.0 * sc.grid.times.back() + 1.0;
    const GridFunction fv = GridFunction::constant(dom, sc.forcing_value);
    const GridFunction fz = GridFunction::zeros(dom);
    forcing = ForcingTerm::sampled_profile({0.0, horizon}, {fv, fv}, {fz, fz});
  }
  std::optional<CaratheodoryMap> pert;
  if (sc.has_perturbation)
    pert = make_perturbation(sc.perturbation_family, sc.perturbation_omega);

  if (forcing)
    res.trajectory = evolve_forced(*op, u0, *forcing, sc.grid, sc.refine, tol);
  else if (pert)
    res.trajectory = evolve_perturbed(*op, *pert, u0, sc.grid, sc.refine, tol);
  else
    res.trajectory = evolve(*op, u0, sc.grid, sc.refine, tol);

  if (sc.corrupt_trajectory && res.trajectory.states.size() > 2) {
    // Deliberate fault injection for exercising the violation exit path: a
    // tripled interior state breaks any decay bound by a wide margin.
    auto& mid = res.trajectory.states[res.trajectory.states.size() / 2];
    mid = gf_scale(mid, 3.0);
  }

  const double T = sc.grid.times.back();
  const double h = sc.h_over_t * T;
  const double e_state = state_error_budget(sc, *op, scale);

  if (run_sweep) {
    if (!sc.has_sweep) throw ConfigError("config: sweep requested but no sweep table given");
    for (const double val : sc.sweep_values) {
      if (sc.sweep_axis == "t") {
        const QuotientPair q =
            difference_quotient(*op, u0, val, sc.h_over_t * val, sc.quotient_n, tol);
        for (double p : sc.norms)
          res.sweep_rows.push_back(
              {val, check_global_decay(*op, q, u0, p, 2.0 * e_state / (sc.h_over_t * val))});
      } else if (sc.sweep_axis == "h") {
        const QuotientPair q = difference_quotient(*op, u0, T, val, sc.quotient_n, tol);
        for (double p : sc.norms)
          res.sweep_rows.push_back({val, check_global_decay(*op, q, u0, p, 2.0 * e_state / val)});
      } else if (sc.sweep_axis == "lambda") {
        res.sweep_rows.push_back(
            {val, check_semigroup_homogeneity(*op, u0, T, val, sc.quotient_n, tol,
                                              4.0 * e_state)});
      } else if (sc.sweep_axis == "mu") {
        res.sweep_rows.push_back({val, check_resolvent_homogeneity(*op, u0, val, sc.check_lambda,
                                                                   tol, 4.0 * e_state)});
      } else if (sc.sweep_axis == "s") {
        if (sc.backend_kind != Scenario::BackendKind::fractional)
          throw ConfigError("config: sweep over s needs the fractional backend");
        FractionalSpec spec = sc.frac_spec;
        spec.s = val;
        const FractionalBackend fb(spec);
        const GridFunction w0 = make_initial(sc, fb.domain(), sc.seed);
        const QuotientPair q = difference_quotient(fb, w0, T, h, sc.quotient_n, tol);
        for (double p : sc.norms)
          res.sweep_rows.push_back({val, check_global_decay(fb, q, w0, p, 2.0 * e_state / h)});
      } else {  // omega
        const CaratheodoryMap F = make_perturbation(sc.perturbation_family, val);
        const QuotientPair q =
            perturbed_difference_quotient(*op, F, u0, T, h, sc.quotient_n, tol);
        for (double p : sc.norms)
          res.sweep_rows.push_back(
              {val, check_perturbed_decay(*op, F, q, u0, p, GronwallVariant::looser,
                                          2.0 * e_state / h)});
      }
    }
    return res;
  }

  std::optional<QuotientPair> plain_q;
  auto plain_quotient = [&]() -> const QuotientPair& {
    if (!plain_q) plain_q = difference_quotient(*op, u0, T, h, sc.quotient_n, tol);
    return *plain_q;
  };

  for (size_t ci = 0; ci < sc.checks.size(); ++ci) {
    const std::string& name = sc.checks[ci];
    const double override_slack =
        ci < sc.check_slacks.size() ? sc.check_slacks[ci]
                                    : std::numeric_limits<double>::quiet_NaN();
    auto pick = [&](double derived) {
      return std::isnan(override_slack) ? derived : override_slack;
    };
    if (name == "global_decay") {
      for (double p : sc.norms)
        res.reports.push_back(
            check_global_decay(*op, plain_quotient(), u0, p, pick(2.0 * e_state / h)));
    } else if (name == "pointwise") {
      res.reports.push_back(
          check_pointwise_bound(*op, plain_quotient(), u0, pick(3.0 * e_state)));
    } else if (name == "mass") {
      auto rows = check_mass_estimates(*op, plain_quotient(), u0,
                                       pick(2.0 * e_state * dom.total_measure()));
      res.reports.insert(res.reports.end(), rows.begin(), rows.end());
    } else if (name == "homogeneity") {
      res.reports.push_back(check_resolvent_homogeneity(*op, u0, sc.check_mu, sc.check_lambda,
                                                        tol, pick(4.0 * e_state)));
      res.reports.push_back(check_semigroup_homogeneity(
          *op, u0, T, sc.check_lambda, sc.quotient_n, tol, pick(4.0 * e_state)));
    } else if (name == "contraction") {
      const GridFunction b = make_initial(sc, dom, sc.seed + 1);
      const double slack = pick(4.0 * e_state * std::max(1.0, dom.total_measure()));
      auto rows =
          check_complete_contraction(*op, u0, b, T, sc.quotient_n, sc.levels, tol, slack);
      res.reports.insert(res.reports.end(), rows.begin(), rows.end());
      // Ordered pair: shift up by a constant to exercise order preservation.
      const GridFunction above = gf_add(u0, GridFunction::constant(dom, 0.1 * scale));
      auto rows2 =
          check_complete_contraction(*op, u0, above, T, sc.quotient_n, sc.levels, tol, slack);
      res.reports.insert(res.reports.end(), rows2.begin(), rows2.end());
    } else if (name == "perturbed_decay") {
      if (!pert) throw ConfigError("config: perturbed_decay needs a perturbation");
      const QuotientPair q =
          perturbed_difference_quotient(*op, *pert, u0, T, h, sc.quotient_n, tol);
      for (double p : sc.norms)
        res.reports.push_back(check_perturbed_decay(
            *op, *pert, q, u0, p, GronwallVariant::looser, pick(2.0 * e_state / h)));
    } else if (name == "forced_decay") {
      if (!forcing) throw ConfigError("config: forced_decay needs a forcing");
      const QuotientPair q =
          forced_difference_quotient(*op, u0, *forcing, T, h, sc.quotient_n, tol);
      for (double p : sc.norms)
        res.reports.push_back(
            check_forced_decay(*op, *forcing, q, u0, p, pick(2.0 * e_state / h)));
    } else if (name == "smoothing") {
      if (sc.backend_kind != Scenario::BackendKind::fractional)
        throw ConfigError("config: the smoothing check needs the fractional backend");
      const SmoothingExponents ex = smoothing_exponents(sc.frac_spec.s, sc.smoothing_q);
      res.reports.push_back(check_smoothing_slope(res.trajectory, -ex.delta));
    } else {  // trajectory; the slack here is relative to each bound
      if (sc.has_forcing || sc.has_perturbation)
        throw ConfigError("config: the trajectory decay check applies to unforced flows only");
      auto rows = validate_trajectory_decay(*op, res.trajectory, pick(0.05));
      res.reports.insert(res.reports.end(), rows.begin(), rows.end());
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Writers.

void write_trajectory_csv(const Trajectory& tr, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("output: cannot open " + path);
  out << "t,cell_index,value\n";
  for (size_t k = 0; k < tr.states.size(); ++k) {
    const std::string t = fmt17(tr.grid.times[k]);
    for (size_t i = 0; i < tr.states[k].values.size(); ++i)
      out << t << ',' << i << ',' << fmt17(tr.states[k].values[i]) << '\n';
  }
  if (!out) throw ConfigError("output: failed writing " + path);
}

namespace {

json report_to_json(const InequalityReport& r) {
  json ctx = json::object();
  for (const auto& [k, v] : r.context) ctx[k] = v;
  json row = json::object();
  row["name"] = r.name;
  row["lhs"] = r.lhs;
  row["rhs"] = r.rhs;
  row["margin"] = r.margin;
  row["pass"] = r.pass;
  row["slack_budget"] = r.slack_budget;
  row["context"] = std::move(ctx);
  return row;
}

}  // namespace

void write_reports_json(const std::vector<InequalityReport>& reports, const std::string& path) {
  json arr = json::array();
  for (const InequalityReport& r : reports) arr.push_back(report_to_json(r));
  std::ofstream out(path);
  if (!out) throw ConfigError("output: cannot open " + path);
  out << arr.dump(2) << '\n';
  if (!out) throw ConfigError("output: failed writing " + path);
}

void write_sweep_csv(const std::string& axis, const std::vector<SweepRow>& rows,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("output: cannot open " + path);
  out << "axis,value,name,p,lhs,rhs,margin,pass\n";
  for (const SweepRow& row : rows) {
    std::string p;
    for (const auto& [k, v] : row.report.context)
      if (k == "p") p = v;
    out << axis << ',' << fmt17(row.value) << ',' << row.report.name << ',' << p << ','
        << fmt17(row.report.lhs) << ',' << fmt17(row.report.rhs) << ','
        << fmt17(row.report.margin) << ',' << (row.report.pass ? "true" : "false") << '\n';
  }
  if (!out) throw ConfigError("output: failed writing " + path);
}

// ---------------------------------------------------------------------------
// Oracle fixtures.

namespace {

json plateau_to_json(const PlateauState& s) {
  json row = json::object();
  row["breaks"] = s.breaks;
  row["heights"] = s.heights;
  row["mass"] = s.mass();
  return row;
}

json fixture_plateau_indicator() {
  PlateauState u0;
  u0.breaks = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
  u0.heights = {0.0, 1.0, 0.0};
  json out = json::object();
  out["fixture"] = "plateau-indicator";
  out["first_merge"] = plateau_first_merge(u0);
  out["extinction"] = plateau_extinction_time(u0);
  json states = json::array();
  for (double t : {0.02, 0.05, 0.08, 1.0 / 9.0, 0.2, 1.0 / 3.0}) {
    json row = plateau_to_json(plateau_ode_oracle(u0, t));
    row["t"] = t;
    states.push_back(std::move(row));
  }
  out["states"] = std::move(states);
  return out;
}

json fixture_dense_tv() {
  const int n = 30;
  json out = json::object();
  out["fixture"] = "dense-tv-n30";
  json rows = json::array();
  for (BoundaryKind bk : {BoundaryKind::neumann, BoundaryKind::dirichlet_zero}) {
    const Domain dom = Domain::interval(1.0, n, bk);
    Rng rng(42);
    GridFunction v = GridFunction::zeros(dom);
    for (double& x : v.values) x = rng.uniform(-1.0, 1.0);
    DenseProxProblem pb;
    pb.mass.assign(n, dom.cell_measure());
    pb.v = v.values;
    for (int i = 0; i + 1 < n; ++i) pb.pairs.push_back({i, i + 1, 1.0});
    if (bk == BoundaryKind::dirichlet_zero) {
      pb.pairs.push_back({0, -1, 1.0});
      pb.pairs.push_back({n - 1, -1, 1.0});
    }
    for (double mu : {1e-3, 1e-2, 1e-1}) {
      double gap = 0.0;
      const std::vector<double> ref = dense_resolvent_oracle(pb, mu, &gap);
      const GridFunction u = tv_resolvent_1d(dom, v, mu);
      double d = 0.0;
      for (int i = 0; i < n; ++i)
        d = std::max(d, std::fabs(u.values[static_cast<size_t>(i)] -
                                  ref[static_cast<size_t>(i)]));
      json row = json::object();
      row["boundary"] = bk == BoundaryKind::neumann ? "neumann" : "dirichlet_zero";
      row["mu"] = mu;
      row["sup_diff"] = d;
      row["oracle_gap"] = gap;
      rows.push_back(std::move(row));
    }
  }
  out["rows"] = std::move(rows);
  return out;
}

json fixture_dense_frac() {
  FractionalSpec spec;
  spec.s = 0.5;
  spec.cells = 8;
  spec.collar_cells = 16;
  spec.length = 1.0;
  const FractionalBackend fb(spec);
  const Domain& dom = fb.domain();
  Rng rng(7);
  GridFunction v = GridFunction::zeros(dom);
  for (double& x : v.values) x = rng.uniform(-1.0, 1.0);
  DenseProxProblem pb;
  pb.mass.assign(static_cast<size_t>(spec.cells), dom.cell_measure());
  pb.v = v.values;
  pb.pairs = fb.pairs();
  ResolventTolerance tol;
  tol.mode = ResolventTolerance::Mode::exact;
  tol.rel_gap = 1e-9;
  json out = json::object();
  out["fixture"] = "dense-frac-n8";
  json rows = json::array();
  for (double mu : {1e-3, 1e-2, 1e-1}) {
    double gap = 0.0;
    const std::vector<double> ref = dense_resolvent_oracle(pb, mu, &gap);
    const GridFunction u = fb.resolvent(mu, v, tol, nullptr);
    double d = 0.0;
    for (int i = 0; i < spec.cells; ++i)
      d = std::max(d,
                   std::fabs(u.values[static_cast<size_t>(i)] - ref[static_cast<size_t>(i)]));
    json row = json::object();
    row["mu"] = mu;
    row["sup_diff"] = d;
    row["oracle_gap"] = gap;
    rows.push_back(std::move(row));
  }
  out["rows"] = std::move(rows);
  return out;
}

json fixture_gronwall() {
  json out = json::object();
  out["fixture"] = "gronwall-table";
  json rows = json::array();
  for (double omega : {0.0, 0.25, 1.0, 4.0})
    for (double L : {1.0, 2.0})
      for (double t : {0.1, 1.0, 2.0}) {
        const double plain = gronwall_constant(omega, L, t, GronwallVariant::exp_kernel);
        const double weighted =
            gronwall_constant(omega, L, t, GronwallVariant::time_weighted_kernel);
        const double plain_ref = quadrature_oracle(QuadIntegrand::factor_plain, omega, L, t);
        const double weighted_ref =
            quadrature_oracle(QuadIntegrand::factor_weighted, omega, L, t);
        json row = json::object();
        row["omega"] = omega;
        row["L"] = L;
        row["t"] = t;
        row["exp_kernel"] = plain;
        row["exp_kernel_ref"] = plain_ref;
        row["exp_kernel_rel_diff"] = std::fabs(plain - plain_ref) / plain_ref;
        row["time_weighted"] = weighted;
        row["time_weighted_ref"] = weighted_ref;
        row["time_weighted_rel_diff"] = std::fabs(weighted - weighted_ref) / weighted_ref;
        rows.push_back(std::move(row));
      }
  out["rows"] = std::move(rows);
  return out;
}

}  // namespace

std::vector<std::string> oracle_fixture_names() {
  return {"plateau-indicator", "dense-tv-n30", "dense-frac-n8", "gronwall-table"};
}

std::string oracle_fixture(const std::string& which) {
  json out;
  if (which == "plateau-indicator")
    out = fixture_plateau_indicator();
  else if (which == "dense-tv-n30")
    out = fixture_dense_tv();
  else if (which == "dense-frac-n8")
    out = fixture_dense_frac();
  else if (which == "gronwall-table")
    out = fixture_gronwall();
  else
    throw ConfigError("oracle: unknown fixture '" + which + "'");
  return out.dump(2) + "\n";
}

}  // namespace homflow
