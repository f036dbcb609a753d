#include "homflow/engine.hpp"

#include <algorithm>
#include <cmath>

namespace homflow {

// ---------------------------------------------------------------------------
// Time grids.

TimeGrid TimeGrid::linear(double t_end, int segments) {
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    throw ConfigError("time grid: t_end must be positive");
  if (segments < 1) throw ConfigError("time grid: need at least one segment");
  TimeGrid g;
  g.times.resize(static_cast<size_t>(segments) + 1);
  for (int k = 0; k <= segments; ++k)
    g.times[static_cast<size_t>(k)] = t_end * static_cast<double>(k) / segments;
  g.validate();
  return g;
}

TimeGrid TimeGrid::log_spaced(double t_first, double t_end, int points) {
  if (!(t_first > 0.0) || !(t_end >= t_first) || !std::isfinite(t_end))
    throw ConfigError("time grid: need 0 < t_first <= t_end");
  if (points < 1) throw ConfigError("time grid: need at least one point");
  if (points == 1 && t_first != t_end)
    throw ConfigError("time grid: a single point requires t_first == t_end");
  TimeGrid g;
  g.times.push_back(0.0);
  for (int k = 0; k < points; ++k) {
    const double f = points == 1 ? 0.0 : static_cast<double>(k) / (points - 1);
    g.times.push_back(t_first * std::pow(t_end / t_first, f));
  }
  g.times.back() = t_end;  // pin the endpoint against pow roundoff
  g.validate();
  return g;
}

void TimeGrid::validate() const {
  if (times.empty()) throw ConfigError("time grid: empty");
  if (times[0] != 0.0) throw ConfigError("time grid: must start at zero");
  for (size_t k = 0; k + 1 < times.size(); ++k) {
    if (!(times[k + 1] > times[k]) || !std::isfinite(times[k + 1]))
      throw ConfigError("time grid: times must be finite and strictly increasing");
  }
}

// ---------------------------------------------------------------------------
// Forcing terms.

ForcingTerm ForcingTerm::constant(const GridFunction& f) {
  ForcingTerm ft;
  ft.kind = Kind::step;
  ft.breaks = {0.0};
  ft.piece_values = {f};
  return ft;
}

ForcingTerm ForcingTerm::step_profile(std::vector<double> breaks,
                                      std::vector<GridFunction> values) {
  ForcingTerm ft;
  ft.kind = Kind::step;
  ft.breaks = std::move(breaks);
  ft.piece_values = std::move(values);
  return ft;
}

ForcingTerm ForcingTerm::sampled_profile(std::vector<double> times,
                                         std::vector<GridFunction> values,
                                         std::vector<GridFunction> derivatives) {
  ForcingTerm ft;
  ft.kind = Kind::sampled;
  ft.sample_times = std::move(times);
  ft.samples = std::move(values);
  ft.derivative_samples = std::move(derivatives);
  return ft;
}

void ForcingTerm::validate(const std::string& domain_id) const {
  auto check_states = [&](const std::vector<GridFunction>& states, const char* what) {
    for (const GridFunction& g : states) {
      if (g.domain_id != domain_id) {
        throw ConfigError(std::string("forcing: ") + what + " live on the wrong domain");
      }
      require_finite(g.values, what);
    }
  };
  if (kind == Kind::step) {
    if (breaks.empty() || breaks.size() != piece_values.size())
      throw ConfigError("forcing: breaks and piece values must pair up");
    if (breaks[0] != 0.0) throw ConfigError("forcing: first break must be zero");
    for (size_t k = 0; k + 1 < breaks.size(); ++k)
      if (!(breaks[k + 1] > breaks[k]))
        throw ConfigError("forcing: breaks must be strictly increasing");
    check_states(piece_values, "piece values");
  } else {
    if (sample_times.size() < 2) throw ConfigError("forcing: need at least two samples");
    if (samples.size() != sample_times.size())
      throw ConfigError("forcing: samples and sample times must pair up");
    if (!derivative_samples.empty() && derivative_samples.size() != sample_times.size())
      throw ConfigError("forcing: derivative samples must pair with sample times");
    for (size_t k = 0; k + 1 < sample_times.size(); ++k)
      if (!(sample_times[k + 1] > sample_times[k]))
        throw ConfigError("forcing: sample times must be strictly increasing");
    check_states(samples, "samples");
    check_states(derivative_samples, "derivative samples");
  }
}

namespace {

GridFunction interp_states(const std::vector<double>& ts, const std::vector<GridFunction>& gs,
                           double t) {
  if (t <= ts.front()) return gs.front();
  if (t >= ts.back()) return gs.back();
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const size_t k = static_cast<size_t>(it - ts.begin()) - 1;
  const double th = (t - ts[k]) / (ts[k + 1] - ts[k]);
  return gf_add(gf_scale(gs[k], 1.0 - th), gf_scale(gs[k + 1], th));
}

}  // namespace

GridFunction ForcingTerm::eval(double t) const {
  if (kind == Kind::step) {
    const auto it = std::upper_bound(breaks.begin(), breaks.end(), t);
    const size_t k = it == breaks.begin() ? 0 : static_cast<size_t>(it - breaks.begin()) - 1;
    return piece_values[k];
  }
  return interp_states(sample_times, samples, t);
}

GridFunction ForcingTerm::derivative(double t) const {
  if (kind != Kind::sampled)
    throw ConfigError("forcing: derivative is only defined for sampled forcings");
  if (derivative_samples.empty())
    throw ConfigError("forcing: no derivative samples were provided");
  return interp_states(sample_times, derivative_samples, t);
}

bool ForcingTerm::refines(const TimeGrid& grid) const {
  if (kind != Kind::step) return true;
  const double t_end = grid.times.back();
  const double tol = 1e-12 * std::max(t_end, 1.0);
  for (double b : breaks) {
    if (b <= 0.0 || b >= t_end) continue;
    bool found = false;
    for (double t : grid.times)
      if (std::fabs(t - b) <= tol) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Refinement policy.

RefinePolicy RefinePolicy::fixed_n(int n) {
  RefinePolicy p;
  p.kind = Kind::fixed;
  p.n_fixed = n;
  p.validate();
  return p;
}

RefinePolicy RefinePolicy::doubling(int n_start, int n_max, double tol_rel) {
  RefinePolicy p;
  p.kind = Kind::doubling;
  p.n_start = n_start;
  p.n_max = n_max;
  p.tol_rel = tol_rel;
  p.validate();
  return p;
}

void RefinePolicy::validate() const {
  if (kind == Kind::fixed) {
    if (n_fixed < 1) throw ConfigError("refine: n must be >= 1");
    return;
  }
  if (n_start < 1 || n_max < 2 * n_start)
    throw ConfigError("refine: need 1 <= n_start and n_max >= 2 * n_start");
  if (!(tol_rel > 0.0)) throw ConfigError("refine: tol_rel must be positive");
}

// ---------------------------------------------------------------------------
// Stepping.

namespace {

void require_op_state(const OperatorBackend& op, const GridFunction& u, const char* what) {
  if (op.domain().id() != u.domain_id)
    throw ConfigError(std::string(what) + ": state lives on the wrong domain");
}

// Advance one macro segment under the refinement policy.  `adv` runs the
// micro stepper with a given micro-step count.
template <class Advance>
std::pair<GridFunction, StepMeta> refine_segment(const Advance& adv, const RefinePolicy& pol) {
  if (pol.kind == RefinePolicy::Kind::fixed) {
    StepMeta meta;
    meta.n = pol.n_fixed;
    return {adv(pol.n_fixed), meta};
  }
  int n = pol.n_start;
  GridFunction a = adv(n);
  while (true) {
    if (2 * n > pol.n_max)
      throw SolverError("refine: n_max reached before meeting tol_rel");
    GridFunction b = adv(2 * n);
    const double d = gf_dist(a, b, 1.0);
    if (d <= pol.tol_rel * std::max(b.norm(1.0), 1e-300)) {
      StepMeta meta;
      meta.n = 2 * n;
      meta.refine_distance = d;
      return {std::move(b), meta};
    }
    a = std::move(b);
    n *= 2;
  }
}

GridFunction perturbed_micro_step(const OperatorBackend& op, const CaratheodoryMap& F,
                                  const GridFunction& u_prev, double mu,
                                  const ResolventTolerance& tol, ResolventScratch* scratch) {
  // Fixed point w = J_mu(u_prev - mu F(w)); contraction factor mu * omega_F.
  GridFunction w = u_prev;
  for (int m = 0; m < 200; ++m) {
    const GridFunction arg = gf_sub(u_prev, gf_scale(F.apply(w), mu));
    GridFunction w_next = op.resolvent(mu, arg, tol, scratch);
    const double d = gf_dist(w, w_next, inf());
    w = std::move(w_next);
    if (d <= 1e-10 * std::max(w.norm(inf()), 1e-30)) return w;
  }
  throw SolverError("perturbed step: fixed point did not converge in 200 sweeps");
}

GridFunction perturbed_iterate(const OperatorBackend& op, const CaratheodoryMap& F,
                               const GridFunction& u0, double span, int n,
                               const ResolventTolerance& tol) {
  const double mu = span / n;
  if (!(mu * F.omega() < 0.5))
    throw ConfigError("perturbed step: need mu * omega_F < 1/2; refine the stepping");
  auto scratch = op.make_scratch();
  GridFunction u = u0;
  for (int k = 0; k < n; ++k) u = perturbed_micro_step(op, F, u, mu, tol, scratch.get());
  return u;
}

}  // namespace

GridFunction resolvent_iterate(const OperatorBackend& op, const GridFunction& u0, double t, int n,
                               const ResolventTolerance& tol) {
  require_op_state(op, u0, "iterate");
  if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("iterate: t must be nonnegative");
  if (n < 1) throw ConfigError("iterate: n must be >= 1");
  tol.validate();
  if (t == 0.0) return u0;
  const double mu = t / n;
  auto scratch = op.make_scratch();
  GridFunction u = u0;
  for (int k = 0; k < n; ++k) u = op.resolvent(mu, u, tol, scratch.get());
  return u;
}

GridFunction forced_iterate(const OperatorBackend& op, const GridFunction& u0,
                            const ForcingTerm& f, double t0, double t1, int n,
                            const ResolventTolerance& tol) {
  require_op_state(op, u0, "forced iterate");
  if (!(t0 >= 0.0) || !(t1 >= t0) || !std::isfinite(t1))
    throw ConfigError("forced iterate: need 0 <= t0 <= t1");
  if (n < 1) throw ConfigError("forced iterate: n must be >= 1");
  tol.validate();
  f.validate(u0.domain_id);
  if (t1 == t0) return u0;
  const double mu = (t1 - t0) / n;
  if (f.kind == ForcingTerm::Kind::step) {
    for (double b : f.breaks)
      if (b > t0 + 1e-12 * std::max(1.0, t1) && b < t1 - 1e-12 * std::max(1.0, t1))
        throw ConfigError("forced iterate: a forcing break falls inside the span; "
                          "align the time grid with the breaks");
  }
  auto scratch = op.make_scratch();
  GridFunction u = u0;
  for (int k = 0; k < n; ++k) {
    const double t_mid = t0 + (static_cast<double>(k) + 0.5) * mu;
    u = op.resolvent(mu, gf_add(u, gf_scale(f.eval(t_mid), mu)), tol, scratch.get());
  }
  return u;
}

Trajectory evolve(const OperatorBackend& op, const GridFunction& u0, const TimeGrid& grid,
                  const RefinePolicy& policy, const ResolventTolerance& tol) {
  require_op_state(op, u0, "evolve");
  grid.validate();
  policy.validate();
  tol.validate();
  Trajectory tr;
  tr.grid = grid;
  tr.states.push_back(u0);
  for (int k = 0; k < grid.segments(); ++k) {
    const double span = grid.times[static_cast<size_t>(k + 1)] - grid.times[static_cast<size_t>(k)];
    const GridFunction& u = tr.states.back();
    auto [next, meta] = refine_segment(
        [&](int n) { return resolvent_iterate(op, u, span, n, tol); }, policy);
    tr.states.push_back(std::move(next));
    tr.meta.push_back(meta);
  }
  return tr;
}

Trajectory evolve_forced(const OperatorBackend& op, const GridFunction& u0, const ForcingTerm& f,
                         const TimeGrid& grid, const RefinePolicy& policy,
                         const ResolventTolerance& tol) {
  require_op_state(op, u0, "evolve");
  grid.validate();
  policy.validate();
  tol.validate();
  f.validate(u0.domain_id);
  if (!f.refines(grid))
    throw ConfigError("evolve: step forcing breaks must appear among the grid times");
  Trajectory tr;
  tr.grid = grid;
  tr.states.push_back(u0);
  for (int k = 0; k < grid.segments(); ++k) {
    const double t0 = grid.times[static_cast<size_t>(k)];
    const double t1 = grid.times[static_cast<size_t>(k + 1)];
    const GridFunction& u = tr.states.back();
    auto [next, meta] = refine_segment(
        [&](int n) { return forced_iterate(op, u, f, t0, t1, n, tol); }, policy);
    tr.states.push_back(std::move(next));
    tr.meta.push_back(meta);
  }
  return tr;
}

Trajectory evolve_perturbed(const OperatorBackend& op, const CaratheodoryMap& F,
                            const GridFunction& u0, const TimeGrid& grid,
                            const RefinePolicy& policy, const ResolventTolerance& tol) {
  require_op_state(op, u0, "evolve");
  grid.validate();
  policy.validate();
  tol.validate();
  Trajectory tr;
  tr.grid = grid;
  tr.states.push_back(u0);
  for (int k = 0; k < grid.segments(); ++k) {
    const double span = grid.times[static_cast<size_t>(k + 1)] - grid.times[static_cast<size_t>(k)];
    const GridFunction& u = tr.states.back();
    auto [next, meta] = refine_segment(
        [&](int n) { return perturbed_iterate(op, F, u, span, n, tol); }, policy);
    tr.states.push_back(std::move(next));
    tr.meta.push_back(meta);
  }
  return tr;
}

QuotientPair difference_quotient(const OperatorBackend& op, const GridFunction& u0, double t,
                                 double h, int n, const ResolventTolerance& tol) {
  if (!(t > 0.0) || !(h > 0.0)) throw ConfigError("quotient: need t > 0 and h > 0");
  QuotientPair q;
  q.at_t = resolvent_iterate(op, u0, t, n, tol);
  q.at_t_h = resolvent_iterate(op, u0, t + h, n, tol);
  q.t = t;
  q.h = h;
  q.n = n;
  return q;
}

QuotientPair forced_difference_quotient(const OperatorBackend& op, const GridFunction& u0,
                                        const ForcingTerm& f, double t, double h, int n,
                                        const ResolventTolerance& tol) {
  if (!(t > 0.0) || !(h > 0.0)) throw ConfigError("quotient: need t > 0 and h > 0");
  if (f.kind != ForcingTerm::Kind::sampled)
    throw ConfigError("quotient: forced quotients need a sampled forcing");
  QuotientPair q;
  q.at_t = forced_iterate(op, u0, f, 0.0, t, n, tol);
  q.at_t_h = forced_iterate(op, u0, f, 0.0, t + h, n, tol);
  q.t = t;
  q.h = h;
  q.n = n;
  return q;
}

QuotientPair perturbed_difference_quotient(const OperatorBackend& op, const CaratheodoryMap& F,
                                           const GridFunction& u0, double t, double h, int n,
                                           const ResolventTolerance& tol) {
  if (!(t > 0.0) || !(h > 0.0)) throw ConfigError("quotient: need t > 0 and h > 0");
  require_op_state(op, u0, "quotient");
  tol.validate();
  QuotientPair q;
  q.at_t = perturbed_iterate(op, F, u0, t, n, tol);
  q.at_t_h = perturbed_iterate(op, F, u0, t + h, n, tol);
  q.t = t;
  q.h = h;
  q.n = n;
  return q;
}

// ---------------------------------------------------------------------------
// Quadrature and growth constants.

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double fa, double b, double fb,
             double m, double fm, double whole, double abs_tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, fa, m, fm, flm);
  const double right = simpson(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * abs_tol)
    return left + right + delta / 15.0;
  return adapt(f, a, fa, m, fm, lm, flm, left, 0.5 * abs_tol, depth - 1) +
         adapt(f, m, fm, b, fb, rm, frm, right, 0.5 * abs_tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol) {
  if (!(b >= a)) throw ConfigError("integrate: need b >= a");
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = simpson(a, fa, b, fb, fm);
  const double abs_tol = tol * std::max(std::fabs(whole), 1e-30);
  return adapt(f, a, fa, b, fb, m, fm, whole, abs_tol, 40);
}

double gronwall_constant(double omega, double L, double t, GronwallVariant variant) {
  if (!(omega >= 0.0) || !std::isfinite(omega))
    throw ConfigError("growth constant: omega must be finite and nonnegative");
  if (!(L >= 1.0) || !std::isfinite(L))
    throw ConfigError("growth constant: L must be finite and >= 1");
  if (!(t >= 0.0) || !std::isfinite(t))
    throw ConfigError("growth constant: t must be finite and nonnegative");
  if (variant == GronwallVariant::looser)
    return std::max(gronwall_constant(omega, L, t, GronwallVariant::exp_kernel),
                    gronwall_constant(omega, L, t, GronwallVariant::time_weighted_kernel));
  if (omega == 0.0 || t == 0.0) return 2.0 * L;

  // Inner integrals in closed form; only the outer one is numeric.
  const double ewt = std::exp(-omega * t);
  std::function<double(double)> inner;
  double c;
  if (variant == GronwallVariant::exp_kernel) {
    c = 2.0 * L * omega;
    inner = [=](double s) { return (std::exp(-omega * s) - ewt) / omega; };
  } else {
    c = L * omega;
    inner = [=](double s) {
      return ((omega * s + 1.0) * std::exp(-omega * s) - (omega * t + 1.0) * ewt) /
             (omega * omega);
    };
  }
  const double head = 2.0 * std::exp(c * inner(0.0));
  const double tail =
      omega * integrate_adaptive([&](double s) { return std::exp(c * inner(s)); }, 0.0, t, 1e-10);
  return std::exp(omega * t) * L * (head + tail);
}

}  // namespace homflow
