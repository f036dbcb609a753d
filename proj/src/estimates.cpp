#include "homflow/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace homflow {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string num(int v) { return std::to_string(v); }

std::string norm_label(double p) { return std::isinf(p) ? "inf" : num(p); }

}  // namespace

InequalityReport InequalityReport::make(std::string name, double lhs, double rhs, double slack,
                                        std::vector<std::pair<std::string, std::string>> ctx) {
  InequalityReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack_budget = slack;
  r.margin = rhs + slack - lhs;
  r.pass = lhs <= rhs + slack;
  r.context = std::move(ctx);
  return r;
}

double mass(const GridFunction& u) { return u.weighted_sum(); }

double plus_mass(const GridFunction& u, double level) {
  double s = 0.0;
  for (size_t i = 0; i < u.values.size(); ++i)
    s += u.cell_measure[i] * std::max(u.values[i] - level, 0.0);
  return s;
}

double fit_log_slope(const std::vector<double>& ts, const std::vector<double>& ys,
                     double* intercept) {
  if (ts.size() != ys.size() || ts.size() < 2)
    throw ConfigError("slope fit: need matching series with at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(ts.size());
  for (size_t k = 0; k < ts.size(); ++k) {
    if (!(ts[k] > 0.0) || !(ys[k] > 0.0))
      throw ConfigError("slope fit: series entries must be positive");
    const double x = std::log(ts[k]), y = std::log(ys[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double det = n * sxx - sx * sx;
  if (det == 0.0) throw ConfigError("slope fit: degenerate time series");
  const double slope = (n * sxy - sx * sy) / det;
  if (intercept) *intercept = (sy - slope * sx) / n;
  return slope;
}

InequalityReport check_resolvent_homogeneity(const OperatorBackend& op, const GridFunction& v,
                                             double mu, double lambda,
                                             const ResolventTolerance& tol, double slack) {
  if (!(lambda > 0.0)) throw ConfigError("homogeneity: lambda must be positive");
  if (!op.homogeneous_zero)
    throw ConfigError("homogeneity: backend does not declare zero-order homogeneity");
  const GridFunction lhs_fn =
      gf_scale(op.resolvent(lambda * mu, gf_scale(v, lambda), tol), 1.0 / lambda);
  const GridFunction rhs_fn = op.resolvent(mu, v, tol);
  return InequalityReport::make(
      "resolvent_homogeneity", gf_dist(lhs_fn, rhs_fn, inf()), 0.0, slack,
      {{"backend", op.name()}, {"mu", num(mu)}, {"lambda", num(lambda)}});
}

InequalityReport check_semigroup_homogeneity(const OperatorBackend& op, const GridFunction& u0,
                                             double t, double lambda, int n,
                                             const ResolventTolerance& tol, double slack) {
  if (!(lambda > 0.0)) throw ConfigError("homogeneity: lambda must be positive");
  if (!op.homogeneous_zero)
    throw ConfigError("homogeneity: backend does not declare zero-order homogeneity");
  const GridFunction scaled =
      gf_scale(resolvent_iterate(op, gf_scale(u0, lambda), lambda * t, n, tol), 1.0 / lambda);
  const GridFunction plain = resolvent_iterate(op, u0, t, n, tol);
  return InequalityReport::make(
      "semigroup_homogeneity", gf_dist(scaled, plain, inf()), 0.0, slack,
      {{"backend", op.name()}, {"t", num(t)}, {"lambda", num(lambda)}, {"n", num(n)}});
}

InequalityReport check_global_decay(const OperatorBackend& op, const QuotientPair& q,
                                    const GridFunction& u0, double p, double slack) {
  const double lhs = gf_dist(q.at_t_h, q.at_t, p) / q.h;
  const double rhs =
      2.0 * op.lipschitz_L * std::exp(op.omega * q.t) * u0.norm(p) / q.t;
  return InequalityReport::make("global_decay", lhs, rhs, slack,
                                {{"backend", op.name()},
                                 {"t", num(q.t)},
                                 {"h", num(q.h)},
                                 {"n", num(q.n)},
                                 {"p", norm_label(p)}});
}

InequalityReport check_pointwise_bound(const OperatorBackend& op, const QuotientPair& q,
                                       const GridFunction& u0, double slack) {
  if (!op.order_preserving)
    throw ConfigError("pointwise bound: backend is not order preserving");
  if (op.omega != 0.0)
    throw ConfigError("pointwise bound: only available for unshifted operators");
  if (u0.min_value() < 0.0)
    throw ConfigError("pointwise bound: initial state must be nonnegative");
  const double ratio = q.h / q.t;
  double excess = -inf();
  for (size_t i = 0; i < q.at_t.values.size(); ++i)
    excess = std::max(excess,
                      q.at_t_h.values[i] - q.at_t.values[i] - ratio * q.at_t.values[i]);
  return InequalityReport::make(
      "pointwise_bound", excess, 0.0, slack,
      {{"backend", op.name()}, {"t", num(q.t)}, {"h", num(q.h)}, {"n", num(q.n)}});
}

std::vector<InequalityReport> check_mass_estimates(const OperatorBackend& op,
                                                   const QuotientPair& q, const GridFunction& u0,
                                                   double slack) {
  if (!op.mass_conserving)
    throw ConfigError("mass estimates: backend does not conserve the integral");
  if (u0.min_value() < 0.0)
    throw ConfigError("mass estimates: initial state must be nonnegative");
  std::vector<std::pair<std::string, std::string>> ctx = {
      {"backend", op.name()}, {"t", num(q.t)}, {"h", num(q.h)}, {"n", num(q.n)}};
  const double m0 = mass(u0);
  const double drift =
      std::max(std::fabs(mass(q.at_t) - m0), std::fabs(mass(q.at_t_h) - m0));
  const GridFunction diff = gf_sub(q.at_t_h, q.at_t);
  const double plus = plus_mass(diff, 0.0);
  const double minus = plus_mass(gf_scale(diff, -1.0), 0.0);
  const double bound = (q.h / q.t) * m0;
  std::vector<InequalityReport> out;
  out.push_back(InequalityReport::make("mass_conservation", drift, 0.0, slack, ctx));
  out.push_back(InequalityReport::make("mass_quotient_plus", plus, bound, slack, ctx));
  out.push_back(InequalityReport::make("mass_quotient_minus", minus, bound, slack, ctx));
  out.push_back(
      InequalityReport::make("mass_quotient_balance", std::fabs(plus - minus), 0.0, slack, ctx));
  return out;
}

std::vector<InequalityReport> check_complete_contraction(const OperatorBackend& op,
                                                         const GridFunction& a,
                                                         const GridFunction& b, double t, int n,
                                                         int levels, const ResolventTolerance& tol,
                                                         double slack) {
  if (!op.completely_accretive)
    throw ConfigError("contraction: backend does not declare the level-set structure");
  if (levels < 2) throw ConfigError("contraction: need at least two levels");
  a.require_compatible(b);
  const GridFunction ta = resolvent_iterate(op, a, t, n, tol);
  const GridFunction tb = resolvent_iterate(op, b, t, n, tol);
  const GridFunction d0 = gf_sub(a, b);
  const GridFunction d1 = gf_sub(ta, tb);
  const GridFunction d0n = gf_scale(d0, -1.0);
  const GridFunction d1n = gf_scale(d1, -1.0);
  std::vector<std::pair<std::string, std::string>> ctx = {
      {"backend", op.name()}, {"t", num(t)}, {"n", num(n)}};

  std::vector<InequalityReport> out;
  const double k_hi_p = std::max(d0.max_value(), 0.0);
  const double k_hi_m = std::max(d0n.max_value(), 0.0);
  for (int j = 0; j < levels; ++j) {
    const double f = static_cast<double>(j) / (levels - 1);
    auto ctx_k = ctx;
    const double kp = f * k_hi_p;
    ctx_k.push_back({"level", num(kp)});
    out.push_back(InequalityReport::make("levelset_contraction_upper", plus_mass(d1, kp),
                                         plus_mass(d0, kp), slack, ctx_k));
    const double km = f * k_hi_m;
    ctx_k.back() = {"level", num(km)};
    out.push_back(InequalityReport::make("levelset_contraction_lower", plus_mass(d1n, km),
                                         plus_mass(d0n, km), slack, ctx_k));
  }
  for (double p : {1.0, 2.0, inf()}) {
    auto ctx_p = ctx;
    ctx_p.push_back({"p", norm_label(p)});
    out.push_back(
        InequalityReport::make("lq_contraction", d1.norm(p), d0.norm(p), slack, ctx_p));
  }
  if (op.order_preserving && d0.max_value() <= 0.0) {
    out.push_back(
        InequalityReport::make("order_preservation", d1.max_value(), 0.0, slack, ctx));
  }
  return out;
}

InequalityReport check_perturbed_decay(const OperatorBackend& op, const CaratheodoryMap& F,
                                       const QuotientPair& q, const GridFunction& u0, double p,
                                       GronwallVariant variant, double slack) {
  const double omega = op.omega + F.omega();
  const double c = gronwall_constant(omega, op.lipschitz_L, q.t, variant);
  const double lhs = gf_dist(q.at_t_h, q.at_t, p) / q.h;
  const double rhs = c * u0.norm(p) / q.t;
  const char* variant_label = variant == GronwallVariant::exp_kernel ? "exp_kernel"
                              : variant == GronwallVariant::time_weighted_kernel
                                  ? "time_weighted_kernel"
                                  : "looser";
  return InequalityReport::make("perturbed_decay", lhs, rhs, slack,
                                {{"backend", op.name()},
                                 {"perturbation", F.label()},
                                 {"omega", num(omega)},
                                 {"variant", variant_label},
                                 {"t", num(q.t)},
                                 {"h", num(q.h)},
                                 {"n", num(q.n)},
                                 {"p", norm_label(p)}});
}

InequalityReport check_forced_decay(const OperatorBackend& op, const ForcingTerm& f,
                                    const QuotientPair& q, const GridFunction& u0, double p,
                                    double slack) {
  if (f.kind != ForcingTerm::Kind::sampled)
    throw ConfigError("forced decay: needs a sampled forcing");
  const double omega = op.omega;
  const double L = op.lipschitz_L;
  const double t = q.t;
  // Integrate over each sample interval so interpolation kinks land on
  // quadrature endpoints.
  auto integrate_series = [&](const std::function<double(double)>& g) {
    double acc = 0.0;
    double lo = 0.0;
    for (size_t k = 0; k + 1 < f.sample_times.size() && lo < t; ++k) {
      const double hi = std::min(f.sample_times[k + 1], t);
      if (hi > lo) acc += integrate_adaptive(g, lo, hi, 1e-10);
      lo = hi;
    }
    if (lo < t) acc += integrate_adaptive(g, lo, t, 1e-10);
    return acc;
  };
  const double drift_term = f.derivative_samples.empty()
                                ? 0.0
                                : integrate_series([&](double s) {
                                    return std::exp(-omega * s) * s * f.derivative(s).norm(p);
                                  });
  const double size_term = integrate_series(
      [&](double s) { return std::exp(-omega * s) * f.eval(s).norm(p); });
  const double rhs =
      (L * std::exp(omega * t) / t) * (2.0 * u0.norm(p) + drift_term + size_term);
  const double lhs = gf_dist(q.at_t_h, q.at_t, p) / q.h;
  return InequalityReport::make("forced_decay", lhs, rhs, slack,
                                {{"backend", op.name()},
                                 {"t", num(t)},
                                 {"h", num(q.h)},
                                 {"n", num(q.n)},
                                 {"p", norm_label(p)}});
}

InequalityReport check_smoothing_slope(const Trajectory& tr, double expected_slope) {
  std::vector<double> ts, ys;
  for (size_t k = 0; k < tr.grid.times.size(); ++k) {
    const double t = tr.grid.times[k];
    const double y = tr.states[k].norm(inf());
    if (t > 0.0 && y > 0.0) {
      ts.push_back(t);
      ys.push_back(y);
    }
  }
  double intercept = 0.0;
  const double slope = fit_log_slope(ts, ys, &intercept);
  // Informational row: unbounded slack, records the fit for inspection.
  return InequalityReport::make("smoothing_slope", slope, expected_slope, 1e308,
                                {{"fitted_slope", num(slope)},
                                 {"expected_slope", num(expected_slope)},
                                 {"intercept", num(intercept)},
                                 {"points", num(static_cast<int>(ts.size()))}});
}

std::vector<InequalityReport> validate_trajectory_decay(const OperatorBackend& op,
                                                        const Trajectory& tr, double rel_slack) {
  if (tr.states.size() != tr.grid.times.size())
    throw ConfigError("trajectory: states and times must pair up");
  if (!(rel_slack >= 0.0)) throw ConfigError("trajectory: rel_slack must be nonnegative");
  const double base = tr.states.front().norm(1.0);
  std::vector<InequalityReport> out;
  for (size_t k = 1; k + 1 < tr.states.size(); ++k) {
    const double t = tr.grid.times[k];
    const double h = tr.grid.times[k + 1] - t;
    const double lhs = gf_dist(tr.states[k + 1], tr.states[k], 1.0) / h;
    const double rhs = 2.0 * op.lipschitz_L * std::exp(op.omega * t) * base / t;
    out.push_back(InequalityReport::make(
        "trajectory_decay", lhs, rhs, rel_slack * rhs,
        {{"backend", op.name()}, {"t", num(t)}, {"h", num(h)}}));
  }
  return out;
}

}  // namespace homflow
