// Acceptance gate for the homogeneous-flow toolkit.  Ten numbered criteria,
// one PASS/FAIL line each; the process exits with the number of failures.
//
// Every tolerance is pinned here in code.  Slack terms are sized from solver
// certificates (per-step certified sup error times step count), never from
// the observed data.  Reference values come from the independent oracles:
// exact plateau dynamics, a dense active-set prox solver, and adaptive
// quadrature of the growth constants.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "homflow/engine.hpp"
#include "homflow/estimates.hpp"
#include "homflow/fractional_operator.hpp"
#include "homflow/grid.hpp"
#include "homflow/nemytskii.hpp"
#include "homflow/oracles.hpp"
#include "homflow/rng.hpp"
#include "homflow/tv_operator.hpp"

using namespace homflow;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

GridFunction random_state(const Domain& dom, uint64_t seed, double lo, double hi) {
  Rng rng(seed);
  std::vector<double> vals(static_cast<size_t>(dom.cell_count()));
  for (double& v : vals) v = rng.uniform(lo, hi);
  return GridFunction::from_values(dom, vals);
}

// Middle-third indicator sampled on a 1d grid; on 300 cells the breaks sit
// exactly on cell boundaries.
GridFunction middle_third(const Domain& dom, double height) {
  std::vector<double> vals(static_cast<size_t>(dom.cell_count()), 0.0);
  const double h = dom.spacing(0);
  for (int i = 0; i < dom.cells[0]; ++i) {
    const double x = (i + 0.5) * h;
    if (x >= 1.0 / 3.0 && x <= 2.0 / 3.0) vals[static_cast<size_t>(i)] = height;
  }
  return GridFunction::from_values(dom, vals);
}

PlateauState middle_third_plateaus() {
  return PlateauState{{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}, {0.0, 1.0, 0.0}};
}

int g_failures = 0;

void report(int index, const char* title, bool pass, const std::string& detail) {
  if (!pass) ++g_failures;
  std::printf("%s criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", index, title,
              detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

// --------------------------------------------------------------------------
// 1. Resolvent scaling identity: (1/lambda) J_{lambda mu}(lambda v) = J_mu(v).
void criterion_1() {
  const auto t0 = clock_type::now();
  constexpr double kTvTol = 1e-12;
  constexpr double kRelGap = 1e-8;
  constexpr double kFracTol = 5.0 * kRelGap;
  constexpr double kBudgetSec = 10.0;
  const double lambdas[] = {0.25, 4.0};
  const double mus[] = {1e-3, 1e-1};

  const Domain dom = Domain::interval(1.0, 200, BoundaryKind::neumann);
  const TvBackend1d tv(dom);
  double tv_worst = 0.0;
  bool rows_ok = true;
  for (int k = 0; k < 50; ++k) {
    const GridFunction v = random_state(dom, 101 + static_cast<uint64_t>(k), -1.0, 1.0);
    for (double lam : lambdas)
      for (double mu : mus) {
        const InequalityReport r =
            check_resolvent_homogeneity(tv, v, mu, lam, ResolventTolerance{}, kTvTol);
        tv_worst = std::max(tv_worst, r.lhs);
        rows_ok = rows_ok && r.pass;
      }
  }

  FractionalSpec spec;
  spec.s = 0.5;
  spec.cells = 8;
  const FractionalBackend frac(spec);
  ResolventTolerance tol;
  tol.mode = ResolventTolerance::Mode::duality_gap;
  tol.rel_gap = kRelGap;
  double frac_worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const GridFunction v = random_state(frac.domain(), 151 + static_cast<uint64_t>(k), -1.0, 1.0);
    for (double lam : lambdas)
      for (double mu : mus) {
        const InequalityReport r = check_resolvent_homogeneity(frac, v, mu, lam, tol, kFracTol);
        frac_worst = std::max(frac_worst, r.lhs);
        rows_ok = rows_ok && r.pass;
      }
  }

  const double el = seconds_since(t0);
  const bool pass = rows_ok && tv_worst <= kTvTol && frac_worst <= kFracTol && el < kBudgetSec;
  report(1, "resolvent scaling identity",
         pass,
         fmt("tv defect %.2e <= %.0e, nonlocal defect %.2e <= %.0e, %.1f s < %.0f s",
             tv_worst, kTvTol, frac_worst, kFracTol, el, kBudgetSec));
}

// --------------------------------------------------------------------------
// 2. Flow-map scaling against the exact plateau dynamics, plus first-order
// step-count convergence evidence.
//
// On the 1d grid the composed prox steps reproduce the flow exactly (the 1d
// prox path and the flow coincide), so the oracle defect sits at rounding
// level for every n and cannot show an order.  The convergence order of the
// stepping scheme is therefore evidenced on the nonlocal backend with seeded
// data, where each halving of the step brings the chain measurably closer to
// a fine-step reference.
void criterion_2() {
  const auto t0 = clock_type::now();
  constexpr double kDefectTol = 1e-3;      // times |u0|_1
  constexpr double kRatioLo = 0.3, kRatioHi = 0.7;
  constexpr double kBudgetSec = 60.0;

  const Domain dom = Domain::interval(1.0, 300, BoundaryKind::neumann);
  const TvBackend1d op(dom);
  const GridFunction u0 = middle_third(dom, 1.0);
  const PlateauState p0 = middle_third_plateaus();
  const double base = u0.norm(1.0);
  ResolventTolerance tol;

  double worst4096 = 0.0, worst8192 = 0.0;
  for (double lam : {0.5, 2.0})
    for (double t : {0.02, 0.05}) {
      const GridFunction ref = plateau_sample(plateau_ode_oracle(p0, t), dom);
      const GridFunction s4096 =
          gf_scale(resolvent_iterate(op, gf_scale(u0, lam), lam * t, 4096, tol), 1.0 / lam);
      const GridFunction s8192 =
          gf_scale(resolvent_iterate(op, gf_scale(u0, lam), lam * t, 8192, tol), 1.0 / lam);
      worst4096 = std::max(worst4096, gf_dist(s4096, ref, 1.0));
      worst8192 = std::max(worst8192, gf_dist(s8192, ref, 1.0));
    }

  FractionalSpec spec;
  spec.s = 0.5;
  spec.cells = 16;
  const FractionalBackend fop(spec);
  ResolventTolerance ftol;
  ftol.mode = ResolventTolerance::Mode::exact;
  ftol.scale_hint = 1.0;
  double ratio_lo = 1e300, ratio_hi = 0.0;
  int informative = 0;
  for (uint64_t seed : {201, 202, 203})
    for (double t : {0.02, 0.05}) {
      const GridFunction w0 = random_state(fop.domain(), seed, 0.0, 1.0);
      const GridFunction ref = resolvent_iterate(fop, w0, t, 4096, ftol);
      const double coarse = gf_dist(resolvent_iterate(fop, w0, t, 2, ftol), ref, 1.0);
      // A profile that goes extinct before t leaves every chain on the same
      // flat state; the defect then sits at the solver floor for all n and
      // carries no order information, so such combinations are skipped.
      if (coarse <= 1e-8) continue;
      ++informative;
      const double fine = gf_dist(resolvent_iterate(fop, w0, t, 64, ftol), ref, 1.0);
      // Per-doubling contraction aggregated over the five halvings 2 -> 64.
      const double mean_ratio = std::pow(fine / coarse, 1.0 / 5.0);
      ratio_lo = std::min(ratio_lo, mean_ratio);
      ratio_hi = std::max(ratio_hi, mean_ratio);
    }

  const double el = seconds_since(t0);
  const bool pass = worst4096 <= kDefectTol * base && worst8192 <= kDefectTol * base &&
                    informative >= 4 && ratio_lo >= kRatioLo && ratio_hi <= kRatioHi &&
                    el < kBudgetSec;
  report(2, "flow-map scaling and step-count convergence",
         pass,
         fmt("scaled-route defect %.2e (n=4096) / %.2e (n=8192) <= %.2e, per-doubling "
             "ratio in [%.2f, %.2f] within [%.1f, %.1f] over %d live combos, %.1f s < %.0f s",
             worst4096, worst8192, kDefectTol * base, ratio_lo, ratio_hi, kRatioLo, kRatioHi,
             informative, el, kBudgetSec));
}

// --------------------------------------------------------------------------
// 3. Two-sided speed limit |T_{t+h}u0 - T_t u0|_p <= 2 (h/t) |u0|_p for
// nonnegative data, all p in {1, 2, inf}, on both 1d backends.
void criterion_3() {
  const auto t0 = clock_type::now();
  constexpr double kRelSlack = 1e-6;  // multiplicative, covers chained certificates
  constexpr int kQuotientN = 64;
  constexpr double kBudgetSec = 300.0;
  const double ps[] = {1.0, 2.0, inf()};

  int violations = 0, checked = 0;
  double worst_ratio = 0.0;

  const auto sweep = [&](const OperatorBackend& op, uint64_t seed_base,
                         const ResolventTolerance& base_tol) {
    for (int k = 0; k < 20; ++k) {
      const GridFunction u0 =
          random_state(op.domain(), seed_base + static_cast<uint64_t>(k), 0.0, 1.0);
      ResolventTolerance tol = base_tol;
      tol.scale_hint = u0.norm(inf());
      for (int j = 1; j <= 10; ++j) {
        const double t = 0.02 * j;
        const double h = t / 100.0;
        const QuotientPair q = difference_quotient(op, u0, t, h, kQuotientN, tol);
        for (double p : ps) {
          const double lhs = gf_dist(q.at_t_h, q.at_t, p);
          const double rhs = 2.0 * (h / t) * u0.norm(p) * (1.0 + kRelSlack);
          ++checked;
          if (lhs > rhs) ++violations;
          worst_ratio = std::max(worst_ratio, lhs / rhs);
        }
      }
    }
  };

  const Domain dom = Domain::interval(1.0, 120, BoundaryKind::neumann);
  const TvBackend1d tv(dom);
  sweep(tv, 301, ResolventTolerance{});

  FractionalSpec spec;
  spec.s = 0.5;
  spec.cells = 16;
  const FractionalBackend frac(spec);
  ResolventTolerance ftol;
  ftol.mode = ResolventTolerance::Mode::duality_gap;
  ftol.rel_gap = 1e-10;  // 2 chains x 64 steps stay under the 1e-6 slack
  sweep(frac, 351, ftol);

  const double el = seconds_since(t0);
  const bool pass = violations == 0 && el < kBudgetSec;
  report(3, "two-sided decay speed limit",
         pass,
         fmt("%d checks, %d violations, worst lhs/bound %.6f, %.1f s < %.0f s", checked,
             violations, worst_ratio, el, kBudgetSec));
}

// --------------------------------------------------------------------------
// 4. Cellwise growth bound with its saturation case: on the outer plateaus of
// the middle-third indicator both the difference quotient and u(t)/t equal 3.
void criterion_4() {
  const auto t0 = clock_type::now();
  constexpr int kN = 4096;
  constexpr double kPointwiseSlack = 1e-10;
  constexpr double kSaturationTol = 1e-2;  // times 1/t

  const Domain dom = Domain::interval(1.0, 300, BoundaryKind::neumann);
  const TvBackend1d op(dom);
  const GridFunction u0 = middle_third(dom, 1.0);
  ResolventTolerance tol;

  bool pointwise_ok = true;
  double worst_sat = 0.0;  // |quotient - u(t)/t| * t, max over outer cells
  for (double t : {0.02, 0.05, 0.08}) {
    const double h = t / 100.0;
    const QuotientPair q = difference_quotient(op, u0, t, h, kN, tol);
    const InequalityReport r = check_pointwise_bound(op, q, u0, kPointwiseSlack);
    pointwise_ok = pointwise_ok && r.pass;
    const double hx = dom.spacing(0);
    for (int i = 0; i < dom.cells[0]; ++i) {
      const double x = (i + 0.5) * hx;
      if (x > 1.0 / 3.0 && x < 2.0 / 3.0) continue;
      const size_t idx = static_cast<size_t>(i);
      const double quotient = (q.at_t_h.values[idx] - q.at_t.values[idx]) / h;
      const double target = q.at_t.values[idx] / t;
      worst_sat = std::max(worst_sat, std::fabs(quotient - target) * t);
    }
  }

  const double el = seconds_since(t0);
  const bool pass = pointwise_ok && worst_sat <= kSaturationTol;
  report(4, "cellwise growth bound saturates on outer plateaus",
         pass,
         fmt("pointwise rows %s, outer |quotient - u/t|*t %.2e <= %.0e, %.1f s",
             pointwise_ok ? "pass" : "FAIL", worst_sat, kSaturationTol, el));
}

// --------------------------------------------------------------------------
// 5. Conserved integral and the signed difference-quotient balance.
void criterion_5() {
  const auto t0 = clock_type::now();
  constexpr double kMassTol = 1e-8;
  constexpr int kN = 4096;

  const Domain dom = Domain::interval(1.0, 300, BoundaryKind::neumann);
  const TvBackend1d op(dom);
  const GridFunction u0 = middle_third(dom, 1.0);
  ResolventTolerance tol;

  const Trajectory tr =
      evolve(op, u0, TimeGrid::linear(0.2, 20), RefinePolicy::fixed_n(256), tol);
  double worst_drift = 0.0;
  for (const GridFunction& s : tr.states)
    worst_drift = std::max(worst_drift, std::fabs(s.weighted_sum() - 1.0 / 3.0));

  bool rows_ok = true;
  double worst_balance = 0.0;
  for (double t : {0.02, 0.05, 0.08}) {
    const QuotientPair q = difference_quotient(op, u0, t, t / 100.0, kN, tol);
    const auto rows = check_mass_estimates(op, q, u0, kMassTol);
    for (const InequalityReport& r : rows) {
      rows_ok = rows_ok && r.pass;
      if (r.name == "mass_quotient_balance") worst_balance = std::max(worst_balance, r.lhs);
    }
  }

  const double el = seconds_since(t0);
  const bool pass = worst_drift <= kMassTol && rows_ok && worst_balance <= kMassTol;
  report(5, "conserved integral and signed quotient balance",
         pass,
         fmt("trajectory drift %.2e <= %.0e, quotient rows %s, signed balance %.2e <= %.0e, "
             "%.1f s",
             worst_drift, kMassTol, rows_ok ? "pass" : "FAIL", worst_balance, kMassTol, el));
}

// --------------------------------------------------------------------------
// 6. Oracle equivalence: engine vs exact plateau dynamics (states and
// extinction time), and both production resolvents vs the dense active-set
// prox oracle.
void criterion_6() {
  const auto t0 = clock_type::now();
  constexpr double kTrajTol = 1e-2;        // times |u0|_1
  constexpr double kExtinctionRel = 0.02;  // 2 percent of 1/9
  constexpr double kTvDenseTol = 1e-10;
  constexpr double kRelGap = 1e-8;
  constexpr double kFracDenseTol = 10.0 * kRelGap;

  const Domain dom = Domain::interval(1.0, 300, BoundaryKind::neumann);
  const TvBackend1d op(dom);
  const GridFunction u0 = middle_third(dom, 1.0);
  const PlateauState p0 = middle_third_plateaus();
  ResolventTolerance tol;

  const Trajectory tr =
      evolve(op, u0, TimeGrid::linear(0.2, 32), RefinePolicy::fixed_n(128), tol);
  double worst_traj = 0.0;
  for (size_t k = 0; k < tr.states.size(); ++k) {
    const GridFunction ref = plateau_sample(plateau_ode_oracle(p0, tr.grid.times[k]), dom);
    worst_traj = std::max(worst_traj, gf_dist(tr.states[k], ref, 1.0));
  }

  // Extinction: first scan time at which the engine state is flat.
  double t_ext = -1.0;
  {
    GridFunction u = tr.states[16];  // state at t = 0.1
    double t_cur = 0.1;
    while (t_cur < 0.126) {
      if (u.max_value() - u.min_value() <= 1e-6) { t_ext = t_cur; break; }
      u = resolvent_iterate(op, u, 0.0005, 20, tol);
      t_cur += 0.0005;
    }
  }
  const double t_star = 1.0 / 9.0;
  const bool ext_ok = t_ext > 0.0 && std::fabs(t_ext - t_star) <= kExtinctionRel * t_star;

  // Dense oracle vs the interval prox, both boundary conditions.
  double tv_dense_worst = 0.0;
  for (BoundaryKind bk : {BoundaryKind::neumann, BoundaryKind::dirichlet_zero}) {
    const Domain d30 = Domain::interval(1.0, 30, bk);
    DenseProxProblem pb;
    pb.mass.assign(30, d30.cell_measure());
    for (int i = 0; i + 1 < 30; ++i) pb.pairs.push_back({i, i + 1, 1.0});
    if (bk == BoundaryKind::dirichlet_zero) {
      pb.pairs.push_back({0, -1, 1.0});
      pb.pairs.push_back({29, -1, 1.0});
    }
    for (uint64_t seed : {601, 602, 603}) {
      const GridFunction v = random_state(d30, seed, -1.0, 1.0);
      pb.v = v.values;
      for (double mu : {1e-3, 1e-2, 1e-1}) {
        const std::vector<double> ref = dense_resolvent_oracle(pb, mu);
        const GridFunction got = tv_resolvent_1d(d30, v, mu);
        for (size_t i = 0; i < ref.size(); ++i)
          tv_dense_worst = std::max(tv_dense_worst, std::fabs(ref[i] - got.values[i]));
      }
    }
  }

  FractionalSpec spec;
  spec.s = 0.5;
  spec.cells = 8;
  const Domain fdom = Domain::interval(spec.length, spec.cells, BoundaryKind::neumann);
  const auto pairs = fractional_pairs(spec);
  const double knorm = incidence_norm(pairs, spec.cells);
  ResolventTolerance ftol;
  ftol.mode = ResolventTolerance::Mode::duality_gap;
  ftol.rel_gap = kRelGap;
  DenseProxProblem fpb;
  fpb.mass.assign(8, fdom.cell_measure());
  fpb.pairs = pairs;
  double frac_dense_worst = 0.0;
  for (uint64_t seed : {611, 612, 613}) {
    const GridFunction v = random_state(fdom, seed, -1.0, 1.0);
    fpb.v = v.values;
    for (double mu : {1e-3, 1e-2, 1e-1}) {
      const std::vector<double> ref = dense_resolvent_oracle(fpb, mu);
      const GridFunction got = frac_resolvent(fdom, pairs, v, mu, knorm, ftol);
      for (size_t i = 0; i < ref.size(); ++i)
        frac_dense_worst = std::max(frac_dense_worst, std::fabs(ref[i] - got.values[i]));
    }
  }

  const double el = seconds_since(t0);
  const double base = u0.norm(1.0);
  const bool pass = worst_traj <= kTrajTol * base && ext_ok &&
                    tv_dense_worst <= kTvDenseTol && frac_dense_worst <= kFracDenseTol;
  report(6, "engine and resolvents match the independent oracles",
         pass,
         fmt("trajectory L1 %.2e <= %.2e, extinction %.6f vs %.6f, dense-vs-interval %.2e "
             "<= %.0e, dense-vs-nonlocal %.2e <= %.0e, %.1f s",
             worst_traj, kTrajTol * base, t_ext, t_star, tv_dense_worst, kTvDenseTol,
             frac_dense_worst, kFracDenseTol, el));
}

// --------------------------------------------------------------------------
// 7. Forced-decay saturation: from zero data under constant-in-space forcing
// the decay bound is an equality.
void criterion_7() {
  const auto t0 = clock_type::now();
  constexpr double kRatioTol = 1e-6;
  constexpr double kForcing = 0.75;

  const Domain dom = Domain::interval(1.0, 64, BoundaryKind::neumann);
  const TvBackend1d op(dom);
  const GridFunction u0 = GridFunction::zeros(dom);
  const GridFunction c = GridFunction::constant(dom, kForcing);
  const GridFunction z = GridFunction::zeros(dom);
  const ForcingTerm f = ForcingTerm::sampled_profile({0.0, 1.0}, {c, c}, {z, z});
  ResolventTolerance tol;

  const QuotientPair q = forced_difference_quotient(op, u0, f, 0.1, 1e-3, 128, tol);
  double ratio_lo = 1e300, ratio_hi = 0.0;
  for (double p : {1.0, 2.0, inf()}) {
    const InequalityReport r = check_forced_decay(op, f, q, u0, p, 0.0);
    const double ratio = r.lhs / r.rhs;
    ratio_lo = std::min(ratio_lo, ratio);
    ratio_hi = std::max(ratio_hi, ratio);
  }

  const double el = seconds_since(t0);
  const bool pass = ratio_lo >= 1.0 - kRatioTol && ratio_hi <= 1.0 + kRatioTol;
  report(7, "forced decay bound saturates under constant forcing",
         pass,
         fmt("lhs/rhs in [%.9f, %.9f] within 1 +- %.0e, %.1f s", ratio_lo, ratio_hi,
             kRatioTol, el));
}

// --------------------------------------------------------------------------
// 8. Perturbed decay under a linear cell-wise map, with the growth constant
// pinned at 2 when the shift vanishes.
void criterion_8() {
  const auto t0 = clock_type::now();
  constexpr double kOmegaF = 0.5;
  constexpr double kSlack = 1e-9;
  constexpr int kN = 64;

  const Domain dom = Domain::interval(1.0, 80, BoundaryKind::neumann);
  const TvBackend1d op(dom);
  const CaratheodoryMap F = CaratheodoryMap::linear(kOmegaF);
  ResolventTolerance tol;

  int violations = 0, checked = 0;
  for (int k = 0; k < 10; ++k) {
    const GridFunction u0 = random_state(dom, 801 + static_cast<uint64_t>(k), 0.0, 1.0);
    for (double t : {0.05, 0.1, 0.2, 0.4}) {
      const QuotientPair q =
          perturbed_difference_quotient(op, F, u0, t, t / 100.0, kN, tol);
      for (double p : {1.0, 2.0, inf()}) {
        const InequalityReport r =
            check_perturbed_decay(op, F, q, u0, p, GronwallVariant::looser, kSlack);
        ++checked;
        if (!r.pass) ++violations;
      }
    }
  }

  bool constant_exact = true;
  for (int j = 1; j <= 25; ++j) {
    const double t = 0.04 * j;
    if (gronwall_constant(0.0, 1.0, t, GronwallVariant::looser) != 2.0)
      constant_exact = false;
  }

  const double el = seconds_since(t0);
  const bool pass = violations == 0 && constant_exact;
  report(8, "perturbed decay with pinned growth constant",
         pass,
         fmt("%d rows, %d violations, unshifted constant %s 2 exactly, %.1f s", checked,
             violations, constant_exact ? "==" : "!=", el));
}

// --------------------------------------------------------------------------
// 9. Complete contraction across the level grid plus order preservation.
// Slack for the certified backends is five times the reference gap 1e-8;
// the 1d lane uses the exact solver and gets a rounding-level slack.  A
// certified solve targets sup error 0.25 * rel_gap * scale (here scale <= 2,
// so two 4-step chains accumulate at most 4e-8) but may also stop at the gap
// estimator's rounding floor, where the iterate sits at its own fixed point
// and the measured contraction margins stay orders below the slack.
void criterion_9() {
  const auto t0 = clock_type::now();
  constexpr int kLevels = 32;
  constexpr int kN = 4;
  constexpr double kSlack1d = 1e-10;
  constexpr double kSlackCertified = 5e-8;  // 5 x the reference gap 1e-8

  int violations = 0, rows = 0, order_rows = 0;

  const auto sweep = [&](const OperatorBackend& op, uint64_t seed_base,
                         const ResolventTolerance& base_tol, double slack) {
    for (int k = 0; k < 100; ++k) {
      const uint64_t s = seed_base + 2 * static_cast<uint64_t>(k);
      const GridFunction a = random_state(op.domain(), s, -1.0, 1.0);
      GridFunction b = random_state(op.domain(), s + 1, -1.0, 1.0);
      if (k % 2 == 0) b = gf_add(a, random_state(op.domain(), s + 1, 0.0, 1.0));
      ResolventTolerance tol = base_tol;
      tol.scale_hint = std::max(a.norm(inf()), b.norm(inf()));
      for (double t : {0.02, 0.05}) {
        const auto reports = check_complete_contraction(op, a, b, t, kN, kLevels, tol, slack);
        for (const InequalityReport& r : reports) {
          ++rows;
          if (r.name == "order_preservation") ++order_rows;
          if (!r.pass) ++violations;
        }
      }
    }
  };

  const Domain dom1 = Domain::interval(1.0, 100, BoundaryKind::neumann);
  const TvBackend1d tv1(dom1);
  sweep(tv1, 901, ResolventTolerance{}, kSlack1d);

  const Domain dom2 = Domain::rectangle(1.0, 1.0, 16, 16, BoundaryKind::neumann);
  const TvBackend2d tv2(dom2, TVSpec{});
  ResolventTolerance ctol;
  ctol.mode = ResolventTolerance::Mode::duality_gap;
  ctol.rel_gap = 1e-8;
  ctol.max_iters = 2000000;
  sweep(tv2, 931, ctol, kSlackCertified);

  FractionalSpec spec;
  spec.s = 0.5;
  spec.cells = 16;
  const FractionalBackend frac(spec);
  sweep(frac, 961, ctol, kSlackCertified);

  const double el = seconds_since(t0);
  const bool pass = violations == 0 && order_rows >= 150;
  report(9, "complete contraction and order preservation",
         pass,
         fmt("%d rows (%d order rows), %d violations, %.1f s", rows, order_rows, violations,
             el));
}

// --------------------------------------------------------------------------
// 10. Smoothing-rate report (informational slope) plus the gating fitter
// self-test on synthetic power-law data.
void criterion_10() {
  const auto t0 = clock_type::now();
  constexpr double kFitTol = 1e-6;

  std::vector<double> ts, ys;
  for (int j = 0; j < 10; ++j) {
    const double t = 0.01 * std::pow(100.0, j / 9.0);  // log grid 0.01 .. 1
    ts.push_back(t);
    ys.push_back(3.7 * std::pow(t, -2.0));
  }
  const double fitted = fit_log_slope(ts, ys);
  const bool fitter_ok = std::fabs(fitted + 2.0) <= kFitTol;

  FractionalSpec spec;
  spec.s = 0.5;
  spec.cells = 64;
  const FractionalBackend op(spec);
  const GridFunction u0 = random_state(op.domain(), 1001, 0.0, 1.0);
  ResolventTolerance tol;
  tol.mode = ResolventTolerance::Mode::duality_gap;
  tol.rel_gap = 1e-8;
  tol.scale_hint = u0.norm(inf());
  const TimeGrid grid = TimeGrid::log_spaced(0.005, 0.16, 12);
  const Trajectory tr = evolve(op, u0, grid, RefinePolicy::fixed_n(64), tol);

  std::vector<double> qt, qy;
  for (size_t k = 0; k + 1 < tr.states.size(); ++k) {
    const double ta = tr.grid.times[k], tb = tr.grid.times[k + 1];
    if (ta <= 0.0) continue;
    const double rate = gf_dist(tr.states[k + 1], tr.states[k], inf()) / (tb - ta);
    const double tm = std::sqrt(ta * tb);
    const double y = tm * rate;
    if (y > 1e-13) {
      qt.push_back(tm);
      qy.push_back(y);
    }
  }
  bool produced = qt.size() >= 3;
  double slope = 0.0;
  if (produced) {
    slope = fit_log_slope(qt, qy);
    produced = std::isfinite(slope);
  }

  const double el = seconds_since(t0);
  const bool pass = fitter_ok && produced;
  report(10, "smoothing-rate report and fitter self-test",
         pass,
         fmt("fitter slope %.8f vs -2 within %.0e; t*|du/dt|_inf slope %.3f over %zu points "
             "(informational), %.1f s",
             fitted, kFitTol, slope, qt.size(), el));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  std::printf("%d of 10 criteria failed\n", g_failures);
  return g_failures;
}
