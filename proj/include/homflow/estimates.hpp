#pragma once
// Inequality checks for homogeneous accretive flows.
//
// Every check produces InequalityReport rows stating lhs <= rhs + slack, with
// the parameters that produced them recorded in `context`.  Slack budgets
// account for solver certificates and rounding; the inequalities themselves
// are never weakened.

#include <string>
#include <utility>
#include <vector>

#include "homflow/backend.hpp"
#include "homflow/engine.hpp"
#include "homflow/grid.hpp"
#include "homflow/nemytskii.hpp"

namespace homflow {

struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs + slack_budget - lhs
  bool pass = false;    // lhs <= rhs + slack_budget
  double slack_budget = 0.0;
  std::vector<std::pair<std::string, std::string>> context;

  static InequalityReport make(std::string name, double lhs, double rhs, double slack,
                               std::vector<std::pair<std::string, std::string>> ctx);
};

double mass(const GridFunction& u);
// Integral of (u - level)^+ over the domain.
double plus_mass(const GridFunction& u, double level);

// Least-squares slope of log y against log t; entries must be positive.
double fit_log_slope(const std::vector<double>& ts, const std::vector<double>& ys,
                     double* intercept = nullptr);

// | (1/lambda) J_{lambda mu}(lambda v) - J_mu(v) |_inf <= slack
InequalityReport check_resolvent_homogeneity(const OperatorBackend& op, const GridFunction& v,
                                             double mu, double lambda,
                                             const ResolventTolerance& tol, double slack);

// | (1/lambda) S^n_{lambda t}(lambda u0) - S^n_t(u0) |_inf <= slack, shared n
InequalityReport check_semigroup_homogeneity(const OperatorBackend& op, const GridFunction& u0,
                                             double t, double lambda, int n,
                                             const ResolventTolerance& tol, double slack);

// |u(t+h) - u(t)|_p / h <= 2 L e^{omega t} |u0|_p / t + slack
InequalityReport check_global_decay(const OperatorBackend& op, const QuotientPair& q,
                                    const GridFunction& u0, double p, double slack);

// u(t+h) - u(t) <= (h/t) u(t) cellwise, for u0 >= 0 and order-preserving flow
InequalityReport check_pointwise_bound(const OperatorBackend& op, const QuotientPair& q,
                                       const GridFunction& u0, double slack);

// Conservation of the integral plus signed-part quotient bounds and their
// balance; requires u0 >= 0 and a mass-conserving backend.
std::vector<InequalityReport> check_mass_estimates(const OperatorBackend& op,
                                                   const QuotientPair& q, const GridFunction& u0,
                                                   double slack);

// Level-set contraction on a level grid, L^q contraction for q in {1, 2, inf},
// and order preservation when a <= b cellwise.
std::vector<InequalityReport> check_complete_contraction(const OperatorBackend& op,
                                                         const GridFunction& a,
                                                         const GridFunction& b, double t, int n,
                                                         int levels, const ResolventTolerance& tol,
                                                         double slack);

// |w(t+h) - w(t)|_p / h <= C(omega_F, L, t) |u0|_p / t + slack for the
// perturbed flow, with C from gronwall_constant.
InequalityReport check_perturbed_decay(const OperatorBackend& op, const CaratheodoryMap& F,
                                       const QuotientPair& q, const GridFunction& u0, double p,
                                       GronwallVariant variant, double slack);

// |u_f(t+h) - u_f(t)|_p / h <= (L e^{omega t} / t) [ 2 |u0|_p
//   + int_0^t e^{-omega s} s |f'(s)|_p ds + int_0^t e^{-omega s} |f(s)|_p ds ]
InequalityReport check_forced_decay(const OperatorBackend& op, const ForcingTerm& f,
                                    const QuotientPair& q, const GridFunction& u0, double p,
                                    double slack);

// Informational: fitted log-log slope of the trajectory's sup norms against
// the expected power-law slope.  Never gates (unbounded slack).
InequalityReport check_smoothing_slope(const Trajectory& tr, double expected_slope);

// Segment-wise decay validation of a stored trajectory; slack is relative to
// each segment's bound (covers the per-segment discretization defect).
std::vector<InequalityReport> validate_trajectory_decay(const OperatorBackend& op,
                                                        const Trajectory& tr, double rel_slack);

}  // namespace homflow
