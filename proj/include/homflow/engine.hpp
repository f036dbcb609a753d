#pragma once
// Implicit time stepping for accretive evolutions du/dt + A u = f - F(u).
//
// Each macro segment [t_k, t_{k+1}] is advanced by n backward-Euler micro
// steps u <- J_mu(u + mu f), mu = segment / n.  The flow map at time t is
// realized as the n-fold resolvent iterate from time zero.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "homflow/backend.hpp"
#include "homflow/grid.hpp"
#include "homflow/nemytskii.hpp"

namespace homflow {

struct TimeGrid {
  std::vector<double> times;  // times[0] == 0, strictly increasing

  static TimeGrid linear(double t_end, int segments);
  // 0 followed by log-spaced points from t_first to t_end inclusive.
  static TimeGrid log_spaced(double t_first, double t_end, int points);
  void validate() const;
  int segments() const { return static_cast<int>(times.size()) - 1; }
};

struct ForcingTerm {
  enum class Kind { step, sampled };
  Kind kind = Kind::step;

  // step: value breaks_values[k] on [breaks[k], breaks[k+1]), last piece
  // extends to infinity; breaks[0] == 0, strictly increasing.
  std::vector<double> breaks;
  std::vector<GridFunction> piece_values;

  // sampled: linear interpolation between samples at strictly increasing
  // sample_times; derivative_samples carry d f / d t on the same grid.
  std::vector<double> sample_times;
  std::vector<GridFunction> samples;
  std::vector<GridFunction> derivative_samples;

  static ForcingTerm constant(const GridFunction& f);
  static ForcingTerm step_profile(std::vector<double> breaks, std::vector<GridFunction> values);
  static ForcingTerm sampled_profile(std::vector<double> times, std::vector<GridFunction> values,
                                     std::vector<GridFunction> derivatives);

  void validate(const std::string& domain_id) const;
  GridFunction eval(double t) const;
  GridFunction derivative(double t) const;  // sampled kind only
  bool refines(const TimeGrid& grid) const;  // every break inside appears in grid
};

struct RefinePolicy {
  enum class Kind { fixed, doubling };
  Kind kind = Kind::fixed;
  int n_fixed = 256;
  int n_start = 64;
  int n_max = 65536;
  double tol_rel = 1e-6;  // accept when |u_n - u_2n|_1 <= tol_rel * max(|u_2n|_1, floor)

  static RefinePolicy fixed_n(int n);
  static RefinePolicy doubling(int n_start = 64, int n_max = 65536, double tol_rel = 1e-6);
  void validate() const;
};

struct StepMeta {
  int n = 0;                    // accepted micro step count for the segment
  double refine_distance = 0.0; // last n-vs-2n distance (doubling only)
};

struct Trajectory {
  TimeGrid grid;
  std::vector<GridFunction> states;  // states[k] at grid.times[k]
  std::vector<StepMeta> meta;        // one per segment
};

// n-fold resolvent iterate from u0 over [0, t] with mu = t / n.  A scratch
// object from the backend is threaded through the steps of this one call.
GridFunction resolvent_iterate(const OperatorBackend& op, const GridFunction& u0, double t, int n,
                               const ResolventTolerance& tol);

// Forced iterate over [t0, t1]; the forcing is frozen at each micro-step
// midpoint.  Step forcings must not break inside (t0, t1).
GridFunction forced_iterate(const OperatorBackend& op, const GridFunction& u0,
                            const ForcingTerm& f, double t0, double t1, int n,
                            const ResolventTolerance& tol);

Trajectory evolve(const OperatorBackend& op, const GridFunction& u0, const TimeGrid& grid,
                  const RefinePolicy& policy, const ResolventTolerance& tol);

// As evolve, with forcing.  For step forcings every break in (0, t_end) must
// be a grid time, so micro steps never straddle a discontinuity.
Trajectory evolve_forced(const OperatorBackend& op, const GridFunction& u0, const ForcingTerm& f,
                         const TimeGrid& grid, const RefinePolicy& policy,
                         const ResolventTolerance& tol);

// As evolve for du/dt + A u + F(u) = 0.  Each micro step solves the
// fixed point w = J_mu(u - mu F(w)), which contracts since mu omega_F < 1/2
// is enforced against the policy's coarsest step.
Trajectory evolve_perturbed(const OperatorBackend& op, const CaratheodoryMap& F,
                            const GridFunction& u0, const TimeGrid& grid,
                            const RefinePolicy& policy, const ResolventTolerance& tol);

struct QuotientPair {
  GridFunction at_t;    // n-step iterate over [0, t]
  GridFunction at_t_h;  // n-step iterate over [0, t + h], same n
  double t = 0.0, h = 0.0;
  int n = 0;
};

// Both endpoints are reached from u0 with the same micro-step count, so the
// scaling identity of the discrete flow holds without a time-discretization
// remainder.
QuotientPair difference_quotient(const OperatorBackend& op, const GridFunction& u0, double t,
                                 double h, int n, const ResolventTolerance& tol);

// Forced variant; requires a sampled forcing (midpoint evaluation).
QuotientPair forced_difference_quotient(const OperatorBackend& op, const GridFunction& u0,
                                        const ForcingTerm& f, double t, double h, int n,
                                        const ResolventTolerance& tol);

// Perturbed variant: both endpoints advance with the fixed-point micro step.
QuotientPair perturbed_difference_quotient(const OperatorBackend& op, const CaratheodoryMap& F,
                                           const GridFunction& u0, double t, double h, int n,
                                           const ResolventTolerance& tol);

enum class GronwallVariant { exp_kernel, time_weighted_kernel, looser };

// Growth constant C(omega, L, t) multiplying |u0|_p / t in the perturbed
// decay bound; the two kernel variants come from the two admissible
// comparison weights, and `looser` takes their maximum.  Exactly 2L when
// omega == 0 or t == 0.
double gronwall_constant(double omega, double L, double t, GronwallVariant variant);

// Adaptive Simpson quadrature on [a, b] with relative tolerance tol.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol);

}  // namespace homflow
