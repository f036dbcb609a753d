#pragma once
// Independent reference computations used to pin expected values in tests.
// These deliberately avoid the production solver paths: the plateau oracle
// integrates the exact piecewise-linear dynamics of staircase profiles, the
// dense resolvent oracle solves the dual box-constrained least-squares
// problem with an active-set method, and the quadrature oracle evaluates the
// decay constants by nested Gauss-Legendre panels.

#include <vector>

#include "homflow/grid.hpp"

namespace homflow {

// ---------------------------------------------------------------------------
// Staircase profiles on [0, L] with no-flux ends.  Plateau i occupies
// [breaks[i], breaks[i+1]) at height heights[i]; adjacent heights differ.
struct PlateauState {
  std::vector<double> breaks;   // size K+1, increasing, breaks.front() == 0
  std::vector<double> heights;  // size K

  void validate() const;
  double total_length() const { return breaks.back() - breaks.front(); }
  double mass() const;
};

// Exact total-variation flow of a staircase profile: each plateau moves at
// (s_left + s_right)/width, where a side contributes +1 if the neighbor sits
// above, -1 if below, and 0 at a no-flux end.  Between merge events heights
// are linear in time; at a merge the plateaus coalesce and speeds update.
PlateauState plateau_ode_oracle(const PlateauState& u0, double t);

// First time two adjacent plateaus meet (infinity if none ever do).
double plateau_first_merge(const PlateauState& u0);

// Time after which the profile is a single plateau (infinity if never).
double plateau_extinction_time(const PlateauState& u0);

// Cell-center sampling onto a 1d domain of the same length.
GridFunction plateau_sample(const PlateauState& s, const Domain& dom);

// Build a staircase from a 1d grid function (exactly equal neighbors merge).
PlateauState plateau_from_grid(const Domain& dom, const GridFunction& u);

// ---------------------------------------------------------------------------
// Dense small-scale resolvent oracle.  Solves
//   min_u  (1/2) sum_k mass_k (u_k - v_k)^2 + mu * sum_p w_p |u_i - u_j|
// where a pair with j == -1 couples u_i to a pinned zero value.  The dual is
// a box-constrained least-squares problem, solved exactly by an active-set
// loop (BVLS); the returned duality gap certifies the result.
struct PairTerm {
  int i = 0;
  int j = -1;  // -1: pinned zero neighbor
  double w = 0.0;
};

struct DenseProxProblem {
  std::vector<double> mass;  // node masses, size n <= 64
  std::vector<double> v;     // data, size n
  std::vector<PairTerm> pairs;

  void validate() const;
};

std::vector<double> dense_resolvent_oracle(const DenseProxProblem& pb, double mu,
                                           double* gap_out = nullptr);

// ---------------------------------------------------------------------------
// Reference quadrature for the decay constants.  "plain" uses the kernel
// exp(-omega r); "time weighted" uses r * exp(-omega r).  The factor forms
// evaluate the full multiplicative constant
//   exp(omega t) * L * [ 2 exp(c * I(0,t)) + omega * int_0^t exp(c * I(s,t)) ds ]
// with c = 2 L omega for the plain kernel and c = L omega for the weighted
// one, all inner integrals computed numerically (no closed forms), by
// composite Gauss-Legendre with panel doubling to relative 1e-13.
enum class QuadIntegrand {
  inner_plain,     // int_0^t exp(-omega s) ds
  inner_weighted,  // int_0^t s exp(-omega s) ds
  factor_plain,
  factor_weighted,
};

double quadrature_oracle(QuadIntegrand which, double omega, double L, double t);

}  // namespace homflow
