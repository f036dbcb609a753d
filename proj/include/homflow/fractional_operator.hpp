#pragma once
// Nonlocal resolvent on a 1d grid with a pinned exterior collar.
//
// Energy: E(u) = sum_{i<j} w_ij |u_i - u_j| + sum_i W_i |u_i|, with
//   w_ij = m_i m_j / |x_i - x_j|^{1+s},
// where W_i collects the weights against collar cells continuing the grid
// outside the interval, all held at zero.  The resolvent
//   argmin_u (1/2) sum_i m_i (u_i - v_i)^2 + mu E(u)
// is computed by a primal-dual projection iteration on the unit-mass
// rescaling of the objective, with a duality-gap stopping certificate
// (docs/duality_gap.md).

#include <memory>
#include <vector>

#include "homflow/backend.hpp"
#include "homflow/grid.hpp"
#include "homflow/oracles.hpp"

namespace homflow {

struct FractionalSpec {
  double s = 0.5;        // differentiation order, in (0, 1)
  int cells = 16;        // interior cells
  int collar_cells = 0;  // pinned cells per side; 0 means 2 * cells
  double length = 1.0;

  int collar() const { return collar_cells > 0 ? collar_cells : 2 * cells; }
  void validate() const;
};

// Pair list for the energy above: one entry per unordered interior pair plus
// one pinned-partner entry (j == -1) per node carrying its total collar
// weight.  Node order matches the cell order of the interval domain.
std::vector<PairTerm> fractional_pairs(const FractionalSpec& spec);

// Operator norm of the signed incidence map u -> (u_i - u_j)_pairs, by power
// iteration with a deterministic seeded start.
double incidence_norm(const std::vector<PairTerm>& pairs, int n_nodes);

// sum_p w_p |u_i - u_j| over the pair list (pinned partners read as zero).
double pair_seminorm(const std::vector<PairTerm>& pairs, const std::vector<double>& u);

struct FracDualState final : ResolventScratch {
  std::vector<double> eta, u;
  bool warm = false;
};

// Primal-dual resolvent for a general pair energy on a grid with uniform
// cell measure.  knorm must bound the incidence-map norm from above.  The
// reported gap is in mass-weighted objective units; unit strong convexity of
// the data term gives ||u - u*||_{2,m} <= sqrt(2 gap).
GridFunction frac_resolvent(const Domain& dom, const std::vector<PairTerm>& pairs,
                            const GridFunction& v, double mu, double knorm,
                            const ResolventTolerance& tol, FracDualState* ws = nullptr,
                            double* gap_out = nullptr, int* iters_out = nullptr);

struct SmoothingExponents {
  double r;      // integrability threshold d / (d - s)
  double delta;  // time exponent of the sup-norm bound
  double gamma;  // norm exponent of the sup-norm bound
};

// Exponent triple for the instantaneous-smoothing bound
//   sup |T_t u0| <= C t^{-delta} |u0|_q^{gamma},  valid for q > (d - s) / s.
SmoothingExponents smoothing_exponents(double s, double q, double d = 1.0);

class FractionalBackend final : public OperatorBackend {
 public:
  explicit FractionalBackend(FractionalSpec spec);
  GridFunction resolvent(double mu, const GridFunction& v, const ResolventTolerance& tol,
                         ResolventScratch* scratch) const override;
  std::unique_ptr<ResolventScratch> make_scratch() const override;
  const Domain& domain() const override { return dom_; }
  std::string name() const override { return "fractional"; }

  const FractionalSpec& spec() const { return spec_; }
  const std::vector<PairTerm>& pairs() const { return pairs_; }
  double knorm() const { return knorm_; }
  double seminorm(const GridFunction& u) const;

 private:
  FractionalSpec spec_;
  Domain dom_;
  std::vector<PairTerm> pairs_;
  double knorm_;
};

}  // namespace homflow
