#pragma once
// Discrete total-variation resolvents.
//
// 1d:  min_u (1/2) sum_k h (u_k - v_k)^2 + mu * [ sum |u_{k+1} - u_k|
//          (+ |u_1| + |u_n| for the zero-boundary variant) ]
// solved exactly by dynamic programming over piecewise-linear derivatives.
//
// 2d:  same quadratic data term with the anisotropic 5-point edge sum,
// solved by projection onto the dual box (fixed-point iteration with a
// duality-gap stopping certificate, see docs/duality_gap.md).

#include <memory>
#include <vector>

#include "homflow/backend.hpp"
#include "homflow/grid.hpp"

namespace homflow {

struct TVSpec {
  // Dual ascent step for the 2d fixed point; must stay below 1/4 (the norm
  // bound of the unit-spaced edge-divergence composition is 8).
  double dual_step = 0.248;

  void validate() const {
    if (!(dual_step > 0.0) || !(dual_step < 0.25))
      throw ConfigError("tv: dual_step must lie in (0, 1/4)");
  }
};

// Exact 1d resolvent (both boundary kinds). mu > 0 required.
GridFunction tv_resolvent_1d(const Domain& dom, const GridFunction& v, double mu);

struct TVDualState final : ResolventScratch {
  std::vector<double> px, py;  // edge duals, sized by the 2d edge layout
  bool warm = false;
};

// 2d resolvent by dual projection. Returns u = v + div(p); the achieved gap
// and iteration count are reported through the optional out-parameters.
GridFunction tv_resolvent_2d(const Domain& dom, const GridFunction& v, double mu,
                             const TVSpec& spec, const ResolventTolerance& tol,
                             TVDualState* ws = nullptr, double* gap_out = nullptr,
                             int* iters_out = nullptr);

// Anisotropic discrete total variation (plus boundary terms when the domain
// pins the exterior to zero).
double tv_seminorm(const Domain& dom, const GridFunction& u);

// Backend adapters.
class TvBackend1d final : public OperatorBackend {
 public:
  explicit TvBackend1d(const Domain& dom);
  GridFunction resolvent(double mu, const GridFunction& v, const ResolventTolerance& tol,
                         ResolventScratch* scratch) const override;
  const Domain& domain() const override { return dom_; }
  std::string name() const override { return "tv_1d"; }

 private:
  Domain dom_;
};

class TvBackend2d final : public OperatorBackend {
 public:
  TvBackend2d(const Domain& dom, TVSpec spec);
  GridFunction resolvent(double mu, const GridFunction& v, const ResolventTolerance& tol,
                         ResolventScratch* scratch) const override;
  std::unique_ptr<ResolventScratch> make_scratch() const override;
  const Domain& domain() const override { return dom_; }
  std::string name() const override { return "tv_2d"; }

 private:
  Domain dom_;
  TVSpec spec_;
};

}  // namespace homflow
