#pragma once
// Operator backends expose one thing: the resolvent (I + mu*A)^{-1} as a
// proximal solve.  Flags describe structural properties the estimate checks
// rely on; omega/lipschitz feed the decay constants.

#include <cmath>
#include <memory>

#include "homflow/grid.hpp"

namespace homflow {

struct ResolventTolerance {
  enum class Mode { exact, duality_gap };
  // exact: direct solvers return machine-accurate minimizers; iterative
  // solvers additionally polish past the gap certificate until the primal
  // iterate stagnates.  duality_gap: stop at the certificate.
  Mode mode = Mode::exact;
  double rel_gap = 1e-8;  // certified sup-norm error <= rel_gap * certification scale
  int max_iters = 400000;
  // Certification scale is max(||v||_inf, scale_hint).  Callers that run long
  // decaying flows set scale_hint to the scale their error budget is relative
  // to; otherwise a state decaying toward zero would demand certificates far
  // below what the budget needs and below what warm-started duals can resolve.
  double scale_hint = 0.0;

  void validate() const {
    if (!(rel_gap > 0.0) || rel_gap > 1e-4)
      throw ConfigError("tolerance: rel_gap must lie in (0, 1e-4]");
    if (max_iters < 1) throw ConfigError("tolerance: max_iters must be >= 1");
    if (!(scale_hint >= 0.0) || !std::isfinite(scale_hint))
      throw ConfigError("tolerance: scale_hint must be finite and >= 0");
  }
};

// Per-call scratch for warm starts.  A scratch object is only reused within
// one engine call, so results stay deterministic functions of the call inputs.
struct ResolventScratch {
  virtual ~ResolventScratch() = default;
};

class OperatorBackend {
 public:
  virtual ~OperatorBackend() = default;

  // u = argmin (1/2)||u - v||^2 + mu * J(u) for the backend's functional J.
  virtual GridFunction resolvent(double mu, const GridFunction& v,
                                 const ResolventTolerance& tol,
                                 ResolventScratch* scratch = nullptr) const = 0;
  virtual std::unique_ptr<ResolventScratch> make_scratch() const { return nullptr; }
  virtual const Domain& domain() const = 0;
  virtual std::string name() const = 0;

  double omega = 0.0;        // quasi-accretivity shift of the operator itself
  double lipschitz_L = 1.0;  // time-rescaling constant, >= 1
  bool homogeneous_zero = true;      // A(lambda u) = A(u) for lambda > 0
  bool completely_accretive = true;  // level-set contraction available
  bool zero_in_range_at_zero = true;  // A(0) contains 0, so the flow fixes 0
  bool order_preserving = true;
  bool mass_conserving = false;  // no-flux boundary: integral is invariant
  bool exact_resolvent = false;  // direct solver, no iterative certificate
};

}  // namespace homflow
