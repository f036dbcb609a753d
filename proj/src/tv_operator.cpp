#include "homflow/tv_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace homflow {

// ---------------------------------------------------------------------------
// 1d: dynamic programming over piecewise-linear derivatives.
//
// f_1(th) = (1/2)(th - y_1)^2 + lamb*|th|,
// f_{k+1}(th) = (1/2)(th - y_{k+1})^2 + min_x [ f_k(x) + lam*|th - x| ].
// The inner min clips f_k' to [-lam, lam].  Derivatives are stored as knot
// deltas relative to the outer tails, so absorbing a new quadratic only
// touches the tails.  Clip locations tm/tp drive the final backtrace.

namespace {

struct Clip {
  double pos;     // clip point
  double a, b;    // derivative piece active at the clip, f' = a*th + b
  int next_knot;  // first surviving knot index
};

std::vector<double> fused_prox_uniform(const std::vector<double>& y, double lam, double lamb) {
  const int n = static_cast<int>(y.size());
  std::vector<double> u(static_cast<size_t>(n));
  auto shrink = [](double v, double s) {
    const double m = std::fabs(v) - s;
    return m > 0.0 ? (v > 0.0 ? m : -m) : 0.0;
  };
  if (n == 0) return u;
  if (n == 1) {
    u[0] = shrink(y[0], 2.0 * lamb);
    return u;
  }

  const int cap = 2 * n + 8;
  std::vector<double> x(static_cast<size_t>(cap)), a(static_cast<size_t>(cap)),
      b(static_cast<size_t>(cap));
  std::vector<double> tm(static_cast<size_t>(n - 1)), tp(static_cast<size_t>(n - 1));
  int lo = n + 4, hi = n + 3;  // empty knot list
  double afirst = 1.0, bfirst = -y[0] - lamb;
  double alast = 1.0, blast = -y[0] + lamb;
  if (lamb > 0.0) {
    lo = hi = n + 3;
    x[static_cast<size_t>(lo)] = 0.0;
    a[static_cast<size_t>(lo)] = 0.0;
    b[static_cast<size_t>(lo)] = 2.0 * lamb;  // subgradient jump at zero
  }

  // Scan for the point where the derivative reaches `level`; clamping to the
  // left knot keeps jump knots (zero-slope deltas) exact.
  auto scan_left = [&](double level) {
    Clip c;
    double al = afirst, bl = bfirst;
    int l = lo;
    while (l <= hi && al * x[static_cast<size_t>(l)] + bl <= level) {
      al += a[static_cast<size_t>(l)];
      bl += b[static_cast<size_t>(l)];
      ++l;
    }
    double t = (level - bl) / al;
    if (l > lo && t < x[static_cast<size_t>(l - 1)]) t = x[static_cast<size_t>(l - 1)];
    c.pos = t;
    c.a = al;
    c.b = bl;
    c.next_knot = l;
    return c;
  };
  auto scan_right = [&](double level, int stop) {
    Clip c;
    double ah = alast, bh = blast;
    int r = hi;
    while (r >= stop && ah * x[static_cast<size_t>(r)] + bh >= level) {
      ah -= a[static_cast<size_t>(r)];
      bh -= b[static_cast<size_t>(r)];
      --r;
    }
    double t = (level - bh) / ah;
    if (r < hi && t > x[static_cast<size_t>(r + 1)]) t = x[static_cast<size_t>(r + 1)];
    c.pos = t;
    c.a = ah;
    c.b = bh;
    c.next_knot = r;
    return c;
  };

  for (int k = 0; k + 1 < n; ++k) {
    const Clip cl = scan_left(-lam);
    const Clip cr = scan_right(lam, cl.next_knot);
    double tmk = cl.pos;
    double tpk = std::max(cr.pos, tmk);
    tm[static_cast<size_t>(k)] = tmk;
    tp[static_cast<size_t>(k)] = tpk;

    lo = cl.next_knot - 1;
    hi = cr.next_knot + 1;
    x[static_cast<size_t>(lo)] = tmk;
    a[static_cast<size_t>(lo)] = cl.a;
    b[static_cast<size_t>(lo)] = cl.b + lam;
    x[static_cast<size_t>(hi)] = tpk;
    a[static_cast<size_t>(hi)] = -cr.a;
    b[static_cast<size_t>(hi)] = lam - cr.b;

    afirst = 1.0;
    bfirst = -y[static_cast<size_t>(k + 1)] - lam;
    alast = 1.0;
    blast = -y[static_cast<size_t>(k + 1)] + lam;
  }

  // Terminal minimization; the zero-boundary variant adds lamb*|th|.
  double th;
  if (lamb > 0.0) {
    const Clip c1 = scan_left(lamb);   // root of f' = lamb (valid if negative)
    if (c1.pos < 0.0) {
      th = c1.pos;
    } else {
      const Clip c2 = scan_left(-lamb);  // root of f' = -lamb (valid if positive)
      th = c2.pos > 0.0 ? c2.pos : 0.0;
    }
  } else {
    th = scan_left(0.0).pos;
  }

  u[static_cast<size_t>(n - 1)] = th;
  for (int k = n - 2; k >= 0; --k)
    u[static_cast<size_t>(k)] = std::clamp(u[static_cast<size_t>(k + 1)],
                                           tm[static_cast<size_t>(k)], tp[static_cast<size_t>(k)]);
  return u;
}

}  // namespace

GridFunction tv_resolvent_1d(const Domain& dom, const GridFunction& v, double mu) {
  if (!dom.is_1d()) throw ConfigError("tv 1d: domain must be an interval");
  if (dom.id() != v.domain_id) throw ConfigError("tv 1d: domain mismatch");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("tv 1d: mu must be positive");
  const double h = dom.spacing(0);
  const double lam = mu / h;
  const double lamb = dom.boundary == BoundaryKind::dirichlet_zero ? lam : 0.0;
  GridFunction out = v;
  out.values = fused_prox_uniform(v.values, lam, lamb);
  return out;
}

// ---------------------------------------------------------------------------
// 2d: projection onto the dual box.
//
// After dividing the objective by the (uniform) cell measure, the problem is
//   min_u (1/2)|u - v|^2 + sum_e lam_e |(Du)_e|,   lam_x = mu/hx, lam_y = mu/hy,
// with plain unit-spaced differences D.  With p_e in [-lam_e, lam_e] the dual
// reads max <p, Dv> - (1/2)|div p|^2, u = v + div p, and projected ascent
//   p <- clamp(p + step * (Du)_e)
// converges for step < 1/4.  The nonnegative per-edge gap
//   cell_measure * sum_e (lam_e |(Du)_e| - p_e (Du)_e)
// bounds the primal suboptimality; sqrt(2*gap/cell_measure) bounds the
// sup-norm distance to the minimizer (unit strong convexity after scaling).

namespace {

struct EdgeLayout {
  int nx, ny;
  bool zero_boundary;
  int npx, npy;  // px: (nx+1) x ny faces, py: nx x (ny+1) faces

  explicit EdgeLayout(const Domain& d)
      : nx(d.cells[0]),
        ny(d.cells[1]),
        zero_boundary(d.boundary == BoundaryKind::dirichlet_zero),
        npx((d.cells[0] + 1) * d.cells[1]),
        npy(d.cells[0] * (d.cells[1] + 1)) {}
  int cell(int ix, int iy) const { return ix + nx * iy; }
  int xface(int f, int iy) const { return f + (nx + 1) * iy; }  // f in [0, nx]
  int yface(int ix, int f) const { return ix + nx * f; }        // f in [0, ny]
};

}  // namespace

GridFunction tv_resolvent_2d(const Domain& dom, const GridFunction& v, double mu,
                             const TVSpec& spec, const ResolventTolerance& tol,
                             TVDualState* ws, double* gap_out, int* iters_out) {
  if (dom.kind != DomainKind::grid_2d) throw ConfigError("tv 2d: domain must be a grid");
  if (dom.id() != v.domain_id) throw ConfigError("tv 2d: domain mismatch");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("tv 2d: mu must be positive");
  spec.validate();
  tol.validate();

  const EdgeLayout e(dom);
  const double lamx = mu / dom.spacing(0), lamy = mu / dom.spacing(1);
  const double m0 = dom.cell_measure();
  const double step = spec.dual_step;

  std::vector<double> px, py;
  if (ws && ws->warm && static_cast<int>(ws->px.size()) == e.npx &&
      static_cast<int>(ws->py.size()) == e.npy) {
    px = ws->px;
    py = ws->py;
    // Bounds depend on mu; re-clamp so a warm start stays dual feasible.
    for (double& p : px) p = std::clamp(p, -lamx, lamx);
    for (double& p : py) p = std::clamp(p, -lamy, lamy);
    // Any near-optimal dual satisfies ||div p||_inf = ||u* - v||_inf
    // <= 2 ||v||_inf.  A warm dual far outside that scale comes from a much
    // larger earlier state and would crawl across the dual box, so drop it.
    double rmax = 0.0;
    for (int iy = 0; iy < e.ny; ++iy)
      for (int ix = 0; ix < e.nx; ++ix) {
        const double div =
            (px[static_cast<size_t>(e.xface(ix + 1, iy))] - px[static_cast<size_t>(e.xface(ix, iy))]) +
            (py[static_cast<size_t>(e.yface(ix, iy + 1))] - py[static_cast<size_t>(e.yface(ix, iy))]);
        rmax = std::max(rmax, std::fabs(div));
      }
    if (rmax > 8.0 * v.norm(inf())) {
      std::fill(px.begin(), px.end(), 0.0);
      std::fill(py.begin(), py.end(), 0.0);
    }
  } else {
    px.assign(static_cast<size_t>(e.npx), 0.0);
    py.assign(static_cast<size_t>(e.npy), 0.0);
  }
  if (!e.zero_boundary) {
    // No-flux boundary: boundary faces carry no dual variable.
    for (int iy = 0; iy < e.ny; ++iy) {
      px[static_cast<size_t>(e.xface(0, iy))] = 0.0;
      px[static_cast<size_t>(e.xface(e.nx, iy))] = 0.0;
    }
    for (int ix = 0; ix < e.nx; ++ix) {
      py[static_cast<size_t>(e.yface(ix, 0))] = 0.0;
      py[static_cast<size_t>(e.yface(ix, e.ny))] = 0.0;
    }
  }

  std::vector<double> u(v.values.size());
  auto recompute_u = [&]() {
    for (int iy = 0; iy < e.ny; ++iy)
      for (int ix = 0; ix < e.nx; ++ix)
        u[static_cast<size_t>(e.cell(ix, iy))] =
            v.values[static_cast<size_t>(e.cell(ix, iy))] +
            (px[static_cast<size_t>(e.xface(ix + 1, iy))] - px[static_cast<size_t>(e.xface(ix, iy))]) +
            (py[static_cast<size_t>(e.yface(ix, iy + 1))] - py[static_cast<size_t>(e.yface(ix, iy))]);
  };
  auto edge_du = [&](bool xdir, int f, int other) {
    // Difference across a face, with pinned zero ghosts on the outside.
    if (xdir) {
      const double ul = f > 0 ? u[static_cast<size_t>(e.cell(f - 1, other))] : 0.0;
      const double ur = f < e.nx ? u[static_cast<size_t>(e.cell(f, other))] : 0.0;
      return ur - ul;
    }
    const double ul = f > 0 ? u[static_cast<size_t>(e.cell(other, f - 1))] : 0.0;
    const double ur = f < e.ny ? u[static_cast<size_t>(e.cell(other, f))] : 0.0;
    return ur - ul;
  };

  const double scale_v = std::max(std::max(v.norm(inf()), tol.scale_hint), 1e-30);
  const double target_err = 0.25 * tol.rel_gap * scale_v;
  const double target_gap = 0.5 * m0 * target_err * target_err;
  const int check_every = 16;
  const int fx_hi = e.zero_boundary ? e.nx : e.nx - 1;
  const int fy_hi = e.zero_boundary ? e.ny : e.ny - 1;
  const int f_lo = e.zero_boundary ? 0 : 1;

  // The gap is a sum of |du|-vs-p·du cancellations; it cannot be resolved
  // below the summation rounding level, which grows with the number of
  // accumulated edge terms, so certification saturates at that floor.
  const double floor_terms =
      std::max(64.0, 4.0 * static_cast<double>(e.nx) * static_cast<double>(e.ny));
  // u is recomputed from v + div p at every face, so on a flat-limit iterate
  // each du is pure cancellation residue of size eps * (|v| + |div p|), and
  // the face terms weight it by lam (|p| <= lam).  Without this contribution
  // the floor collapses on flat states and an exactly optimal dual, whose
  // computed gap is frozen at that residue level, can never certify.
  const double repr = v.norm(inf()) + 2.0 * (lamx + lamy);
  const double nx_faces = static_cast<double>((fx_hi - f_lo + 1) * e.ny);
  const double ny_faces = static_cast<double>((fy_hi - f_lo + 1) * e.nx);
  const double cancel_mag = 8.0 * repr * (lamx * nx_faces + lamy * ny_faces);
  double gap_floor = 0.0;
  auto compute_gap = [&]() {
    double g = 0.0, mag = 1e-300;
    for (int iy = 0; iy < e.ny; ++iy)
      for (int f = f_lo; f <= fx_hi; ++f) {
        const double du = edge_du(true, f, iy);
        const double pdu = px[static_cast<size_t>(e.xface(f, iy))] * du;
        g += lamx * std::fabs(du) - pdu;
        mag += lamx * std::fabs(du) + std::fabs(pdu);
      }
    for (int ix = 0; ix < e.nx; ++ix)
      for (int f = f_lo; f <= fy_hi; ++f) {
        const double du = edge_du(false, f, ix);
        const double pdu = py[static_cast<size_t>(e.yface(ix, f))] * du;
        g += lamy * std::fabs(du) - pdu;
        mag += lamy * std::fabs(du) + std::fabs(pdu);
      }
    gap_floor =
        (floor_terms * mag + cancel_mag) * std::numeric_limits<double>::epsilon() * m0;
    return std::max(g * m0, 0.0);
  };

  double gap = std::numeric_limits<double>::infinity();
  bool certified = false;
  std::vector<double> u_snap;
  int it = 0;
  recompute_u();
  for (; it < tol.max_iters; ++it) {
    if (it % check_every == 0) {
      gap = compute_gap();
      if (gap <= std::max(target_gap, gap_floor)) {
        certified = true;
        if (tol.mode == ResolventTolerance::Mode::duality_gap) break;
        // exact mode: polish until the primal iterate stagnates
        if (!u_snap.empty()) {
          double d = 0.0, s = 1e-30;
          for (size_t i = 0; i < u.size(); ++i) {
            d = std::max(d, std::fabs(u[i] - u_snap[i]));
            s = std::max(s, std::fabs(u[i]));
          }
          if (d <= 1e-15 * s) break;
        }
        u_snap = u;
      }
    }
    // Jacobi-style dual ascent sweep (all faces read the same u snapshot).
    for (int iy = 0; iy < e.ny; ++iy)
      for (int f = f_lo; f <= fx_hi; ++f) {
        auto& p = px[static_cast<size_t>(e.xface(f, iy))];
        p = std::clamp(p + step * edge_du(true, f, iy), -lamx, lamx);
      }
    for (int ix = 0; ix < e.nx; ++ix)
      for (int f = f_lo; f <= fy_hi; ++f) {
        auto& p = py[static_cast<size_t>(e.yface(ix, f))];
        p = std::clamp(p + step * edge_du(false, f, ix), -lamy, lamy);
      }
    recompute_u();
  }
  if (it == tol.max_iters) {
    gap = compute_gap();  // the iterate moved since the last check
    certified = gap <= std::max(target_gap, gap_floor);
  }
  if (!certified)
    throw SolverError("tv 2d: duality gap certificate not reached within max_iters");

  if (ws) {
    ws->px = px;
    ws->py = py;
    ws->warm = true;
  }
  if (gap_out) *gap_out = gap;
  if (iters_out) *iters_out = it;
  GridFunction out = v;
  out.values = std::move(u);
  return out;
}

double tv_seminorm(const Domain& dom, const GridFunction& u) {
  if (dom.id() != u.domain_id) throw ConfigError("tv seminorm: domain mismatch");
  const bool zb = dom.boundary == BoundaryKind::dirichlet_zero;
  double s = 0.0;
  if (dom.is_1d()) {
    const int n = dom.cells[0];
    for (int i = 0; i + 1 < n; ++i)
      s += std::fabs(u.values[static_cast<size_t>(i + 1)] - u.values[static_cast<size_t>(i)]);
    if (zb) s += std::fabs(u.values[0]) + std::fabs(u.values[static_cast<size_t>(n - 1)]);
    return s;
  }
  const int nx = dom.cells[0], ny = dom.cells[1];
  const double hx = dom.spacing(0), hy = dom.spacing(1);
  auto at = [&](int ix, int iy) { return u.values[static_cast<size_t>(ix + nx * iy)]; };
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix + 1 < nx; ++ix) s += hy * std::fabs(at(ix + 1, iy) - at(ix, iy));
    if (zb) s += hy * (std::fabs(at(0, iy)) + std::fabs(at(nx - 1, iy)));
  }
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy + 1 < ny; ++iy) s += hx * std::fabs(at(ix, iy + 1) - at(ix, iy));
    if (zb) s += hx * (std::fabs(at(ix, 0)) + std::fabs(at(ix, ny - 1)));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Backends.

TvBackend1d::TvBackend1d(const Domain& dom) : dom_(dom) {
  if (!dom.is_1d()) throw ConfigError("tv 1d backend: domain must be an interval");
  mass_conserving = dom.boundary == BoundaryKind::neumann;
  exact_resolvent = true;
}

GridFunction TvBackend1d::resolvent(double mu, const GridFunction& v,
                                    const ResolventTolerance& tol, ResolventScratch*) const {
  tol.validate();
  return tv_resolvent_1d(dom_, v, mu);
}

TvBackend2d::TvBackend2d(const Domain& dom, TVSpec spec) : dom_(dom), spec_(spec) {
  if (dom.kind != DomainKind::grid_2d) throw ConfigError("tv 2d backend: domain must be a grid");
  spec_.validate();
  mass_conserving = dom.boundary == BoundaryKind::neumann;
}

std::unique_ptr<ResolventScratch> TvBackend2d::make_scratch() const {
  return std::make_unique<TVDualState>();
}

GridFunction TvBackend2d::resolvent(double mu, const GridFunction& v,
                                    const ResolventTolerance& tol,
                                    ResolventScratch* scratch) const {
  return tv_resolvent_2d(dom_, v, mu, spec_, tol, dynamic_cast<TVDualState*>(scratch));
}

}  // namespace homflow
