#include "homflow/fractional_operator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "homflow/rng.hpp"

namespace homflow {

void FractionalSpec::validate() const {
  if (!(s > 0.0) || !(s < 1.0)) throw ConfigError("fractional: s must lie in (0, 1)");
  if (cells < 2) throw ConfigError("fractional: cells must be at least 2");
  if (collar_cells < 0) throw ConfigError("fractional: collar_cells must be nonnegative");
  if (!(length > 0.0) || !std::isfinite(length))
    throw ConfigError("fractional: length must be positive");
}

std::vector<PairTerm> fractional_pairs(const FractionalSpec& spec) {
  spec.validate();
  const int n = spec.cells;
  const int nc = spec.collar();
  const double h = spec.length / n;
  const double c0 = std::pow(h, 1.0 - spec.s);  // m_i m_j / (k h)^{1+s} = c0 k^{-(1+s)}
  const double q = -(1.0 + spec.s);
  std::vector<PairTerm> pairs;
  pairs.reserve(static_cast<size_t>(n) * static_cast<size_t>(n - 1) / 2 + static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      pairs.push_back({i, j, c0 * std::pow(static_cast<double>(j - i), q)});
  for (int i = 0; i < n; ++i) {
    double w = 0.0;
    for (int c = 0; c < nc; ++c)
      w += std::pow(static_cast<double>(i + c + 1), q) +
           std::pow(static_cast<double>(n - i + c), q);
    pairs.push_back({i, -1, c0 * w});
  }
  return pairs;
}

double incidence_norm(const std::vector<PairTerm>& pairs, int n_nodes) {
  if (n_nodes <= 0) throw ConfigError("incidence norm: need at least one node");
  // Power iteration on K^T K; the seeded start avoids landing in the flat
  // eigenspace of near-complete pair graphs.
  Rng rng(0x5851f42d4c957f2dULL);
  std::vector<double> z(static_cast<size_t>(n_nodes));
  for (double& zi : z) zi = rng.uniform(0.5, 1.5);
  std::vector<double> kz, ktkz(static_cast<size_t>(n_nodes));
  double lam = 0.0;
  for (int it = 0; it < 300; ++it) {
    std::fill(ktkz.begin(), ktkz.end(), 0.0);
    for (const PairTerm& p : pairs) {
      const double d = p.j >= 0 ? z[static_cast<size_t>(p.i)] - z[static_cast<size_t>(p.j)]
                                : z[static_cast<size_t>(p.i)];
      ktkz[static_cast<size_t>(p.i)] += d;
      if (p.j >= 0) ktkz[static_cast<size_t>(p.j)] -= d;
    }
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n_nodes; ++i) {
      num += z[static_cast<size_t>(i)] * ktkz[static_cast<size_t>(i)];
      den += z[static_cast<size_t>(i)] * z[static_cast<size_t>(i)];
    }
    const double lam_new = num / den;
    const double nz = std::sqrt(std::inner_product(ktkz.begin(), ktkz.end(), ktkz.begin(), 0.0));
    if (nz == 0.0) return 0.0;  // K z = 0 for every candidate direction
    for (double& zi : ktkz) zi /= nz;
    z.swap(ktkz);
    if (it > 10 && std::fabs(lam_new - lam) <= 1e-13 * std::max(1.0, lam_new)) {
      lam = lam_new;
      break;
    }
    lam = lam_new;
  }
  // Safety factor: the Rayleigh quotient approaches the norm from below.
  return std::sqrt(std::max(lam, 0.0)) * (1.0 + 1e-6);
}

double pair_seminorm(const std::vector<PairTerm>& pairs, const std::vector<double>& u) {
  double s = 0.0;
  for (const PairTerm& p : pairs) {
    const double d = p.j >= 0 ? u[static_cast<size_t>(p.i)] - u[static_cast<size_t>(p.j)]
                              : u[static_cast<size_t>(p.i)];
    s += p.w * std::fabs(d);
  }
  return s;
}

GridFunction frac_resolvent(const Domain& dom, const std::vector<PairTerm>& pairs,
                            const GridFunction& v, double mu, double knorm,
                            const ResolventTolerance& tol, FracDualState* ws, double* gap_out,
                            int* iters_out) {
  if (dom.id() != v.domain_id) throw ConfigError("fractional: domain mismatch");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("fractional: mu must be positive");
  if (!(knorm > 0.0)) throw ConfigError("fractional: knorm must be positive");
  tol.validate();

  const int n = static_cast<int>(v.size());
  const size_t np = pairs.size();
  const double m = dom.cell_measure();
  // Unit-mass rescaling: argmin (1/2)||u - v||^2 + mu_eff * sum w_p |K_p u|.
  // This keeps the proximal steps of the quadratic part well conditioned
  // regardless of the cell measure.
  const double mu_eff = mu / m;

  std::vector<double> eta;
  std::vector<double> u;
  if (ws && ws->warm && static_cast<int>(ws->u.size()) == n && ws->eta.size() == np) {
    eta = ws->eta;
    u = ws->u;
    for (size_t p = 0; p < np; ++p) {
      const double b = mu_eff * pairs[p].w;
      eta[p] = std::clamp(eta[p], -b, b);
    }
    // Any near-optimal dual satisfies ||K^T eta||_inf = ||v - u*||_inf
    // <= 2 ||v||_inf.  A warm dual far outside that scale comes from a much
    // larger earlier state; the iteration would crawl across the dual box at
    // O(sigma ||v||) per step, so a cold start is faster and safer.
    std::vector<double> rw(static_cast<size_t>(n), 0.0);
    for (size_t p = 0; p < np; ++p) {
      rw[static_cast<size_t>(pairs[p].i)] += eta[p];
      if (pairs[p].j >= 0) rw[static_cast<size_t>(pairs[p].j)] -= eta[p];
    }
    double rmax = 0.0;
    for (double ri : rw) rmax = std::max(rmax, std::fabs(ri));
    if (rmax > 8.0 * v.norm(inf())) {
      eta.assign(np, 0.0);
      u = v.values;
    }
  } else {
    eta.assign(np, 0.0);
    u = v.values;
  }
  std::vector<double> ubar = u, u_prev(static_cast<size_t>(n)), r(static_cast<size_t>(n));

  const double tau = 0.97 / knorm, sigma = 0.97 / knorm;

  auto apply_kt = [&](const std::vector<double>& y, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (size_t p = 0; p < np; ++p) {
      out[static_cast<size_t>(pairs[p].i)] += y[p];
      if (pairs[p].j >= 0) out[static_cast<size_t>(pairs[p].j)] -= y[p];
    }
  };

  const double scale_v = std::max(std::max(v.norm(inf()), tol.scale_hint), 1e-30);
  const double target_err = 0.25 * tol.rel_gap * scale_v;
  const double target_gap = 0.5 * target_err * target_err;
  const int check_every = 16;

  // The gap is a difference of long sums; it cannot be resolved below the
  // summation rounding level, which grows with the number of accumulated
  // terms.  Certification saturates at that floor.
  const double floor_terms = std::max(64.0, 2.0 * (3.0 * n + static_cast<double>(np)));
  double gap_floor = 0.0;
  auto compute_gap = [&]() {
    apply_kt(eta, r);
    double qv = 0.0, pv = 0.0, mag = 1e-300;
    for (int i = 0; i < n; ++i) {
      const double ri = r[static_cast<size_t>(i)];
      const double vi = v.values[static_cast<size_t>(i)];
      qv += ri * vi - 0.5 * ri * ri;
      mag += std::fabs(ri * vi) + 0.5 * ri * ri;
      const double du = u[static_cast<size_t>(i)] - vi;
      pv += 0.5 * du * du;
      mag += 0.5 * du * du;
    }
    const double semi = mu_eff * pair_seminorm(pairs, u);
    pv += semi;
    mag += semi;
    gap_floor = floor_terms * std::numeric_limits<double>::epsilon() * mag;
    return std::max(pv - qv, 0.0);
  };

  double gap = std::numeric_limits<double>::infinity();
  bool certified = false;
  std::vector<double> u_snap;
  int it = 0;
  for (; it < tol.max_iters; ++it) {
    if (it % check_every == 0) {
      gap = compute_gap();
      if (gap <= std::max(target_gap, gap_floor)) {
        certified = true;
        if (tol.mode == ResolventTolerance::Mode::duality_gap) break;
        if (!u_snap.empty()) {
          double d = 0.0, s = 1e-30;
          for (int i = 0; i < n; ++i) {
            d = std::max(d, std::fabs(u[static_cast<size_t>(i)] - u_snap[static_cast<size_t>(i)]));
            s = std::max(s, std::fabs(u[static_cast<size_t>(i)]));
          }
          if (d <= 1e-15 * s) break;
        }
        u_snap = u;
      }
    }
    for (size_t p = 0; p < np; ++p) {
      const double du = pairs[p].j >= 0
                            ? ubar[static_cast<size_t>(pairs[p].i)] - ubar[static_cast<size_t>(pairs[p].j)]
                            : ubar[static_cast<size_t>(pairs[p].i)];
      const double b = mu_eff * pairs[p].w;
      eta[p] = std::clamp(eta[p] + sigma * du, -b, b);
    }
    u_prev.swap(u);
    apply_kt(eta, r);
    for (int i = 0; i < n; ++i) {
      const size_t k = static_cast<size_t>(i);
      u[k] = (u_prev[k] - tau * r[k] + tau * v.values[k]) / (1.0 + tau);
      ubar[k] = 2.0 * u[k] - u_prev[k];
    }
  }
  if (it == tol.max_iters) {
    gap = compute_gap();
    certified = gap <= std::max(target_gap, gap_floor);
  }
  if (!certified) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "fractional: duality gap certificate not reached within max_iters "
                  "(gap %.3e, floor %.3e, target %.3e, mu %.3e)",
                  gap, gap_floor, target_gap, mu);
    throw SolverError(msg);
  }

  if (ws) {
    ws->eta = eta;
    ws->u = u;
    ws->warm = true;
  }
  if (gap_out) *gap_out = m * gap;  // back to mass-weighted objective units
  if (iters_out) *iters_out = it;
  GridFunction out = v;
  out.values = std::move(u);
  return out;
}

SmoothingExponents smoothing_exponents(double s, double q, double d) {
  if (!(s > 0.0) || !(s < d)) throw ConfigError("smoothing exponents: need 0 < s < d");
  if (!(q > (d - s) / s))
    throw ConfigError("smoothing exponents: need q > (d - s) / s");
  const double den = s * (q + 1.0) - d;
  return {d / (d - s), (d - s) / den, s * q / den};
}

FractionalBackend::FractionalBackend(FractionalSpec spec)
    : spec_(spec),
      dom_(Domain::interval(spec.length, spec.cells, BoundaryKind::dirichlet_zero)),
      pairs_(fractional_pairs(spec_)),
      knorm_(incidence_norm(pairs_, spec_.cells)) {
  mass_conserving = false;
}

GridFunction FractionalBackend::resolvent(double mu, const GridFunction& v,
                                          const ResolventTolerance& tol,
                                          ResolventScratch* scratch) const {
  return frac_resolvent(dom_, pairs_, v, mu, knorm_, tol, dynamic_cast<FracDualState*>(scratch));
}

std::unique_ptr<ResolventScratch> FractionalBackend::make_scratch() const {
  return std::make_unique<FracDualState>();
}

double FractionalBackend::seminorm(const GridFunction& u) const {
  if (dom_.id() != u.domain_id) throw ConfigError("fractional: domain mismatch");
  return pair_seminorm(pairs_, u.values);
}

}  // namespace homflow
