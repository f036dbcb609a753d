#include "homflow/oracles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace homflow {

// ---------------------------------------------------------------------------
// Plateau dynamics.

void PlateauState::validate() const {
  if (breaks.size() < 2 || heights.size() + 1 != breaks.size())
    throw ConfigError("plateau state: need K+1 breaks for K plateaus");
  if (breaks.front() != 0.0) throw ConfigError("plateau state: breaks must start at 0");
  for (size_t i = 0; i + 1 < breaks.size(); ++i)
    if (!(breaks[i] < breaks[i + 1]))
      throw ConfigError("plateau state: breaks must be strictly increasing");
  require_finite(breaks, "plateau breaks");
  require_finite(heights, "plateau heights");
  for (size_t i = 0; i + 1 < heights.size(); ++i)
    if (heights[i] == heights[i + 1])
      throw ConfigError("plateau state: adjacent plateaus must differ in height");
}

double PlateauState::mass() const {
  double m = 0.0;
  for (size_t i = 0; i < heights.size(); ++i)
    m += heights[i] * (breaks[i + 1] - breaks[i]);
  return m;
}

namespace {

std::vector<double> plateau_speeds(const std::vector<double>& br,
                                   const std::vector<double>& h) {
  const size_t k = h.size();
  std::vector<double> s(k, 0.0);
  for (size_t i = 0; i < k; ++i) {
    double sides = 0.0;
    if (i > 0) sides += (h[i - 1] > h[i]) ? 1.0 : -1.0;
    if (i + 1 < k) sides += (h[i + 1] > h[i]) ? 1.0 : -1.0;
    s[i] = sides / (br[i + 1] - br[i]);
  }
  return s;
}

// Smallest positive meeting time of adjacent plateaus; infinity if none close.
double next_event(const std::vector<double>& h, const std::vector<double>& s) {
  double tau = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < h.size(); ++i) {
    const double dh = h[i + 1] - h[i];
    const double ds = s[i + 1] - s[i];
    if (dh * ds < 0.0) tau = std::min(tau, -dh / ds);
  }
  return tau;
}

// Merge runs of (numerically) equal adjacent heights, width-averaging values.
void merge_equal(std::vector<double>& br, std::vector<double>& h) {
  double scale = 1.0;
  for (double v : h) scale = std::max(scale, std::fabs(v));
  std::vector<double> nbr{br.front()};
  std::vector<double> nh;
  size_t i = 0;
  while (i < h.size()) {
    size_t j = i;
    double mass = 0.0, width = 0.0;
    while (true) {
      mass += h[j] * (br[j + 1] - br[j]);
      width += br[j + 1] - br[j];
      if (j + 1 < h.size() && std::fabs(h[j + 1] - h[j]) <= 1e-12 * scale)
        ++j;
      else
        break;
    }
    nh.push_back(mass / width);
    nbr.push_back(br[j + 1]);
    i = j + 1;
  }
  br = std::move(nbr);
  h = std::move(nh);
}

}  // namespace

PlateauState plateau_ode_oracle(const PlateauState& u0, double t) {
  u0.validate();
  if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("plateau oracle: t must be >= 0");
  std::vector<double> br = u0.breaks, h = u0.heights;
  double remaining = t;
  while (remaining > 0.0 && h.size() > 1) {
    auto s = plateau_speeds(br, h);
    const double tau = next_event(h, s);
    if (tau >= remaining) {
      for (size_t i = 0; i < h.size(); ++i) h[i] += s[i] * remaining;
      remaining = 0.0;
      break;
    }
    for (size_t i = 0; i < h.size(); ++i) h[i] += s[i] * tau;
    merge_equal(br, h);
    remaining -= tau;
  }
  PlateauState out;
  out.breaks = std::move(br);
  out.heights = std::move(h);
  return out;
}

double plateau_first_merge(const PlateauState& u0) {
  u0.validate();
  auto s = plateau_speeds(u0.breaks, u0.heights);
  return next_event(u0.heights, s);
}

double plateau_extinction_time(const PlateauState& u0) {
  u0.validate();
  std::vector<double> br = u0.breaks, h = u0.heights;
  double t = 0.0;
  while (h.size() > 1) {
    auto s = plateau_speeds(br, h);
    const double tau = next_event(h, s);
    if (!std::isfinite(tau)) return std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < h.size(); ++i) h[i] += s[i] * tau;
    merge_equal(br, h);
    t += tau;
  }
  return t;
}

GridFunction plateau_sample(const PlateauState& s, const Domain& dom) {
  s.validate();
  if (!dom.is_1d()) throw ConfigError("plateau sample: domain must be 1d");
  if (std::fabs(dom.length[0] - s.total_length()) > 1e-12 * dom.length[0])
    throw ConfigError("plateau sample: domain length mismatch");
  const int n = dom.cells[0];
  const double h = dom.spacing(0);
  std::vector<double> vals(static_cast<size_t>(n));
  size_t k = 0;
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) * h;
    while (k + 1 < s.heights.size() && x >= s.breaks[k + 1]) ++k;
    vals[static_cast<size_t>(i)] = s.heights[k];
  }
  return GridFunction::from_values(dom, std::move(vals));
}

PlateauState plateau_from_grid(const Domain& dom, const GridFunction& u) {
  if (!dom.is_1d()) throw ConfigError("plateau from grid: domain must be 1d");
  if (dom.id() != u.domain_id) throw ConfigError("plateau from grid: domain mismatch");
  const int n = dom.cells[0];
  const double h = dom.spacing(0);
  PlateauState s;
  s.breaks.push_back(0.0);
  for (int i = 0; i < n; ++i) {
    if (i == 0 || u.values[static_cast<size_t>(i)] != u.values[static_cast<size_t>(i - 1)]) {
      if (i > 0) s.breaks.push_back(i * h);
      s.heights.push_back(u.values[static_cast<size_t>(i)]);
    }
  }
  s.breaks.push_back(dom.length[0]);
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Dense resolvent oracle: dual box-constrained least squares by active set.

void DenseProxProblem::validate() const {
  const int n = static_cast<int>(mass.size());
  if (n < 1 || n > 64) throw ConfigError("dense oracle: node count must be in [1, 64]");
  if (v.size() != mass.size()) throw ConfigError("dense oracle: v size mismatch");
  if (pairs.size() > 8192) throw ConfigError("dense oracle: too many pair terms");
  for (double m : mass)
    if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("dense oracle: masses must be positive");
  require_finite(v, "dense oracle data");
  for (const auto& p : pairs) {
    if (p.i < 0 || p.i >= n || p.j < -1 || p.j >= n || p.j == p.i)
      throw ConfigError("dense oracle: invalid pair indices");
    if (!(p.w > 0.0) || !std::isfinite(p.w))
      throw ConfigError("dense oracle: pair weights must be positive");
  }
}

std::vector<double> dense_resolvent_oracle(const DenseProxProblem& pb, double mu,
                                           double* gap_out) {
  pb.validate();
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("dense oracle: mu must be positive");
  const int n = static_cast<int>(pb.mass.size());
  const int np = static_cast<int>(pb.pairs.size());

  // Columns of A = M^{-1/2} B; b = M^{1/2} v; minimize (1/2)|A z - b|^2 on the box.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, std::max(np, 1));
  Eigen::VectorXd b(n);
  for (int k = 0; k < n; ++k) b[k] = std::sqrt(pb.mass[static_cast<size_t>(k)]) * pb.v[static_cast<size_t>(k)];
  for (int p = 0; p < np; ++p) {
    const auto& pr = pb.pairs[static_cast<size_t>(p)];
    const double c = mu * pr.w;
    A(pr.i, p) += c / std::sqrt(pb.mass[static_cast<size_t>(pr.i)]);
    if (pr.j >= 0) A(pr.j, p) -= c / std::sqrt(pb.mass[static_cast<size_t>(pr.j)]);
  }

  Eigen::VectorXd z = Eigen::VectorXd::Zero(np);
  std::vector<int> state(static_cast<size_t>(np), 0);  // 0 free, +1/-1 at bound
  const double gscale = std::max(1.0, (A.transpose() * b).cwiseAbs().maxCoeff());
  const double kkt_tol = 1e-13 * gscale;
  const int max_outer = 200 + 40 * np;

  for (int outer = 0; outer < max_outer; ++outer) {
    // Assemble the free subproblem.
    std::vector<int> freev;
    for (int p = 0; p < np; ++p)
      if (state[static_cast<size_t>(p)] == 0) freev.push_back(p);
    Eigen::VectorXd rhs = b;
    for (int p = 0; p < np; ++p)
      if (state[static_cast<size_t>(p)] != 0) rhs -= A.col(p) * z[p];

    Eigen::VectorXd zf;
    if (!freev.empty()) {
      Eigen::MatrixXd Af(n, static_cast<int>(freev.size()));
      for (size_t c = 0; c < freev.size(); ++c) Af.col(static_cast<int>(c)) = A.col(freev[c]);
      zf = Af.completeOrthogonalDecomposition().solve(rhs);
    }

    bool inside = true;
    for (size_t c = 0; c < freev.size(); ++c)
      if (std::fabs(zf[static_cast<int>(c)]) > 1.0 + 1e-14) inside = false;

    if (inside) {
      for (size_t c = 0; c < freev.size(); ++c)
        z[freev[c]] = std::clamp(zf[static_cast<int>(c)], -1.0, 1.0);
      // KKT on bound variables; release the worst violator if any.
      Eigen::VectorXd g = A.transpose() * (A * z - b);
      int worst = -1;
      double worst_v = kkt_tol;
      for (int p = 0; p < np; ++p) {
        if (state[static_cast<size_t>(p)] == 0) continue;
        const double viol = state[static_cast<size_t>(p)] > 0 ? g[p] : -g[p];
        if (viol > worst_v) {
          worst_v = viol;
          worst = p;
        }
      }
      if (worst < 0) break;
      state[static_cast<size_t>(worst)] = 0;
      continue;
    }

    // Step toward the free minimizer, stopping at the first bound crossing.
    double alpha = 1.0;
    for (size_t c = 0; c < freev.size(); ++c) {
      const double zc = z[freev[c]], zt = zf[static_cast<int>(c)];
      if (std::fabs(zt) <= 1.0) continue;
      const double bound = zt > 0 ? 1.0 : -1.0;
      const double denom = zt - zc;
      if (denom != 0.0) alpha = std::min(alpha, (bound - zc) / denom);
    }
    alpha = std::max(alpha, 0.0);
    for (size_t c = 0; c < freev.size(); ++c) {
      const int p = freev[c];
      z[p] += alpha * (zf[static_cast<int>(c)] - z[p]);
      if (std::fabs(z[p]) >= 1.0 - 1e-14) {
        z[p] = z[p] > 0 ? 1.0 : -1.0;
        state[static_cast<size_t>(p)] = z[p] > 0 ? 1 : -1;
      }
    }
    if (outer == max_outer - 1) throw SolverError("dense oracle: active-set loop did not settle");
  }

  // Primal recovery and duality gap certificate.
  std::vector<double> u(pb.v);
  std::vector<double> r(static_cast<size_t>(n), 0.0);  // r = B z
  for (int p = 0; p < np; ++p) {
    const auto& pr = pb.pairs[static_cast<size_t>(p)];
    const double c = mu * pr.w * z[p];
    r[static_cast<size_t>(pr.i)] += c;
    if (pr.j >= 0) r[static_cast<size_t>(pr.j)] -= c;
  }
  for (int k = 0; k < n; ++k) u[static_cast<size_t>(k)] -= r[static_cast<size_t>(k)] / pb.mass[static_cast<size_t>(k)];

  double primal = 0.0, dual = 0.0;
  for (int k = 0; k < n; ++k) {
    const double d = u[static_cast<size_t>(k)] - pb.v[static_cast<size_t>(k)];
    primal += 0.5 * pb.mass[static_cast<size_t>(k)] * d * d;
    dual += r[static_cast<size_t>(k)] * pb.v[static_cast<size_t>(k)] -
            0.5 * r[static_cast<size_t>(k)] * r[static_cast<size_t>(k)] / pb.mass[static_cast<size_t>(k)];
  }
  for (const auto& pr : pb.pairs) {
    const double uj = pr.j >= 0 ? u[static_cast<size_t>(pr.j)] : 0.0;
    primal += mu * pr.w * std::fabs(u[static_cast<size_t>(pr.i)] - uj);
  }
  double gap = std::max(primal - dual, 0.0);
  if (gap > 1e-12 * std::max(1.0, primal))
    throw SolverError("dense oracle: duality gap certificate failed");
  if (gap_out) *gap_out = gap;
  return u;
}

// ---------------------------------------------------------------------------
// Quadrature oracle.

namespace {

// 16-point Gauss-Legendre abscissae/weights on [-1, 1] (positive half).
constexpr double kGlX[8] = {
    0.09501250983763744, 0.28160355077925891, 0.45801677765722739, 0.61787624440264375,
    0.75540440835500303, 0.86563120238783174, 0.94457502307323258, 0.98940093499164993};
constexpr double kGlW[8] = {
    0.18945061045506850, 0.18260341504492359, 0.16915651939500254, 0.14959598881657673,
    0.12462897125553387, 0.09515851168249278, 0.06225352393864789, 0.02715245941175409};

template <class F>
double gl16(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int k = 0; k < 8; ++k)
    s += kGlW[k] * (f(mid + half * kGlX[k]) + f(mid - half * kGlX[k]));
  return s * half;
}

template <class F>
double gl_composite(const F& f, double a, double b, double tol_rel) {
  if (a == b) return 0.0;
  double prev = gl16(f, a, b);
  for (int panels = 2; panels <= (1 << 16); panels *= 2) {
    double s = 0.0;
    const double step = (b - a) / panels;
    for (int j = 0; j < panels; ++j) s += gl16(f, a + j * step, a + (j + 1) * step);
    if (std::fabs(s - prev) <= tol_rel * std::max(1.0, std::fabs(s))) return s;
    prev = s;
  }
  return prev;
}

}  // namespace

double quadrature_oracle(QuadIntegrand which, double omega, double L, double t) {
  if (!(omega >= 0.0) || !std::isfinite(omega))
    throw ConfigError("quadrature oracle: omega must be >= 0");
  if (!(L >= 1.0) || !std::isfinite(L)) throw ConfigError("quadrature oracle: L must be >= 1");
  if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("quadrature oracle: t must be >= 0");

  const bool weighted = which == QuadIntegrand::inner_weighted || which == QuadIntegrand::factor_weighted;
  auto kernel = [omega, weighted](double r) {
    const double e = std::exp(-omega * r);
    return weighted ? r * e : e;
  };
  auto inner = [&kernel](double s, double t1) { return gl_composite(kernel, s, t1, 1e-13); };

  switch (which) {
    case QuadIntegrand::inner_plain:
    case QuadIntegrand::inner_weighted:
      return inner(0.0, t);
    case QuadIntegrand::factor_plain:
    case QuadIntegrand::factor_weighted: {
      if (omega == 0.0 || t == 0.0) return 2.0 * L;
      const double c = weighted ? L * omega : 2.0 * L * omega;
      const double term1 = 2.0 * std::exp(c * inner(0.0, t));
      auto g = [&](double s) { return std::exp(c * inner(s, t)); };
      const double term2 = omega * gl_composite(g, 0.0, t, 1e-12);
      return std::exp(omega * t) * L * (term1 + term2);
    }
  }
  throw ConfigError("quadrature oracle: unknown integrand");
}

}  // namespace homflow
