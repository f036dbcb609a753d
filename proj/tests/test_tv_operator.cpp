// Total-variation resolvents: the exact 1d solver against the dense oracle,
// structural identities (scaling, chaining, flattening), and the certified
// 2d dual projection.
#include <doctest.h>

#include <cmath>
#include <vector>

#include "homflow/engine.hpp"
#include "homflow/grid.hpp"
#include "homflow/oracles.hpp"
#include "homflow/rng.hpp"
#include "homflow/tv_operator.hpp"

using namespace homflow;

namespace {

GridFunction random_state(const Domain& dom, uint64_t seed, double lo, double hi) {
  Rng rng(seed);
  std::vector<double> vals(static_cast<size_t>(dom.cell_count()));
  for (double& v : vals) v = rng.uniform(lo, hi);
  return GridFunction::from_values(dom, vals);
}

// Dense mirror of the 1d objective: (1/2) sum h (u-v)^2 + mu sum |jumps|,
// with pinned zero partners at both ends for the zero-boundary variant.
DenseProxProblem dense_mirror_1d(const Domain& dom, const GridFunction& v) {
  const int n = dom.cells[0];
  DenseProxProblem pb;
  pb.mass.assign(static_cast<size_t>(n), dom.cell_measure());
  pb.v = v.values;
  for (int i = 0; i + 1 < n; ++i) pb.pairs.push_back({i, i + 1, 1.0});
  if (dom.boundary == BoundaryKind::dirichlet_zero) {
    pb.pairs.push_back({0, -1, 1.0});
    pb.pairs.push_back({n - 1, -1, 1.0});
  }
  return pb;
}

// Dense mirror of the 2d objective: x-edges weigh hy, y-edges weigh hx.
DenseProxProblem dense_mirror_2d(const Domain& dom, const GridFunction& v) {
  const int nx = dom.cells[0], ny = dom.cells[1];
  const double hx = dom.spacing(0), hy = dom.spacing(1);
  const bool zb = dom.boundary == BoundaryKind::dirichlet_zero;
  DenseProxProblem pb;
  pb.mass.assign(static_cast<size_t>(nx * ny), dom.cell_measure());
  pb.v = v.values;
  auto cell = [&](int ix, int iy) { return ix + nx * iy; };
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix + 1 < nx; ++ix) pb.pairs.push_back({cell(ix, iy), cell(ix + 1, iy), hy});
    if (zb) {
      pb.pairs.push_back({cell(0, iy), -1, hy});
      pb.pairs.push_back({cell(nx - 1, iy), -1, hy});
    }
  }
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy + 1 < ny; ++iy) pb.pairs.push_back({cell(ix, iy), cell(ix, iy + 1), hx});
    if (zb) {
      pb.pairs.push_back({cell(ix, 0), -1, hx});
      pb.pairs.push_back({cell(ix, ny - 1), -1, hx});
    }
  }
  return pb;
}

}  // namespace

TEST_CASE("1d resolvent matches the dense oracle on both boundaries") {
  for (const BoundaryKind bk : {BoundaryKind::neumann, BoundaryKind::dirichlet_zero}) {
    const Domain dom = Domain::interval(1.0, 30, bk);
    const GridFunction v = random_state(dom, 42, -1.0, 1.0);
    const DenseProxProblem pb = dense_mirror_1d(dom, v);
    for (const double mu : {1e-3, 1e-2, 1e-1}) {
      const GridFunction u = tv_resolvent_1d(dom, v, mu);
      const auto ref = dense_resolvent_oracle(pb, mu);
      double sup = 0.0;
      for (int i = 0; i < 30; ++i)
        sup = std::max(sup, std::fabs(u.values[static_cast<size_t>(i)] - ref[static_cast<size_t>(i)]));
      CHECK(sup <= 1e-12);
    }
  }
}

TEST_CASE("1d resolvent scaling identity holds to machine precision") {
  // One-homogeneous energy: J_{lambda mu}(lambda v) = lambda J_mu(v).
  const Domain dom = Domain::interval(1.0, 50, BoundaryKind::neumann);
  const GridFunction v = random_state(dom, 3, -1.0, 2.0);
  for (const double lambda : {0.25, 4.0}) {
    const GridFunction a = tv_resolvent_1d(dom, gf_scale(v, lambda), lambda * 0.02);
    const GridFunction b = gf_scale(tv_resolvent_1d(dom, v, 0.02), lambda);
    CHECK(gf_dist(a, b, inf()) <= 1e-13 * lambda);
  }
}

TEST_CASE("1d no-flux resolvent flattens to the mean for large mu") {
  const Domain dom = Domain::interval(1.0, 20, BoundaryKind::neumann);
  const GridFunction v = random_state(dom, 5, -1.0, 1.0);
  const double mean = v.weighted_sum() / dom.total_measure();
  const GridFunction u = tv_resolvent_1d(dom, v, 100.0);
  for (double ui : u.values) CHECK(ui == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("1d no-flux resolvent conserves the integral and fixes constants") {
  const Domain dom = Domain::interval(2.0, 33, BoundaryKind::neumann);
  const GridFunction v = random_state(dom, 9, 0.0, 1.0);
  const GridFunction u = tv_resolvent_1d(dom, v, 0.03);
  CHECK(u.weighted_sum() == doctest::Approx(v.weighted_sum()).epsilon(1e-13));
  const GridFunction c = GridFunction::constant(dom, 0.4);
  CHECK(gf_dist(tv_resolvent_1d(dom, c, 0.5), c, inf()) <= 1e-14);
}

TEST_CASE("resolvent chaining is bitwise associative") {
  // 64 micro steps in one call equal two chained 32-step calls: the exact
  // solver makes the identical sequence of solves either way.
  const Domain dom = Domain::interval(1.0, 40, BoundaryKind::neumann);
  const GridFunction u0 = random_state(dom, 12, 0.0, 1.0);
  const TvBackend1d op(dom);
  ResolventTolerance tol;
  const GridFunction whole = resolvent_iterate(op, u0, 0.1, 64, tol);
  const GridFunction half = resolvent_iterate(op, u0, 0.05, 32, tol);
  const GridFunction chained = resolvent_iterate(op, half, 0.05, 32, tol);
  CHECK(whole.values == chained.values);
}

TEST_CASE("1d seminorm counts jumps with boundary terms") {
  const Domain nm = Domain::interval(1.0, 3, BoundaryKind::neumann);
  const Domain zb = Domain::interval(1.0, 3, BoundaryKind::dirichlet_zero);
  const GridFunction u = GridFunction::from_values(nm, {1.0, 2.0, 3.0});
  const GridFunction uz = GridFunction::from_values(zb, {1.0, 2.0, 3.0});
  CHECK(tv_seminorm(nm, u) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(tv_seminorm(zb, uz) == doctest::Approx(2.0 + 1.0 + 3.0).epsilon(1e-15));
}

TEST_CASE("2d seminorm weighs edges by the transverse spacing") {
  const Domain dom = Domain::rectangle(1.0, 1.0, 2, 2, BoundaryKind::neumann);
  // Values: [[0, 1], [0, 1]] -> two x-jumps of 1 weighted hy = 1/2, no y-jumps.
  const GridFunction u = GridFunction::from_values(dom, {0.0, 1.0, 0.0, 1.0});
  CHECK(tv_seminorm(dom, u) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("2d resolvent matches the dense oracle") {
  for (const BoundaryKind bk : {BoundaryKind::neumann, BoundaryKind::dirichlet_zero}) {
    const Domain dom = Domain::rectangle(1.0, 1.0, 8, 8, bk);
    std::vector<double> vals(64, 0.0);
    for (int iy = 2; iy < 6; ++iy)
      for (int ix = 2; ix < 6; ++ix) vals[static_cast<size_t>(ix + 8 * iy)] = 1.0;
    const GridFunction v = GridFunction::from_values(dom, vals);
    const DenseProxProblem pb = dense_mirror_2d(dom, v);

    ResolventTolerance tol;
    tol.mode = ResolventTolerance::Mode::duality_gap;
    tol.rel_gap = 1e-8;
    const TVSpec spec;
    double gap = 0.0;
    const GridFunction u = tv_resolvent_2d(dom, v, 0.05, spec, tol, nullptr, &gap);
    const auto ref = dense_resolvent_oracle(pb, 0.05);
    double sup = 0.0;
    for (size_t i = 0; i < ref.size(); ++i)
      sup = std::max(sup, std::fabs(u.values[i] - ref[i]));
    CHECK(sup <= 10.0 * tol.rel_gap);
    CHECK(gap >= 0.0);
  }
}

TEST_CASE("2d resolvent is symmetric under transposing the grid") {
  const Domain dom = Domain::rectangle(1.0, 1.0, 6, 9, BoundaryKind::neumann);
  const Domain tdom = Domain::rectangle(1.0, 1.0, 9, 6, BoundaryKind::neumann);
  const GridFunction v = random_state(dom, 21, -1.0, 1.0);
  std::vector<double> tv_vals(54);
  for (int iy = 0; iy < 9; ++iy)
    for (int ix = 0; ix < 6; ++ix)
      tv_vals[static_cast<size_t>(iy + 9 * ix)] = v.values[static_cast<size_t>(ix + 6 * iy)];
  const GridFunction vt = GridFunction::from_values(tdom, tv_vals);

  ResolventTolerance tol;
  tol.mode = ResolventTolerance::Mode::exact;
  const TVSpec spec;
  const GridFunction u = tv_resolvent_2d(dom, v, 0.02, spec, tol);
  const GridFunction ut = tv_resolvent_2d(tdom, vt, 0.02, spec, tol);
  double sup = 0.0;
  for (int iy = 0; iy < 9; ++iy)
    for (int ix = 0; ix < 6; ++ix)
      sup = std::max(sup, std::fabs(u.values[static_cast<size_t>(ix + 6 * iy)] -
                                    ut.values[static_cast<size_t>(iy + 9 * ix)]));
  CHECK(sup <= 1e-8);
}

TEST_CASE("2d no-flux resolvent fixes constants") {
  const Domain dom = Domain::rectangle(1.0, 2.0, 7, 5, BoundaryKind::neumann);
  const GridFunction c = GridFunction::constant(dom, 0.9);
  ResolventTolerance tol;
  const GridFunction u = tv_resolvent_2d(dom, c, 0.3, TVSpec{}, tol);
  CHECK(gf_dist(u, c, inf()) <= 1e-10);
}

TEST_CASE("2d resolvent is deterministic across repeated calls") {
  const Domain dom = Domain::rectangle(1.0, 1.0, 10, 10, BoundaryKind::neumann);
  const GridFunction v = random_state(dom, 33, 0.0, 1.0);
  ResolventTolerance tol;
  const GridFunction a = tv_resolvent_2d(dom, v, 0.01, TVSpec{}, tol);
  const GridFunction b = tv_resolvent_2d(dom, v, 0.01, TVSpec{}, tol);
  CHECK(a.values == b.values);
}

TEST_CASE("warm-started 2d solves agree with cold solves") {
  const Domain dom = Domain::rectangle(1.0, 1.0, 12, 12, BoundaryKind::neumann);
  const TvBackend2d op(dom, TVSpec{});
  ResolventTolerance tol;
  tol.mode = ResolventTolerance::Mode::duality_gap;
  const GridFunction v0 = random_state(dom, 8, 0.0, 1.0);
  auto scratch = op.make_scratch();
  // Two chained solves with the shared scratch versus fresh cold solves.
  const GridFunction w1 = op.resolvent(0.01, v0, tol, scratch.get());
  const GridFunction w2 = op.resolvent(0.01, w1, tol, scratch.get());
  const GridFunction c1 = op.resolvent(0.01, v0, tol, nullptr);
  const GridFunction c2 = op.resolvent(0.01, c1, tol, nullptr);
  CHECK(gf_dist(w2, c2, inf()) <= 1e-7);
}

TEST_CASE("tv backends reject mismatched or invalid inputs") {
  const Domain dom = Domain::interval(1.0, 10, BoundaryKind::neumann);
  const Domain other = Domain::interval(1.0, 11, BoundaryKind::neumann);
  const GridFunction v = GridFunction::zeros(other);
  CHECK_THROWS_AS(tv_resolvent_1d(dom, v, 0.1), ConfigError);
  const GridFunction ok = GridFunction::zeros(dom);
  CHECK_THROWS_AS(tv_resolvent_1d(dom, ok, 0.0), ConfigError);
  CHECK_THROWS_AS(tv_resolvent_1d(dom, ok, -1.0), ConfigError);
  TVSpec bad;
  bad.dual_step = 0.3;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("1d backend flags describe the no-flux flow") {
  const TvBackend1d nm(Domain::interval(1.0, 4, BoundaryKind::neumann));
  CHECK(nm.mass_conserving);
  CHECK(nm.exact_resolvent);
  CHECK(nm.homogeneous_zero);
  CHECK(nm.order_preserving);
  const TvBackend1d zb(Domain::interval(1.0, 4, BoundaryKind::dirichlet_zero));
  CHECK(!zb.mass_conserving);
}
