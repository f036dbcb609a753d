#include "homflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace homflow {

double inf() { return std::numeric_limits<double>::infinity(); }

void require_finite(const std::vector<double>& vals, const char* what) {
  for (double v : vals) {
    if (!std::isfinite(v)) throw ConfigError(std::string(what) + ": non-finite entry");
  }
}

static void check_domain(double len0, double len1, int n0, int n1) {
  if (!(len0 > 0.0) || !(len1 > 0.0)) throw ConfigError("domain: lengths must be positive");
  if (n0 < 1 || n1 < 1) throw ConfigError("domain: cell counts must be >= 1");
}

Domain Domain::interval(double len, int n, BoundaryKind b) {
  check_domain(len, 1.0, n, 1);
  Domain d;
  d.kind = DomainKind::interval_1d;
  d.boundary = b;
  d.length = {len, 1.0};
  d.cells = {n, 1};
  return d;
}

Domain Domain::rectangle(double lx, double ly, int nx, int ny, BoundaryKind b) {
  check_domain(lx, ly, nx, ny);
  Domain d;
  d.kind = DomainKind::grid_2d;
  d.boundary = b;
  d.length = {lx, ly};
  d.cells = {nx, ny};
  return d;
}

double Domain::cell_measure() const {
  if (kind == DomainKind::interval_1d) return spacing(0);
  return spacing(0) * spacing(1);
}

double Domain::total_measure() const {
  if (kind == DomainKind::interval_1d) return length[0];
  return length[0] * length[1];
}

std::string Domain::id() const {
  char buf[160];
  const char* bc = boundary == BoundaryKind::neumann ? "neumann" : "dirichlet0";
  if (kind == DomainKind::interval_1d) {
    std::snprintf(buf, sizeof(buf), "interval:L=%.17g:n=%d:%s", length[0], cells[0], bc);
  } else {
    std::snprintf(buf, sizeof(buf), "grid:Lx=%.17g:Ly=%.17g:nx=%d:ny=%d:%s", length[0],
                  length[1], cells[0], cells[1], bc);
  }
  return std::string(buf);
}

GridFunction GridFunction::zeros(const Domain& dom) { return constant(dom, 0.0); }

GridFunction GridFunction::constant(const Domain& dom, double c) {
  if (!std::isfinite(c)) throw ConfigError("grid function: non-finite constant");
  GridFunction g;
  g.values.assign(static_cast<size_t>(dom.cell_count()), c);
  g.cell_measure.assign(static_cast<size_t>(dom.cell_count()), dom.cell_measure());
  g.domain_id = dom.id();
  return g;
}

GridFunction GridFunction::from_values(const Domain& dom, std::vector<double> vals) {
  if (static_cast<int>(vals.size()) != dom.cell_count())
    throw ConfigError("grid function: value count does not match domain");
  require_finite(vals, "grid function");
  GridFunction g;
  g.values = std::move(vals);
  g.cell_measure.assign(g.values.size(), dom.cell_measure());
  g.domain_id = dom.id();
  return g;
}

void GridFunction::require_compatible(const GridFunction& other) const {
  if (domain_id != other.domain_id || values.size() != other.values.size())
    throw ConfigError("grid functions live on different domains");
}

double GridFunction::norm(double p) const {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
  }
  if (p == 1.0) {
    double s = 0.0;
    for (size_t i = 0; i < values.size(); ++i) s += cell_measure[i] * std::fabs(values[i]);
    return s;
  }
  if (p == 2.0) {
    double s = 0.0;
    for (size_t i = 0; i < values.size(); ++i) s += cell_measure[i] * values[i] * values[i];
    return std::sqrt(s);
  }
  throw ConfigError("norm: p must be 1, 2 or infinity");
}

double GridFunction::weighted_sum() const {
  double s = 0.0;
  for (size_t i = 0; i < values.size(); ++i) s += cell_measure[i] * values[i];
  return s;
}

double GridFunction::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  return m;
}

double GridFunction::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : values) m = std::min(m, v);
  return m;
}

GridFunction gf_add(const GridFunction& a, const GridFunction& b) {
  a.require_compatible(b);
  GridFunction r = a;
  for (size_t i = 0; i < r.values.size(); ++i) r.values[i] += b.values[i];
  return r;
}

GridFunction gf_sub(const GridFunction& a, const GridFunction& b) {
  a.require_compatible(b);
  GridFunction r = a;
  for (size_t i = 0; i < r.values.size(); ++i) r.values[i] -= b.values[i];
  return r;
}

GridFunction gf_scale(const GridFunction& a, double s) {
  GridFunction r = a;
  for (double& v : r.values) v *= s;
  return r;
}

double gf_dist(const GridFunction& a, const GridFunction& b, double p) {
  return gf_sub(a, b).norm(p);
}

}  // namespace homflow
