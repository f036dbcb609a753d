#pragma once
// Uniform-grid domains and measure-weighted grid functions.
//
// A GridFunction carries one value per cell plus the per-cell measures, so
// norms and mass are integrals against the underlying measure rather than
// plain vector norms.  All solvers in this project operate on these types.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace homflow {

// Invalid inputs or malformed configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iterative solve failed to reach its certificate.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DomainKind { interval_1d, grid_2d };
enum class BoundaryKind { neumann, dirichlet_zero };

struct Domain {
  DomainKind kind = DomainKind::interval_1d;
  BoundaryKind boundary = BoundaryKind::neumann;
  std::array<double, 2> length{1.0, 1.0};
  std::array<int, 2> cells{1, 1};

  static Domain interval(double len, int n, BoundaryKind b);
  static Domain rectangle(double lx, double ly, int nx, int ny, BoundaryKind b);

  int cell_count() const { return cells[0] * cells[1]; }
  double spacing(int axis) const { return length[axis] / cells[axis]; }
  // Cells are uniform; every cell carries the same measure.
  double cell_measure() const;
  double total_measure() const;
  std::string id() const;
  bool is_1d() const { return kind == DomainKind::interval_1d; }
};

struct GridFunction {
  std::vector<double> values;
  std::vector<double> cell_measure;
  std::string domain_id;

  static GridFunction zeros(const Domain& dom);
  static GridFunction constant(const Domain& dom, double c);
  static GridFunction from_values(const Domain& dom, std::vector<double> vals);

  int size() const { return static_cast<int>(values.size()); }
  void require_compatible(const GridFunction& other) const;

  // L^p norm against the cell measure; p must be 1, 2 or +infinity.
  double norm(double p) const;
  double weighted_sum() const;  // integral of the values over the domain
  double max_value() const;
  double min_value() const;
};

// Elementwise helpers; operands must live on the same domain.
GridFunction gf_add(const GridFunction& a, const GridFunction& b);
GridFunction gf_sub(const GridFunction& a, const GridFunction& b);
GridFunction gf_scale(const GridFunction& a, double s);
double gf_dist(const GridFunction& a, const GridFunction& b, double p);

void require_finite(const std::vector<double>& vals, const char* what);
double inf();  // +infinity shorthand for norm selectors

}  // namespace homflow
