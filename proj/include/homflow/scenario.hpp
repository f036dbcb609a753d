#pragma once
// JSON-configured scenario runner behind the command line tool.  Parsing is
// fail-closed: unknown keys anywhere in the config are errors, so typos can
// not silently disable a check.  See docs/config_schema.json.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "homflow/backend.hpp"
#include "homflow/engine.hpp"
#include "homflow/estimates.hpp"
#include "homflow/fractional_operator.hpp"
#include "homflow/grid.hpp"
#include "homflow/tv_operator.hpp"

namespace homflow {

struct Scenario {
  std::string name;
  uint64_t seed = 1;

  enum class BackendKind { tv_1d, tv_2d, fractional };
  BackendKind backend_kind = BackendKind::tv_1d;
  Domain domain;  // tv backends; the fractional backend derives its own
  TVSpec tv_spec;
  FractionalSpec frac_spec;

  enum class InitKind {
    constant,
    indicator,
    bump,
    random_plateaus,
    random_cells,
    values,
    file
  };
  InitKind init_kind = InitKind::indicator;
  double init_value = 0.0;                                  // constant
  double init_left = 0.0, init_right = 0.0, init_height = 1.0;  // indicator
  double init_center = 0.5, init_width = 0.25;              // bump
  int init_pieces = 4;
  double init_amplitude = 1.0, init_offset = 0.0;  // random kinds
  std::vector<double> init_values;
  std::string init_path;  // file

  TimeGrid grid;
  RefinePolicy refine;
  ResolventTolerance tol;

  bool has_forcing = false;
  double forcing_value = 0.0;
  bool has_perturbation = false;
  std::string perturbation_family = "linear";
  double perturbation_omega = 0.0;

  std::vector<std::string> checks;
  std::vector<double> check_slacks;  // parallel to checks; NaN means derived default
  double h_over_t = 0.01;
  int quotient_n = 64;
  std::vector<double> norms = {1.0, 2.0};
  int levels = 16;
  double check_lambda = 4.0;
  double check_mu = 0.01;
  double slack_rel = 1e-6;
  double smoothing_q = 2.0;

  bool has_sweep = false;
  std::string sweep_axis;
  std::vector<double> sweep_values;

  bool corrupt_trajectory = false;
  bool write_trajectory = true;
  bool write_report = true;
};

Scenario parse_scenario(const std::string& json_text, const std::string& origin);
Scenario load_scenario(const std::string& path);

std::unique_ptr<OperatorBackend> make_backend(const Scenario& sc);
GridFunction make_initial(const Scenario& sc, const Domain& dom, uint64_t seed);

// Built-in value table for a sweep axis when the config does not carry one.
std::vector<double> default_sweep_values(const std::string& axis, const Scenario& sc);

struct SweepRow {
  double value = 0.0;
  InequalityReport report;
};

struct ScenarioResult {
  std::string name;
  Trajectory trajectory;
  std::vector<InequalityReport> reports;
  std::vector<SweepRow> sweep_rows;
};

// Evolves the configured flow and runs the configured checks (or the sweep
// when run_sweep is set, which requires a sweep table).
ScenarioResult run_scenario(const Scenario& sc, bool run_sweep = false);

void write_trajectory_csv(const Trajectory& tr, const std::string& path);
void write_reports_json(const std::vector<InequalityReport>& reports, const std::string& path);
void write_sweep_csv(const std::string& axis, const std::vector<SweepRow>& rows,
                     const std::string& path);

// Reference fixtures for the `oracle` subcommand; returns pretty JSON text.
std::string oracle_fixture(const std::string& which);
std::vector<std::string> oracle_fixture_names();

}  // namespace homflow
