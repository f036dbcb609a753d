// Command line driver: loads scenario configs, evolves the configured flows,
// runs inequality check suites and writes trajectory/report/sweep files.
// Exit codes: 0 all gating checks pass, 1 any violation, 2 config/solver error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "homflow/scenario.hpp"

namespace fs = std::filesystem;
using namespace homflow;

namespace {

struct JobResult {
  int status = 0;  // 0 ran, 2 config/solver error
  std::string error;
  ScenarioResult result;
};

std::string pick_out_dir(const std::string& cli_out) {
  if (!cli_out.empty()) return cli_out;
  if (const char* env = std::getenv("HOMFLOW_OUT_DIR"); env != nullptr && *env != '\0')
    return env;
  return "out";
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string report_line(const std::string& scenario, const InequalityReport& r) {
  std::string line = (r.pass ? "PASS " : "FAIL ") + scenario + " " + r.name;
  for (const auto& [k, v] : r.context)
    if (k == "p" || k == "t" || k == "level") line += " " + k + "=" + v;
  line += " lhs=" + short_num(r.lhs) + " rhs=" + short_num(r.rhs) +
          " margin=" + short_num(r.margin);
  return line;
}

// Runs scenarios with at most `jobs` concurrent workers; results keep the
// input order so printed and written output is deterministic.
std::vector<JobResult> run_all(const std::vector<Scenario>& scenarios, bool sweep_mode,
                               int jobs) {
  std::vector<JobResult> results(scenarios.size());
  auto run_one = [&](size_t i) {
    JobResult jr;
    try {
      jr.result = run_scenario(scenarios[i], sweep_mode);
    } catch (const std::exception& e) {
      jr.status = 2;
      jr.error = e.what();
    }
    return jr;
  };
  if (jobs <= 1 || scenarios.size() <= 1) {
    for (size_t i = 0; i < scenarios.size(); ++i) results[i] = run_one(i);
    return results;
  }
  size_t next = 0;
  while (next < results.size()) {
    const size_t batch = std::min(static_cast<size_t>(jobs), results.size() - next);
    std::vector<std::future<JobResult>> futs;
    futs.reserve(batch);
    for (size_t k = 0; k < batch; ++k)
      futs.push_back(std::async(std::launch::async, run_one, next + k));
    for (size_t k = 0; k < batch; ++k) results[next + k] = futs[k].get();
    next += batch;
  }
  return results;
}

std::vector<Scenario> load_all(const std::vector<std::string>& paths, int seed_override) {
  std::vector<Scenario> scenarios;
  scenarios.reserve(paths.size());
  for (const std::string& path : paths) {
    Scenario sc = load_scenario(path);
    if (seed_override >= 0) sc.seed = static_cast<uint64_t>(seed_override);
    scenarios.push_back(std::move(sc));
  }
  return scenarios;
}

int finish(const std::vector<JobResult>& results) {
  bool any_error = false, any_fail = false;
  for (const JobResult& jr : results) {
    if (jr.status != 0) any_error = true;
    for (const auto& r : jr.result.reports)
      if (!r.pass) any_fail = true;
    for (const auto& row : jr.result.sweep_rows)
      if (!row.report.pass) any_fail = true;
  }
  if (any_error) return 2;
  return any_fail ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"homflow: grid flows of homogeneous order-zero accretive operators"};
  app.require_subcommand(1);

  std::vector<std::string> config_paths;
  std::string out_dir_flag;
  std::string axis;
  std::string fixture;
  bool list_fixtures = false;
  int jobs = 1;
  int seed_override = -1;

  CLI::App* cmd_run = app.add_subcommand("run", "evolve scenarios, write outputs, run checks");
  cmd_run->add_option("configs", config_paths, "scenario JSON files")->required();
  cmd_run->add_option("--out", out_dir_flag, "output directory (default: $HOMFLOW_OUT_DIR or ./out)");
  cmd_run->add_option("--jobs", jobs, "concurrent scenarios")->check(CLI::Range(1, 256));
  cmd_run->add_option("--seed", seed_override, "override scenario seeds")->check(CLI::NonNegativeNumber);

  CLI::App* cmd_check = app.add_subcommand("check", "run checks only, print one line per report");
  cmd_check->add_option("configs", config_paths, "scenario JSON files")->required();
  cmd_check->add_option("--jobs", jobs, "concurrent scenarios")->check(CLI::Range(1, 256));
  cmd_check->add_option("--seed", seed_override, "override scenario seeds")->check(CLI::NonNegativeNumber);

  CLI::App* cmd_sweep = app.add_subcommand("sweep", "rerun one check along a parameter axis");
  cmd_sweep->add_option("configs", config_paths, "scenario JSON file")->required();
  cmd_sweep->add_option("--axis", axis, "parameter axis: t, h, lambda, mu, s, omega");
  cmd_sweep->add_option("--out", out_dir_flag, "output directory (default: $HOMFLOW_OUT_DIR or ./out)");
  cmd_sweep->add_option("--seed", seed_override, "override scenario seeds")->check(CLI::NonNegativeNumber);

  CLI::App* cmd_oracle = app.add_subcommand("oracle", "print a reference fixture as JSON");
  cmd_oracle->add_option("fixture", fixture, "fixture name (see --list)");
  cmd_oracle->add_flag("--list", list_fixtures, "list fixture names");
  cmd_oracle->add_option("--out", out_dir_flag, "also write <fixture>.json here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (cmd_oracle->parsed()) {
      if (list_fixtures) {
        for (const std::string& name : oracle_fixture_names()) std::cout << name << '\n';
        return 0;
      }
      if (fixture.empty()) throw ConfigError("oracle: give a fixture name or --list");
      const std::string text = oracle_fixture(fixture);
      std::cout << text;
      if (!out_dir_flag.empty()) {
        const fs::path dir = out_dir_flag;
        fs::create_directories(dir);
        const fs::path path = dir / (fixture + ".json");
        std::ofstream out(path);
        if (!out) throw ConfigError("output: cannot open " + path.string());
        out << text;
      }
      return 0;
    }

    if (cmd_sweep->parsed()) {
      if (axis.empty())
        throw ConfigError("sweep: --axis is required (one of t, h, lambda, mu, s, omega)");
      std::vector<Scenario> scenarios = load_all(config_paths, seed_override);
      for (Scenario& sc : scenarios) {
        const std::vector<double> defaults = default_sweep_values(axis, sc);  // validates axis
        if (!sc.has_sweep || sc.sweep_axis != axis) sc.sweep_values = defaults;
        sc.sweep_axis = axis;
        sc.has_sweep = true;
      }
      const fs::path dir = pick_out_dir(out_dir_flag);
      fs::create_directories(dir);
      const std::vector<JobResult> results = run_all(scenarios, /*sweep_mode=*/true, 1);
      for (size_t i = 0; i < results.size(); ++i) {
        if (results[i].status != 0) {
          std::cerr << "error: " << scenarios[i].name << ": " << results[i].error << '\n';
          continue;
        }
        const fs::path path = dir / (scenarios[i].name + "_sweep_" + axis + ".csv");
        write_sweep_csv(axis, results[i].result.sweep_rows, path.string());
        int fails = 0;
        for (const SweepRow& row : results[i].result.sweep_rows) {
          if (!row.report.pass) ++fails;
          std::cout << (row.report.pass ? "PASS " : "FAIL ") << scenarios[i].name << " "
                    << axis << "=" << short_num(row.value) << " " << row.report.name
                    << " margin=" << short_num(row.report.margin) << '\n';
        }
        std::cout << "[" << scenarios[i].name << "] sweep over " << axis << ": "
                  << results[i].result.sweep_rows.size() << " rows, " << fails
                  << " failed; wrote " << path.string() << '\n';
      }
      return finish(results);
    }

    // run / check
    const bool writing = cmd_run->parsed();
    std::vector<Scenario> scenarios = load_all(config_paths, seed_override);
    fs::path dir;
    if (writing) {
      dir = pick_out_dir(out_dir_flag);
      fs::create_directories(dir);
    }
    const std::vector<JobResult> results = run_all(scenarios, /*sweep_mode=*/false, jobs);
    for (size_t i = 0; i < results.size(); ++i) {
      const Scenario& sc = scenarios[i];
      const JobResult& jr = results[i];
      if (jr.status != 0) {
        std::cerr << "error: " << sc.name << ": " << jr.error << '\n';
        continue;
      }
      int fails = 0;
      for (const auto& r : jr.result.reports) {
        if (!r.pass) ++fails;
        if (!writing || !r.pass) std::cout << report_line(sc.name, r) << '\n';
      }
      std::cout << "[" << sc.name << "] " << jr.result.reports.size() << " checks, " << fails
                << " failed\n";
      if (writing && sc.write_trajectory) {
        const fs::path path = dir / (sc.name + "_trajectory.csv");
        write_trajectory_csv(jr.result.trajectory, path.string());
        std::cout << "wrote " << path.string() << '\n';
      }
      if (writing && sc.write_report) {
        const fs::path path = dir / (sc.name + "_report.json");
        write_reports_json(jr.result.reports, path.string());
        std::cout << "wrote " << path.string() << '\n';
      }
    }
    return finish(results);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
