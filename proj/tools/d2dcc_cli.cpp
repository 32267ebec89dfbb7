// Command-line runner for bound sweeps, Monte Carlo rate experiments,
// single-scenario inspection, and the closed-form-vs-oracle cross check.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "d2dcc/channel.hpp"
#include "d2dcc/errors.hpp"
#include "d2dcc/experiments.hpp"

namespace {

// Relative outputs can be redirected with D2DCC_OUTPUT_DIR.
std::filesystem::path resolve_output(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return p;
  if (const char* dir = std::getenv("D2DCC_OUTPUT_DIR")) return std::filesystem::path(dir) / p;
  return p;
}

std::ofstream open_output(const std::string& path) {
  const auto full = resolve_output(path);
  if (full.has_parent_path()) std::filesystem::create_directories(full.parent_path());
  std::ofstream os(full);
  if (!os) throw std::invalid_argument("cannot open output file " + full.string());
  return os;
}

void add_system_flags(CLI::App* cmd, d2dcc::SystemParams& params) {
  cmd->add_option("--K", params.num_users, "number of users");
  cmd->add_option("--L", params.num_antennas, "BS antennas");
  cmd->add_option("--t", params.replication, "caching replication factor t = KM/N");
  cmd->add_option("--files", params.num_files, "library size N");
  cmd->add_option("--file-bits", params.file_size_bits, "file size F in bits");
  cmd->add_option("--pathloss-dl", params.pathloss_dl, "DL path loss exponent");
  cmd->add_option("--pathloss-d2d", params.pathloss_d2d, "D2D path loss exponent");
  cmd->add_option("--cell-radius", params.cell_radius_m, "cell radius R in meters");
  cmd->add_option("--min-distance", params.min_distance_m, "distance clamp in meters");
  cmd->add_flag("--reciprocal-d2d", params.reciprocal_d2d, "reciprocal D2D fading");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"D2D-assisted coded caching delivery simulator"};
  app.set_config("--config", "",
                 "plain-text key=value file (keys like rate-vs-radius.trials=50 or a\n"
                 "[rate-vs-radius] section); command-line flags override it");
  app.require_subcommand(1);

  // ---- bounds-sweep ----
  auto* sweep = app.add_subcommand("bounds-sweep",
                                   "closed-form MAC/quadratic extremes vs D2D subset count");
  d2dcc::BoundsSweepConfig sweep_cfg;
  std::string sweep_out = "bounds_sweep.csv";
  sweep->add_option("--t", sweep_cfg.t, "replication factor")->capture_default_str();
  sweep->add_option("--L", sweep_cfg.L, "BS antennas")->capture_default_str();
  sweep->add_flag("--oracle", sweep_cfg.with_oracle, "append exhaustive oracle columns");
  sweep->add_option("--oracle-budget", sweep_cfg.oracle_budget, "max enumerated allocations");
  sweep->add_option("--out", sweep_out, "output CSV path")->capture_default_str();

  // ---- rate-vs-radius ----
  auto* rate = app.add_subcommand("rate-vs-radius",
                                  "Monte Carlo per-user rate over a cluster-radius grid");
  d2dcc::RateVsRadiusConfig rate_cfg;
  rate_cfg.params.num_users = 3;
  rate_cfg.params.num_antennas = 2;
  rate_cfg.params.replication = 1;
  rate_cfg.params.num_files = 3;
  rate_cfg.radius_grid = {1, 2, 5, 10, 20};
  std::string rate_out = "rate_vs_radius.csv";
  double n0 = 1.0;
  add_system_flags(rate, rate_cfg.params);
  rate->add_option("--radii", rate_cfg.radius_grid, "cluster radius grid in meters");
  rate->add_option("--trials", rate_cfg.trials, "Monte Carlo trials per radius")
      ->capture_default_str();
  rate->add_option("--seed", rate_cfg.master_seed, "master seed")->capture_default_str();
  rate->add_option("--threads", rate_cfg.threads, "worker threads (0 = auto)");
  rate->add_option("--noise", n0, "noise power N0 (powers are calibrated on top)");
  bool no_exhaustive = false;
  rate->add_flag("--no-exhaustive", no_exhaustive, "skip the exhaustive-search strategy");
  rate->add_option("--out", rate_out, "output CSV path")->capture_default_str();

  // ---- single-run ----
  auto* single = app.add_subcommand("single-run", "inspect one random scenario end to end");
  d2dcc::SingleRunConfig single_cfg;
  single_cfg.params = rate_cfg.params;
  single_cfg.params.cluster_radius_m = 5.0;
  std::string single_out = "single_run.csv";
  double single_n0 = 1.0;
  add_system_flags(single, single_cfg.params);
  single->add_option("--seed", single_cfg.seed, "scenario seed")->capture_default_str();
  single->add_option("--r", single_cfg.params.cluster_radius_m, "cluster radius in meters")
      ->capture_default_str();
  single->add_option("--strategy", single_cfg.strategy,
                     "dl-only | d2d-only | heuristic | exhaustive")
      ->capture_default_str();
  single->add_option("--noise", single_n0, "noise power N0");
  single->add_option("--out", single_out, "output CSV path")->capture_default_str();

  // ---- oracle-check ----
  auto* oracle = app.add_subcommand("oracle-check",
                                    "verify closed forms against exhaustive enumeration");
  d2dcc::OracleCheckConfig oracle_cfg;
  std::string oracle_out = "oracle_check.csv";
  oracle->add_option("--max-tl", oracle_cfg.max_tl, "largest t+L to sweep")
      ->capture_default_str();
  oracle->add_option("--budget", oracle_cfg.budget, "max enumerated allocations per (t,L,i)");
  oracle->add_option("--out", oracle_out, "output CSV path")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) {
      auto os = open_output(sweep_out);
      d2dcc::run_bounds_sweep(sweep_cfg, os);
      std::cout << "wrote " << resolve_output(sweep_out).string() << '\n';
    } else if (rate->parsed()) {
      rate_cfg.include_exhaustive = !no_exhaustive;
      rate_cfg.params.cluster_radius_m =
          rate_cfg.radius_grid.empty() ? 1.0 : rate_cfg.radius_grid.front();
      rate_cfg.params = d2dcc::with_calibrated_powers(rate_cfg.params, n0);
      auto os = open_output(rate_out);
      d2dcc::run_rate_vs_radius(rate_cfg, os);
      std::cout << "wrote " << resolve_output(rate_out).string() << '\n';
    } else if (single->parsed()) {
      single_cfg.params = d2dcc::with_calibrated_powers(single_cfg.params, single_n0);
      auto os = open_output(single_out);
      d2dcc::run_single(single_cfg, std::cout, os);
      std::cout << "wrote " << resolve_output(single_out).string() << '\n';
    } else if (oracle->parsed()) {
      auto os = open_output(oracle_out);
      const bool ok = d2dcc::run_oracle_check(oracle_cfg, std::cout, os);
      std::cout << "wrote " << resolve_output(oracle_out).string() << '\n';
      if (!ok) return 4;
    }
  } catch (const d2dcc::ResourceLimitError& e) {
    std::cerr << "resource limit: " << e.what() << '\n';
    return 3;
  } catch (const d2dcc::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
