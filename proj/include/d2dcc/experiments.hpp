#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "d2dcc/combinatorics.hpp"

namespace d2dcc {

// CSV numbers: 9 significant digits, '.' decimal point.
std::string csv_double(double v);

struct BoundsSweepConfig {
  int t = 1;
  int L = 9;
  bool with_oracle = false;
  long long oracle_budget = 10'000'000;
};

// Rows i = 0..C(t+L,t+1) with the four closed forms and each normalized by
// its i=0 value; oracle columns appended on request.
void run_bounds_sweep(const BoundsSweepConfig& config, std::ostream& csv);

struct RateVsRadiusConfig {
  SystemParams params;             // cluster_radius_m is taken from the grid
  std::vector<double> radius_grid;
  int trials = 200;
  std::uint64_t master_seed = 1;
  int threads = 0;                 // 0 = hardware concurrency
  bool include_exhaustive = true;  // skipped anyway when over budget
  long long exhaustive_budget = 1 << 16;
};

// Monte Carlo per-user rate per radius and strategy
// (dl-only | d2d-only | heuristic | exhaustive); solver failures are counted
// per row, never fatal.
void run_rate_vs_radius(const RateVsRadiusConfig& config, std::ostream& csv);

struct SingleRunConfig {
  SystemParams params;
  std::uint64_t seed = 1;
  std::string strategy = "heuristic";  // dl-only | d2d-only | heuristic | exhaustive
};

// Human-readable walkthrough of one scenario plus a one-row CSV summary.
void run_single(const SingleRunConfig& config, std::ostream& report, std::ostream& csv);

struct OracleCheckConfig {
  int max_tl = 6;
  long long budget = 10'000'000;
};

// Verifies closed-form-vs-oracle bracketing and endpoint equality for every
// (t, L, i) with t+L <= max_tl. Returns true when no row is violated.
bool run_oracle_check(const OracleCheckConfig& config, std::ostream& table, std::ostream& csv);

}  // namespace d2dcc
