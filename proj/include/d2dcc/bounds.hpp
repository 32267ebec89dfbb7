#pragma once

#include <optional>

#include "d2dcc/combinatorics.hpp"

namespace d2dcc {

// Intermediate quantities shared by the closed-form extremes. `a`/`b` describe
// the evenly spread fragment distribution; U/X/U1/Y describe the concentrated
// one (smallest integers satisfying the binomial sandwich inequalities).
struct BoundsIntermediates {
  long long a = 0;
  long long b = 0;
  int u = 0;
  long long x = 0;
  int u1 = 0;
  long long y = 0;
  long long m_total = 0;
};

struct BoundsReport {
  long long mac_min = 0, mac_max = 0, q_min = 0, q_max = 0;
  std::optional<long long> oracle_mac_min, oracle_mac_max, oracle_q_min, oracle_q_max;
  BoundsIntermediates intermediates;
};

// Closed-form extremes of the number of MAC inequalities / quadratic SINR
// variables in the DL beamformer design after i D2D time slots.
// All four throw std::domain_error when i is outside [0, C(t+L, t+1)].
long long mac_min(int t, int L, long long i);
long long mac_max(int t, int L, long long i);
long long q_min(int t, int L, long long i);
long long q_max(int t, int L, long long i);

BoundsIntermediates bounds_intermediates(int t, int L, long long i);

// Counts for one concrete allocation (the quantities the extremes bound).
long long mac_count(const MessageLedger& ledger);  // sum_k 2^{W_k} - 1
long long q_count(const MessageLedger& ledger);    // sum_k W_k (M_T - W_k + 1)

struct OracleExtremes {
  long long mac_min = 0, mac_max = 0, q_min = 0, q_max = 0;
  // one allocation attaining each extreme (first found in enumeration order)
  std::vector<Subset> mac_min_alloc, mac_max_alloc, q_min_alloc, q_max_alloc;
};

// Exhaustive enumeration of every allocation of exactly i distinct subsets.
// Throws ResourceLimitError when C(C(t+L,t+1), i) exceeds `budget`.
OracleExtremes oracle_bounds(int t, int L, long long i, long long budget = 10'000'000);

BoundsReport bounds_report(int t, int L, long long i, bool with_oracle,
                           long long budget = 10'000'000);

}  // namespace d2dcc
