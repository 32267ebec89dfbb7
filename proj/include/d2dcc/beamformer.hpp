#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "d2dcc/combinatorics.hpp"

namespace d2dcc {

// Max-min symmetric-rate multicast design over the subsets left for the DL
// sub-phase. channels[i] belongs to users[i].
struct MulticastProblem {
  std::vector<Subset> active_subsets;        // Ω, lexicographic
  Subset users;                              // serving group S
  std::vector<Eigen::VectorXcd> channels;    // per user in S
  double noise_power = 1.0;
  double power_budget = 1.0;
  void validate() const;
};

// One rate inequality r <= (1/|B|) log2(1 + sum_{T in B} gamma^k_T).
// subset_ids index into active_subsets.
struct MacConstraint {
  UserId user = 0;
  std::vector<int> subset_ids;
};

// One SINR variable gamma^k_T with its interference set Ω \ Ω_k implied.
struct SinrCoupling {
  UserId user = 0;
  int subset_id = 0;
};

struct ConstraintSystem {
  std::vector<MacConstraint> mac;
  std::vector<SinrCoupling> sinr;
};

// Every nonempty B ⊆ Ω_k per user with Ω_k nonempty (2^{|Ω_k|}-1 rows), plus
// one SINR coupling per needed (user, subset). Users with Ω_k = ∅ are dropped.
// Throws ResourceLimitError when some |Ω_k| > 20.
ConstraintSystem build_constraints(const MulticastProblem& problem);

// Canonical one-constraint-per-line text form for regression diffing.
std::string dump_constraints(const MulticastProblem& problem);

// min over nonempty B of (1/|B|) log2(1 + sum of the |B| smallest terms):
// for a fixed size the minimizing B collects the smallest SINRs, so sorted
// prefix sums evaluate the full 2^W-1 family exactly. +inf for no terms.
double mac_region_symmetric_rate(std::vector<double> sinr_terms);

// Exact per-(user,subset) SINRs at the given beams, in Ω_k order.
std::vector<double> user_sinrs(const MulticastProblem& problem,
                               const std::vector<Eigen::VectorXcd>& beams, UserId user);
// R^k_MAC at the beams.
double mac_rate(const MulticastProblem& problem, const std::vector<Eigen::VectorXcd>& beams,
                UserId user);
// R_C: min over users with Ω_k nonempty.
double common_rate(const MulticastProblem& problem,
                   const std::vector<Eigen::VectorXcd>& beams);

// Matched-filter start: w_T along sum of member channels, power split evenly.
std::vector<Eigen::VectorXcd> matched_filter_init(const MulticastProblem& problem);

struct ScaOptions {
  double tol = 1e-5;   // bits/s/Hz improvement threshold
  int max_iters = 50;
  std::optional<std::vector<Eigen::VectorXcd>> init_beams;
};

struct BeamformerSolution {
  std::vector<Eigen::VectorXcd> beams;                   // per T in Ω
  std::map<std::pair<UserId, int>, double> gammas;       // (user, Ω index) -> SINR
  double rate = 0.0;                                     // bits/s/Hz
  std::vector<double> trace;                             // exact rate per iteration
  enum class Status { converged, iteration_capped } status = Status::converged;
};

// Successive convex approximation: each round solves a convex subproblem in
// which the useful-signal power of every SINR constraint is replaced by the
// first-order minorant of |h^H w|^2 / gamma around the previous iterate while
// interference, rate and power constraints stay exact. The returned point is
// feasible for the original problem (gammas are the exact SINRs at the beams).
BeamformerSolution sca_solve(const MulticastProblem& problem, const ScaOptions& opts = {});

}  // namespace d2dcc
