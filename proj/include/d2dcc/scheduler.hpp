#pragma once

#include <utility>
#include <vector>

#include "d2dcc/beamformer.hpp"
#include "d2dcc/channel.hpp"
#include "d2dcc/combinatorics.hpp"

namespace d2dcc {

// End-to-end accounting for one mode allocation. Times are in bits per
// (bit/s/Hz), i.e. seconds times bandwidth.
struct DeliveryOutcome {
  ModeAllocation allocation;
  double t_d2d = 0.0;
  double t_dl = 0.0;
  double dl_symmetric_rate = 0.0;   // r from the beamformer solve, 0 without a DL phase
  double per_user_rate = 0.0;       // R_U = F / (T_D2D + T_DL)
  BeamformerSolution dl_solution;   // empty when no DL phase
};

struct HeuristicIteration {
  int iteration = 0;               // i, starting at 1
  Subset chosen;                   // best remaining subset
  double approx_d2d_time = 0.0;    // T̂_D2D
  double approx_dl_time = 0.0;     // T̂_DL before this candidate
  bool allocated = false;          // whether the threshold condition held
};
using HeuristicTrace = std::vector<HeuristicIteration>;

// min over receivers of log2(1 + P_d * gain(tx,rx) / N0).
double d2d_rate(UserId tx, const Subset& receivers, const Eigen::MatrixXd& gains, double p_d,
                double n0);

// Sequential in-group exchanges: every member of every allocated subset sends
// one sub-packet batch of size C(K,t,L)/t at its own multicast rate.
// Throws InfeasibleTimeError when a link has zero rate.
double d2d_time(const ModeAllocation& alloc, const Eigen::MatrixXd& gains,
                const SystemParams& params);

// Coarse D2D rating of the candidates: the subset average of each member's
// weakest-link rate. Ties break toward the lexicographically smallest subset.
std::pair<Subset, double> approx_d2d(const std::vector<Subset>& candidates,
                                     const Eigen::MatrixXd& gains, const SystemParams& params);

// Coarse DL time: interference-free equal power loading over the remaining
// subsets with matched-filter-level channel gains; users already served
// impose no constraint. Zero when nothing remains.
double approx_dl(const std::vector<Subset>& remaining, const ChannelRealization& chan,
                 const SystemParams& params);

// Iterative mode selection: allocate the best remaining subset while the
// average DL time per fragment stays above the candidate's D2D time.
std::pair<ModeAllocation, HeuristicTrace> heuristic_select(const ChannelRealization& chan,
                                                           const SystemParams& params);

// Full evaluation of one allocation (D2D accounting plus the SCA solve for
// whatever remains). An infinite D2D time yields per_user_rate = 0.
DeliveryOutcome evaluate(const ModeAllocation& alloc, const ChannelRealization& chan,
                         const SystemParams& params, const ScaOptions& opts = {});

// All 2^{C(g,t+1)} allocations evaluated with the full solver; returns the
// per-user-rate maximizer. Throws ResourceLimitError past max_evals.
DeliveryOutcome exhaustive_select(const ChannelRealization& chan, const SystemParams& params,
                                  const ScaOptions& opts = {}, long long max_evals = 1 << 16);

// Serving group for the single-group pipeline: all K users when K = t+L.
Subset default_serving_group(const SystemParams& params);

// DL-phase problem for an allocation (noise/power/channels from the scenario).
MulticastProblem make_problem(const ModeAllocation& alloc, int t, const ChannelRealization& chan,
                              const SystemParams& params);

// K > t+L: run the single-group pipeline over every C(K, t+L) serving group
// sequentially and sum the times (guarded to small group counts).
struct MultiGroupOutcome {
  double total_time = 0.0;
  double per_user_rate = 0.0;
  std::vector<DeliveryOutcome> groups;
};
MultiGroupOutcome evaluate_all_groups(const ChannelRealization& chan, const SystemParams& params,
                                      const ScaOptions& opts = {}, long long max_groups = 64);

}  // namespace d2dcc
