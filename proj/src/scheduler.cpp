#include "d2dcc/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "d2dcc/errors.hpp"

namespace d2dcc {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

double link_rate(double p_d, double gain, double n0) {
  return std::log1p(p_d * gain / n0) / kLn2;
}

}  // namespace

double d2d_rate(UserId tx, const Subset& receivers, const Eigen::MatrixXd& gains, double p_d,
                double n0) {
  if (receivers.empty()) throw std::domain_error("empty receiver set");
  double rate = std::numeric_limits<double>::infinity();
  for (UserId rx : receivers) {
    if (rx == tx) throw std::domain_error("transmitter cannot receive its own message");
    rate = std::min(rate, link_rate(p_d, gains(tx - 1, rx - 1), n0));
  }
  return rate;
}

double d2d_time(const ModeAllocation& alloc, const Eigen::MatrixXd& gains,
                const SystemParams& params) {
  alloc.validate(params.replication);
  const double sub_packet =
      fragment_size_bits(params.num_users, params.replication, params.num_antennas,
                         params.file_size_bits) /
      static_cast<double>(params.replication);
  double total = 0.0;
  for (const Subset& subset : alloc.d2d_subsets) {
    for (UserId tx : subset) {
      Subset receivers;
      for (UserId rx : subset)
        if (rx != tx) receivers.push_back(rx);
      const double rate = d2d_rate(tx, receivers, gains, params.device_power, params.noise_power);
      if (!(rate > 0.0))
        throw InfeasibleTimeError("zero D2D rate from user " + std::to_string(tx) + " in subset " +
                                  subset_to_string(subset));
      total += sub_packet / rate;
    }
  }
  return total;
}

std::pair<Subset, double> approx_d2d(const std::vector<Subset>& candidates,
                                     const Eigen::MatrixXd& gains, const SystemParams& params) {
  if (candidates.empty()) throw std::domain_error("no remaining D2D candidates");
  double best_rate = -1.0;
  const Subset* best = nullptr;
  for (const Subset& subset : candidates) {
    double sum = 0.0;
    for (UserId tx : subset) {
      double weakest = std::numeric_limits<double>::infinity();
      for (UserId rx : subset)
        if (rx != tx)
          weakest = std::min(weakest, link_rate(params.device_power, gains(tx - 1, rx - 1),
                                                params.noise_power));
      sum += weakest;
    }
    const double subset_rate = sum / static_cast<double>(subset.size());
    if (subset_rate > best_rate) {  // strict: first (lexicographic) subset wins ties
      best_rate = subset_rate;
      best = &subset;
    }
  }
  const double sub_packet =
      fragment_size_bits(params.num_users, params.replication, params.num_antennas,
                         params.file_size_bits) /
      static_cast<double>(params.replication);
  const double time = best_rate > 0.0 ? sub_packet / best_rate
                                      : std::numeric_limits<double>::infinity();
  return {*best, time};
}

double approx_dl(const std::vector<Subset>& remaining, const ChannelRealization& chan,
                 const SystemParams& params) {
  if (remaining.empty()) return 0.0;
  const double load = params.bs_power /
                      (static_cast<double>(remaining.size()) * params.noise_power);
  std::vector<double> subset_gain(remaining.size());
  std::set<UserId> involved;
  for (std::size_t i = 0; i < remaining.size(); ++i) {
    double sum = 0.0;
    for (UserId j : remaining[i]) {
      sum += chan.bs_channel(j).squaredNorm();
      involved.insert(j);
    }
    subset_gain[i] = sum / static_cast<double>(remaining[i].size());
  }
  double rate = std::numeric_limits<double>::infinity();
  for (UserId k : involved) {
    std::vector<double> terms;
    for (std::size_t i = 0; i < remaining.size(); ++i)
      if (std::binary_search(remaining[i].begin(), remaining[i].end(), k))
        terms.push_back(load * subset_gain[i]);
    rate = std::min(rate, mac_region_symmetric_rate(std::move(terms)));
  }
  if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
  const double fragment = fragment_size_bits(params.num_users, params.replication,
                                             params.num_antennas, params.file_size_bits);
  return fragment / rate;
}

Subset default_serving_group(const SystemParams& params) {
  params.validate();
  if (params.num_users > params.replication + params.num_antennas)
    throw std::invalid_argument("K > t+L serves one C(K,t+L) group at a time; "
                                "use evaluate_all_groups");
  Subset all(params.num_users);
  for (int k = 0; k < params.num_users; ++k) all[k] = k + 1;
  return all;
}

namespace {

std::pair<ModeAllocation, HeuristicTrace> heuristic_select_in_group(
    const Subset& group, const ChannelRealization& chan, const SystemParams& params) {
  const int t = params.replication;
  ModeAllocation alloc{group, {}};
  HeuristicTrace trace;
  std::vector<Subset> candidates = enumerate_subsets(group, t + 1);
  const long long n_fragments =
      static_cast<long long>(t + 1) * static_cast<long long>(candidates.size());

  int iteration = 0;
  while (!candidates.empty()) {
    ++iteration;
    auto [subset, t_d2d_hat] = approx_d2d(candidates, chan.d2d_gain, params);
    // DL approximation over what remains before this candidate
    const double t_dl_hat = approx_dl(remaining_subsets(alloc, t), chan, params);
    const double fragments_left =
        static_cast<double>(n_fragments - static_cast<long long>(t + 1) * (iteration - 1));
    const bool take = t_dl_hat / fragments_left >= t_d2d_hat;
    trace.push_back({iteration, subset, t_d2d_hat, t_dl_hat, take});
    if (!take) break;
    alloc.d2d_subsets.push_back(subset);
    candidates.erase(std::find(candidates.begin(), candidates.end(), subset));
  }
  return {alloc, trace};
}

}  // namespace

std::pair<ModeAllocation, HeuristicTrace> heuristic_select(const ChannelRealization& chan,
                                                           const SystemParams& params) {
  return heuristic_select_in_group(default_serving_group(params), chan, params);
}

MulticastProblem make_problem(const ModeAllocation& alloc, int t, const ChannelRealization& chan,
                              const SystemParams& params) {
  MulticastProblem prob;
  prob.active_subsets = remaining_subsets(alloc, t);
  prob.users = alloc.universe;
  for (UserId k : alloc.universe) prob.channels.push_back(chan.bs_channel(k));
  prob.noise_power = params.noise_power;
  prob.power_budget = params.bs_power;
  return prob;
}

DeliveryOutcome evaluate(const ModeAllocation& alloc, const ChannelRealization& chan,
                         const SystemParams& params, const ScaOptions& opts) {
  DeliveryOutcome out;
  out.allocation = alloc;
  try {
    out.t_d2d = d2d_time(alloc, chan.d2d_gain, params);
  } catch (const InfeasibleTimeError&) {
    out.t_d2d = std::numeric_limits<double>::infinity();
    out.per_user_rate = 0.0;
    return out;
  }
  const std::vector<Subset> remaining = remaining_subsets(alloc, params.replication);
  if (!remaining.empty()) {
    const MulticastProblem prob = make_problem(alloc, params.replication, chan, params);
    out.dl_solution = sca_solve(prob, opts);
    out.dl_symmetric_rate = out.dl_solution.rate;
    const double fragment = fragment_size_bits(params.num_users, params.replication,
                                               params.num_antennas, params.file_size_bits);
    out.t_dl = fragment / out.dl_symmetric_rate;
  }
  out.per_user_rate = params.file_size_bits / (out.t_d2d + out.t_dl);
  return out;
}

DeliveryOutcome exhaustive_select(const ChannelRealization& chan, const SystemParams& params,
                                  const ScaOptions& opts, long long max_evals) {
  const Subset group = default_serving_group(params);
  const std::vector<Subset> all = enumerate_subsets(group, params.replication + 1);
  const int m = static_cast<int>(all.size());
  if (m >= 63 || (1LL << m) > max_evals)
    throw ResourceLimitError("exhaustive search needs 2^" + std::to_string(m) +
                             " evaluations, over the budget");
  DeliveryOutcome best;
  bool first = true;
  for (long long mask = 0; mask < (1LL << m); ++mask) {
    ModeAllocation alloc{group, {}};
    for (int j = 0; j < m; ++j)
      if (mask & (1LL << j)) alloc.d2d_subsets.push_back(all[j]);
    DeliveryOutcome outcome = evaluate(alloc, chan, params, opts);
    if (first || outcome.per_user_rate > best.per_user_rate) {
      best = std::move(outcome);
      first = false;
    }
  }
  return best;
}

MultiGroupOutcome evaluate_all_groups(const ChannelRealization& chan, const SystemParams& params,
                                      const ScaOptions& opts, long long max_groups) {
  params.validate();
  const int g = params.group_size();
  Subset all(params.num_users);
  for (int k = 0; k < params.num_users; ++k) all[k] = k + 1;
  if (binomial(params.num_users, g) > max_groups)
    throw ResourceLimitError("C(K, t+L) transmission phases exceed the group budget");
  MultiGroupOutcome out;
  for (const Subset& group : enumerate_subsets(all, g)) {
    const auto [alloc, trace] = heuristic_select_in_group(group, chan, params);
    DeliveryOutcome outcome = evaluate(alloc, chan, params, opts);
    out.total_time += outcome.t_d2d + outcome.t_dl;
    out.groups.push_back(std::move(outcome));
  }
  out.per_user_rate = params.file_size_bits / out.total_time;
  return out;
}

}  // namespace d2dcc
