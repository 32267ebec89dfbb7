#include "d2dcc/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <thread>
#include <tuple>

#include "d2dcc/bounds.hpp"
#include "d2dcc/errors.hpp"
#include "d2dcc/scheduler.hpp"

namespace d2dcc {

std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void run_bounds_sweep(const BoundsSweepConfig& config, std::ostream& csv) {
  const long long total = binomial(config.t + config.L, config.t + 1);
  csv << "i,mac_min,mac_max,q_min,q_max,mac_min_norm,mac_max_norm,q_min_norm,q_max_norm";
  if (config.with_oracle) csv << ",oracle_mac_min,oracle_mac_max,oracle_q_min,oracle_q_max";
  csv << '\n';
  const double mac0 = static_cast<double>(mac_min(config.t, config.L, 0));
  const double q0 = static_cast<double>(q_max(config.t, config.L, 0));
  for (long long i = 0; i <= total; ++i) {
    const long long mm = mac_min(config.t, config.L, i);
    const long long mx = mac_max(config.t, config.L, i);
    const long long qm = q_min(config.t, config.L, i);
    const long long qx = q_max(config.t, config.L, i);
    csv << i << ',' << mm << ',' << mx << ',' << qm << ',' << qx << ','
        << csv_double(mm / mac0) << ',' << csv_double(mx / mac0) << ',' << csv_double(qm / q0)
        << ',' << csv_double(qx / q0);
    if (config.with_oracle) {
      const OracleExtremes ext = oracle_bounds(config.t, config.L, i, config.oracle_budget);
      csv << ',' << ext.mac_min << ',' << ext.mac_max << ',' << ext.q_min << ',' << ext.q_max;
    }
    csv << '\n';
  }
}

namespace {

constexpr const char* kStrategies[] = {"dl-only", "d2d-only", "heuristic", "exhaustive"};

struct TrialCell {
  double rate = 0.0;
  bool failed = false;
};

TrialCell run_strategy(int strategy, const ChannelRealization& chan, const SystemParams& params,
                       long long exhaustive_budget) {
  TrialCell cell;
  try {
    switch (strategy) {
      case 0: {  // dl-only
        ModeAllocation alloc{default_serving_group(params), {}};
        cell.rate = evaluate(alloc, chan, params).per_user_rate;
        break;
      }
      case 1: {  // d2d-only
        const Subset group = default_serving_group(params);
        ModeAllocation alloc{group, enumerate_subsets(group, params.replication + 1)};
        cell.rate = evaluate(alloc, chan, params).per_user_rate;
        break;
      }
      case 2: {  // heuristic
        const auto [alloc, trace] = heuristic_select(chan, params);
        cell.rate = evaluate(alloc, chan, params).per_user_rate;
        break;
      }
      default:
        cell.rate = exhaustive_select(chan, params, {}, exhaustive_budget).per_user_rate;
    }
  } catch (const SolverError&) {
    cell.failed = true;
  } catch (const ResourceLimitError&) {
    cell.failed = true;
  }
  return cell;
}

}  // namespace

void run_rate_vs_radius(const RateVsRadiusConfig& config, std::ostream& csv) {
  if (config.trials < 1) throw std::invalid_argument("at least one trial required");
  SystemParams base = config.params;
  for (double r : config.radius_grid)
    if (!(r > 0) || r > base.cell_radius_m)
      throw std::invalid_argument("radius grid must lie in (0, R]");
  base.cluster_radius_m = config.radius_grid.empty() ? base.cluster_radius_m
                                                     : config.radius_grid.front();
  base.validate();

  const int m = static_cast<int>(
      binomial(static_cast<int>(default_serving_group(base).size()), base.replication + 1));
  const bool do_exhaustive =
      config.include_exhaustive && m < 63 && (1LL << m) <= config.exhaustive_budget;
  const int n_strategies = do_exhaustive ? 4 : 3;

  csv << "radius_m,strategy,trials,failures,mean_rate,stderr_rate\n";
  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;

  for (std::size_t ri = 0; ri < config.radius_grid.size(); ++ri) {
    SystemParams params = config.params;
    params.cluster_radius_m = config.radius_grid[ri];
    params.validate();
    std::vector<std::vector<TrialCell>> rows(config.trials,
                                             std::vector<TrialCell>(n_strategies));
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int trial = next.fetch_add(1); trial < config.trials; trial = next.fetch_add(1)) {
        const std::uint64_t stream =
            static_cast<std::uint64_t>(ri) * static_cast<std::uint64_t>(config.trials) +
            static_cast<std::uint64_t>(trial);
        const ChannelRealization chan = sample_scenario(params, config.master_seed, stream);
        for (int s = 0; s < n_strategies; ++s)
          rows[trial][s] = run_strategy(s, chan, params, config.exhaustive_budget);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(threads, config.trials); ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    // reduction in trial order keeps the output bit-stable
    for (int s = 0; s < n_strategies; ++s) {
      double sum = 0.0, sumsq = 0.0;
      int n = 0, failures = 0;
      for (int trial = 0; trial < config.trials; ++trial) {
        const TrialCell& cell = rows[trial][s];
        if (cell.failed) {
          ++failures;
          continue;
        }
        sum += cell.rate;
        sumsq += cell.rate * cell.rate;
        ++n;
      }
      const double mean = n > 0 ? sum / n : 0.0;
      double stderr_rate = 0.0;
      if (n > 1) {
        const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1));
        stderr_rate = std::sqrt(var / n);
      }
      csv << csv_double(config.radius_grid[ri]) << ',' << kStrategies[s] << ',' << n << ','
          << failures << ',' << csv_double(mean) << ',' << csv_double(stderr_rate) << '\n';
    }
  }
}

void run_single(const SingleRunConfig& config, std::ostream& report, std::ostream& csv) {
  const SystemParams& params = config.params;
  params.validate();
  const ChannelRealization chan = sample_scenario(params, config.seed, 0);
  const Subset group = default_serving_group(params);

  int strategy = -1;
  for (int s = 0; s < 4; ++s)
    if (config.strategy == kStrategies[s]) strategy = s;
  if (strategy < 0) throw std::invalid_argument("unknown strategy: " + config.strategy);

  ModeAllocation alloc{group, {}};
  HeuristicTrace trace;
  if (strategy == 1) alloc.d2d_subsets = enumerate_subsets(group, params.replication + 1);
  if (strategy == 2) std::tie(alloc, trace) = heuristic_select(chan, params);

  DeliveryOutcome outcome;
  if (strategy == 3) {
    outcome = exhaustive_select(chan, params);
    alloc = outcome.allocation;
  } else {
    outcome = evaluate(alloc, chan, params);
  }

  std::map<UserId, int> demands;  // worst case: user k requests file k
  for (UserId k : group) demands[k] = k;

  report << "scenario seed=" << config.seed << " K=" << params.num_users
         << " L=" << params.num_antennas << " t=" << params.replication
         << " r=" << csv_double(params.cluster_radius_m) << " m\n";
  report << "user positions (m):\n";
  for (UserId k : group)
    report << "  user " << k << ": (" << csv_double(chan.positions[k - 1].x) << ", "
           << csv_double(chan.positions[k - 1].y) << ")\n";

  report << "strategy: " << config.strategy << "\n";
  report << "D2D allocation (" << alloc.d2d_subsets.size() << " subsets):\n";
  const double sub_packet = fragment_size_bits(params.num_users, params.replication,
                                               params.num_antennas, params.file_size_bits) /
                            params.replication;
  for (std::size_t slot = 0; slot < alloc.d2d_subsets.size(); ++slot) {
    const Subset& subset = alloc.d2d_subsets[slot];
    report << "  slot " << (slot + 1) << " subset " << subset_to_string(subset) << ":\n";
    for (const D2dTransmission& tr : d2d_exchange(subset, demands)) {
      Subset receivers;
      for (UserId rx : subset)
        if (rx != tr.tx) receivers.push_back(rx);
      const double rate =
          d2d_rate(tr.tx, receivers, chan.d2d_gain, params.device_power, params.noise_power);
      report << "    user " << tr.tx << " sends ";
      for (std::size_t p = 0; p < tr.parts.size(); ++p) {
        if (p) report << " + ";
        report << tr.parts[p].label();
      }
      report << "  rate=" << csv_double(rate) << " time="
             << csv_double(rate > 0 ? sub_packet / rate
                                    : std::numeric_limits<double>::infinity())
             << '\n';
    }
  }

  const std::vector<Subset> remaining = remaining_subsets(alloc, params.replication);
  report << "DL sub-phase (" << remaining.size() << " messages):\n";
  for (const Subset& subset : remaining) {
    const CodedMessage msg = coded_message(subset, demands);
    report << "  " << msg.label() << " = ";
    for (std::size_t p = 0; p < msg.parts.size(); ++p) {
      if (p) report << " + ";
      report << msg.parts[p].label();
    }
    report << '\n';
  }

  std::size_t mac_count_total = 0, sinr_count = 0;
  if (!remaining.empty()) {
    const MulticastProblem prob = make_problem(alloc, params.replication, chan, params);
    const ConstraintSystem cs = build_constraints(prob);
    mac_count_total = cs.mac.size();
    sinr_count = cs.sinr.size();
    report << "DL constraints: " << mac_count_total << " MAC inequalities, " << sinr_count
           << " SINR couplings\n";
    const MessageLedger ledger = build_ledger(params.replication, params.num_antennas, alloc);
    for (const auto& [user, w] : ledger.needed)
      report << "  user " << user << " needs " << w << " messages ("
             << ((1LL << w) - 1) << " MAC rows)\n";
    report << "SCA trace (bits/s/Hz):";
    for (double r : outcome.dl_solution.trace) report << ' ' << csv_double(r);
    report << "\n  status: "
           << (outcome.dl_solution.status == BeamformerSolution::Status::converged
                   ? "converged"
                   : "iteration_capped")
           << '\n';
  } else {
    report << "DL sub-phase skipped: everything already exchanged\n";
  }
  report << "T_D2D = " << csv_double(outcome.t_d2d) << "\nT_DL  = " << csv_double(outcome.t_dl)
         << "\nDL symmetric rate = " << csv_double(outcome.dl_symmetric_rate)
         << "\nper-user rate R_U = " << csv_double(outcome.per_user_rate) << '\n';

  csv << "seed,cluster_radius_m,strategy,num_d2d_subsets,t_d2d,t_dl,dl_rate,per_user_rate,"
         "mac_constraints,sinr_couplings,sca_iterations,sca_status\n";
  const char* status = remaining.empty()
                           ? "none"
                           : (outcome.dl_solution.status == BeamformerSolution::Status::converged
                                  ? "converged"
                                  : "iteration_capped");
  csv << config.seed << ',' << csv_double(params.cluster_radius_m) << ',' << config.strategy
      << ',' << alloc.d2d_subsets.size() << ',' << csv_double(outcome.t_d2d) << ','
      << csv_double(outcome.t_dl) << ',' << csv_double(outcome.dl_symmetric_rate) << ','
      << csv_double(outcome.per_user_rate) << ',' << mac_count_total << ',' << sinr_count << ','
      << (outcome.dl_solution.trace.empty() ? 0 : outcome.dl_solution.trace.size() - 1) << ','
      << status << '\n';
}

bool run_oracle_check(const OracleCheckConfig& config, std::ostream& table, std::ostream& csv) {
  bool all_pass = true;
  csv << "t,L,i,mac_min,oracle_mac_min,oracle_mac_max,mac_max,q_min,oracle_q_min,oracle_q_max,"
         "q_max,endpoint_exact,pass\n";
  for (int n = 2; n <= config.max_tl; ++n) {
    for (int t = 1; t < n; ++t) {
      const int L = n - t;
      const long long total = binomial(n, t + 1);
      for (long long i = 0; i <= total; ++i) {
        const long long mm = mac_min(t, L, i), mx = mac_max(t, L, i);
        const long long qm = q_min(t, L, i), qx = q_max(t, L, i);
        const OracleExtremes ext = oracle_bounds(t, L, i, config.budget);
        const bool mac_ok = mm <= ext.mac_min && ext.mac_max <= mx;
        const bool q_ok = qm <= ext.q_min && ext.q_max <= qx;
        const bool endpoint =
            (i != 0 && i != total) || (mm == ext.mac_min && mx == ext.mac_max &&
                                       qm == ext.q_min && qx == ext.q_max);
        const bool pass = mac_ok && q_ok && endpoint;
        csv << t << ',' << L << ',' << i << ',' << mm << ',' << ext.mac_min << ','
            << ext.mac_max << ',' << mx << ',' << qm << ',' << ext.q_min << ',' << ext.q_max
            << ',' << qx << ',' << (endpoint ? 1 : 0) << ',' << (pass ? 1 : 0) << '\n';
        if (!pass) {
          all_pass = false;
          table << "VIOLATION t=" << t << " L=" << L << " i=" << i << ":";
          if (mm > ext.mac_min) {
            table << " mac_min " << mm << " > oracle " << ext.mac_min << " at";
            for (const Subset& s : ext.mac_min_alloc) table << ' ' << subset_to_string(s);
          }
          if (ext.mac_max > mx) {
            table << " oracle mac " << ext.mac_max << " > mac_max " << mx << " at";
            for (const Subset& s : ext.mac_max_alloc) table << ' ' << subset_to_string(s);
          }
          if (qm > ext.q_min) {
            table << " q_min " << qm << " > oracle " << ext.q_min << " at";
            for (const Subset& s : ext.q_min_alloc) table << ' ' << subset_to_string(s);
          }
          if (ext.q_max > qx) {
            table << " oracle q " << ext.q_max << " > q_max " << qx << " at";
            for (const Subset& s : ext.q_max_alloc) table << ' ' << subset_to_string(s);
          }
          if (!endpoint) table << " endpoint equality failed";
          table << '\n';
        }
      }
      table << "t=" << t << " L=" << L << ": checked i=0.." << total << '\n';
    }
  }
  table << (all_pass ? "oracle-check: PASS\n" : "oracle-check: FAIL\n");
  return all_pass;
}

}  // namespace d2dcc
