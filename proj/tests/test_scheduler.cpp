#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "d2dcc/errors.hpp"
#include "d2dcc/scheduler.hpp"
#include "test_support.hpp"

using namespace d2dcc;
using testsupport::make_params;

namespace {

// hand-built realization with explicit gains; BS channels all-ones scaled
ChannelRealization manual_chan(int K, int L, double gain, double bs_gain = 1.0) {
  ChannelRealization chan;
  chan.positions.assign(K, {0.0, 0.0});
  chan.bs_channels.assign(K, std::sqrt(bs_gain / (2.0 * L)) *
                                 (Eigen::VectorXcd::Ones(L) +
                                  std::complex<double>(0, 1) * Eigen::VectorXcd::Ones(L)));
  chan.d2d_gain = Eigen::MatrixXd::Constant(K, K, gain);
  chan.d2d_gain.diagonal().setZero();
  return chan;
}

}  // namespace

TEST_SUITE("scheduler") {

TEST_CASE("d2d_rate is the weakest-receiver rate") {
  Eigen::MatrixXd gains = Eigen::MatrixXd::Zero(3, 3);
  gains(0, 1) = 1.0;  // p_d * g / n0 = 1 -> 1 bit
  gains(0, 2) = 3.0;
  CHECK(d2d_rate(1, {2}, gains, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(d2d_rate(1, {2, 3}, gains, 1.0, 1.0) == doctest::Approx(1.0));  // min wins
  CHECK(d2d_rate(1, {3}, gains, 1.0, 1.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(d2d_rate(1, {}, gains, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(d2d_rate(1, {1, 2}, gains, 1.0, 1.0), std::domain_error);
}

TEST_CASE("d2d_time matches the per-transmitter accounting") {
  const SystemParams params = make_params(3, 2, 1);
  const ChannelRealization chan = testsupport::three_user_scenario(3);
  const ModeAllocation alloc{{1, 2, 3}, {{1, 2}}};
  const double fragment = params.file_size_bits / 3.0;  // t = 1: no further split
  const double r1 = d2d_rate(1, {2}, chan.d2d_gain, params.device_power, params.noise_power);
  const double r2 = d2d_rate(2, {1}, chan.d2d_gain, params.device_power, params.noise_power);
  CHECK(d2d_time(alloc, chan.d2d_gain, params) ==
        doctest::Approx(fragment / r1 + fragment / r2));

  CHECK(d2d_time({{1, 2, 3}, {}}, chan.d2d_gain, params) == 0.0);
}

TEST_CASE("d2d_time for a triplet splits fragments in t sub-packets") {
  const SystemParams params = make_params(4, 2, 2);
  const ChannelRealization chan = testsupport::four_user_scenario(2);
  const ModeAllocation alloc{{1, 2, 3, 4}, {{1, 2, 3}}};
  const double sub_packet = params.file_size_bits / 12.0;  // (F/6)/t
  double expected = 0.0;
  for (UserId tx : {1, 2, 3}) {
    Subset rx;
    for (UserId k : {1, 2, 3})
      if (k != tx) rx.push_back(k);
    expected += sub_packet /
                d2d_rate(tx, rx, chan.d2d_gain, params.device_power, params.noise_power);
  }
  CHECK(d2d_time(alloc, chan.d2d_gain, params) == doctest::Approx(expected));
}

TEST_CASE("d2d_time is additive over disjoint allocations") {
  const SystemParams params = make_params(4, 2, 2);
  const ChannelRealization chan = testsupport::four_user_scenario(5);
  const ModeAllocation both{{1, 2, 3, 4}, {{1, 2, 3}, {1, 2, 4}}};
  const ModeAllocation first{{1, 2, 3, 4}, {{1, 2, 3}}};
  const ModeAllocation second{{1, 2, 3, 4}, {{1, 2, 4}}};
  CHECK(d2d_time(both, chan.d2d_gain, params) ==
        doctest::Approx(d2d_time(first, chan.d2d_gain, params) +
                        d2d_time(second, chan.d2d_gain, params)));
}

TEST_CASE("d2d_time flags dead links") {
  SystemParams params = make_params(3, 2, 1);
  params.device_power = 0.0;
  const ChannelRealization chan = testsupport::three_user_scenario(1);
  CHECK_THROWS_AS(d2d_time({{1, 2, 3}, {{1, 2}}}, chan.d2d_gain, params), InfeasibleTimeError);
}

TEST_CASE("approx_d2d picks the best-rated subset") {
  SystemParams params = make_params(3, 2, 1);
  params.device_power = 1.0;
  params.noise_power = 1.0;
  ChannelRealization chan = manual_chan(3, 2, 1.0);

  SUBCASE("single symmetric candidate") {
    auto [subset, time] = approx_d2d({{1, 2}}, chan.d2d_gain, params);
    CHECK(subset == Subset{1, 2});
    // R̂ = 1 bit, sub-packet = (F/3)/1
    CHECK(time == doctest::Approx(params.file_size_bits / 3.0));
  }
  SUBCASE("dominating subset wins") {
    chan.d2d_gain(0, 1) = chan.d2d_gain(1, 0) = 100.0;
    auto [subset, time] = approx_d2d({{1, 2}, {1, 3}, {2, 3}}, chan.d2d_gain, params);
    CHECK(subset == Subset{1, 2});
  }
  SUBCASE("exact ties break lexicographically") {
    auto [subset, time] = approx_d2d({{1, 3}, {2, 3}}, chan.d2d_gain, params);
    CHECK(subset == Subset{1, 3});
  }
  SUBCASE("no candidates") {
    CHECK_THROWS_AS(approx_d2d({}, chan.d2d_gain, params), std::domain_error);
  }
}

TEST_CASE("uniform gain scaling can move the coarse argmax") {
  // averaging weakest-link rates is not scale-invariant: a lopsided pair
  // beats a balanced one at low SNR and loses at high SNR
  SystemParams params = make_params(4, 1, 1);
  params.noise_power = 1.0;
  ChannelRealization chan = manual_chan(4, 1, 0.0);
  chan.d2d_gain(0, 1) = 100.0;
  chan.d2d_gain(1, 0) = 1.0;
  chan.d2d_gain(2, 3) = 12.0;
  chan.d2d_gain(3, 2) = 12.0;
  const std::vector<Subset> candidates{{1, 2}, {3, 4}};

  params.device_power = 1.0;
  CHECK(approx_d2d(candidates, chan.d2d_gain, params).first == Subset{1, 2});
  params.device_power = 100.0;
  CHECK(approx_d2d(candidates, chan.d2d_gain, params).first == Subset{3, 4});

  // per-link rates themselves stay order-preserved under uniform scaling
  for (double p : {0.01, 1.0, 100.0}) {
    CHECK(d2d_rate(1, {2}, chan.d2d_gain, p, 1.0) > d2d_rate(2, {1}, chan.d2d_gain, p, 1.0));
    CHECK(d2d_rate(3, {4}, chan.d2d_gain, p, 1.0) ==
          doctest::Approx(d2d_rate(4, {3}, chan.d2d_gain, p, 1.0)));
  }
}

TEST_CASE("approx_dl agrees with subset enumeration") {
  // group of four, t = 1: the farthest user needs three messages
  SystemParams params = make_params(4, 3, 1);
  const std::vector<Point2> positions{{0, 0}, {3, 0}, {0, 3}, {3, 3}};
  const ChannelRealization chan = sample_channels_at(positions, params, 77);
  const ModeAllocation alloc{{1, 2, 3, 4}, {}};
  const std::vector<Subset> remaining = remaining_subsets(alloc, params.replication);
  const double t_hat = approx_dl(remaining, chan, params);

  // independent oracle: enumerate every nonempty B per user
  const double load = params.bs_power / (remaining.size() * params.noise_power);
  double worst = std::numeric_limits<double>::infinity();
  for (UserId k : alloc.universe) {
    std::vector<double> terms;
    for (const Subset& s : remaining) {
      if (!std::binary_search(s.begin(), s.end(), k)) continue;
      double avg = 0.0;
      for (UserId j : s) avg += chan.bs_channel(j).squaredNorm();
      terms.push_back(load * avg / s.size());
    }
    REQUIRE(terms.size() == 3);
    worst = std::min(worst, testsupport::mac_rate_by_enumeration(terms));
  }
  const double fragment = fragment_size_bits(4, 1, 3, params.file_size_bits);
  CHECK(t_hat == doctest::Approx(fragment / worst).epsilon(1e-12));
}

TEST_CASE("approx_dl drops served users and empty phases") {
  const SystemParams params = make_params(3, 2, 1);
  const ChannelRealization chan = testsupport::three_user_scenario(4);
  CHECK(approx_dl({}, chan, params) == 0.0);

  // user 1 fully served: only users 2 and 3 constrain the remaining subset
  const std::vector<Subset> remaining{{2, 3}};
  const double load = params.bs_power / params.noise_power;
  const double avg = (chan.bs_channel(2).squaredNorm() + chan.bs_channel(3).squaredNorm()) / 2;
  const double expected_rate = std::log2(1.0 + load * avg);
  const double fragment = params.file_size_bits / 3.0;
  CHECK(approx_dl(remaining, chan, params) == doctest::Approx(fragment / expected_rate));
}

TEST_CASE("heuristic allocates everything for co-located users") {
  SystemParams params = make_params(3, 2, 1);
  const ChannelRealization chan = manual_chan(3, 2, 1e8, 1e-4);
  const auto [alloc, trace] = heuristic_select(chan, params);
  CHECK(alloc.d2d_subsets.size() == 3);
  CHECK(trace.size() == 3);
  for (const auto& step : trace) CHECK(step.allocated);
}

TEST_CASE("heuristic allocates nothing without device power") {
  SystemParams params = make_params(3, 2, 1);
  params.device_power = 0.0;
  const ChannelRealization chan = testsupport::three_user_scenario(6);
  const auto [alloc, trace] = heuristic_select(chan, params);
  CHECK(alloc.d2d_subsets.empty());
  REQUIRE(trace.size() == 1);
  CHECK_FALSE(trace[0].allocated);
  CHECK(std::isinf(trace[0].approx_d2d_time));
}

TEST_CASE("heuristic terminates within the subset budget without duplicates") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const SystemParams params = make_params(3, 2, 1);
    const ChannelRealization chan = sample_scenario(params, 100 + seed);
    const auto [alloc, trace] = heuristic_select(chan, params);
    CHECK(trace.size() <= 3);
    CHECK(alloc.d2d_subsets.size() <= 3);
    CHECK_NOTHROW(alloc.validate(params.replication));  // rejects duplicates
    for (std::size_t j = 0; j + 1 < trace.size(); ++j) CHECK(trace[j].allocated);
  }
}

TEST_CASE("close pair is the typical heuristic pick in the pinned geometry") {
  const SystemParams params = make_params(3, 2, 1);
  int pair_only = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ChannelRealization chan = testsupport::three_user_scenario(seed);
    const auto [alloc, trace] = heuristic_select(chan, params);
    if (alloc.d2d_subsets == std::vector<Subset>{{1, 2}}) ++pair_only;
  }
  INFO("close-pair-only allocations: ", pair_only, " of 100");
  CHECK(pair_only >= 51);
  CHECK(pair_only == 68);  // regression value for this fixture and seed scheme
}

TEST_CASE("evaluate endpoints") {
  const SystemParams params = make_params(3, 2, 1);
  const ChannelRealization chan = testsupport::three_user_scenario(8);

  SUBCASE("dl-only baseline") {
    const DeliveryOutcome out = evaluate({{1, 2, 3}, {}}, chan, params);
    CHECK(out.t_d2d == 0.0);
    CHECK(out.t_dl > 0.0);
    CHECK(out.per_user_rate ==
          doctest::Approx(params.file_size_bits / out.t_dl));
    CHECK(out.dl_symmetric_rate ==
          doctest::Approx(params.file_size_bits / 3.0 / out.t_dl));
  }
  SUBCASE("full d2d allocation skips the DL phase") {
    const DeliveryOutcome out =
        evaluate({{1, 2, 3}, {{1, 2}, {1, 3}, {2, 3}}}, chan, params);
    CHECK(out.t_dl == 0.0);
    CHECK(out.dl_symmetric_rate == 0.0);
    CHECK(out.per_user_rate == doctest::Approx(params.file_size_bits / out.t_d2d));
  }
  SUBCASE("mixed allocation assembles both phases") {
    const DeliveryOutcome out = evaluate({{1, 2, 3}, {{1, 2}}}, chan, params);
    const double t_d2d = d2d_time({{1, 2, 3}, {{1, 2}}}, chan.d2d_gain, params);
    CHECK(out.t_d2d == doctest::Approx(t_d2d));
    CHECK(out.t_dl ==
          doctest::Approx(params.file_size_bits / 3.0 / out.dl_symmetric_rate));
    CHECK(out.per_user_rate ==
          doctest::Approx(params.file_size_bits / (out.t_d2d + out.t_dl)));
  }
  SUBCASE("dead device power degrades to rate zero for nonempty allocations") {
    SystemParams dead = params;
    dead.device_power = 0.0;
    const DeliveryOutcome out = evaluate({{1, 2, 3}, {{1, 2}}}, chan, dead);
    CHECK(out.per_user_rate == 0.0);
    CHECK(std::isinf(out.t_d2d));
  }
}

TEST_CASE("exhaustive search dominates heuristic and the endpoints") {
  for (std::uint64_t seed : {31ull, 32ull, 33ull, 34ull, 35ull}) {
    const SystemParams params = make_params(3, 2, 1);
    const ChannelRealization chan = testsupport::three_user_scenario(seed);
    const DeliveryOutcome best = exhaustive_select(chan, params);
    const auto [alloc, trace] = heuristic_select(chan, params);
    const DeliveryOutcome heur = evaluate(alloc, chan, params);
    const DeliveryOutcome dl = evaluate({{1, 2, 3}, {}}, chan, params);
    const DeliveryOutcome d2d =
        evaluate({{1, 2, 3}, {{1, 2}, {1, 3}, {2, 3}}}, chan, params);
    CHECK(best.per_user_rate >= heur.per_user_rate - 1e-9);
    CHECK(heur.per_user_rate >=
          std::min(dl.per_user_rate, d2d.per_user_rate) - 1e-9);
  }
}

TEST_CASE("exhaustive search prefers dl-only when devices are silent") {
  SystemParams params = make_params(3, 2, 1);
  params.device_power = 0.0;
  const ChannelRealization chan = testsupport::three_user_scenario(40);
  const DeliveryOutcome best = exhaustive_select(chan, params);
  CHECK(best.allocation.d2d_subsets.empty());
  CHECK(best.per_user_rate > 0.0);
}

TEST_CASE("exhaustive search budget guard") {
  const SystemParams params = make_params(3, 2, 1);
  const ChannelRealization chan = testsupport::three_user_scenario(41);
  CHECK_THROWS_AS(exhaustive_select(chan, params, {}, 4), ResourceLimitError);
}

TEST_CASE("exhaustive search needs exactly 2^C(t+L,t+1) evaluations") {
  // three users, three pairs: 8 allocations fit a budget of 8 but not 7
  const SystemParams p3 = make_params(3, 2, 1);
  const ChannelRealization c3 = testsupport::three_user_scenario(42);
  CHECK_NOTHROW(exhaustive_select(c3, p3, {}, 8));
  CHECK_THROWS_AS(exhaustive_select(c3, p3, {}, 7), ResourceLimitError);

  // four users, four triplets: 16 allocations
  const SystemParams p4 = make_params(4, 2, 2);
  const ChannelRealization c4 = testsupport::four_user_scenario(42);
  CHECK_NOTHROW(exhaustive_select(c4, p4, {}, 16));
  CHECK_THROWS_AS(exhaustive_select(c4, p4, {}, 15), ResourceLimitError);
}

TEST_CASE("serving group requires K within t+L for the single-group path") {
  SystemParams params = make_params(4, 2, 1);  // K=4 > t+L=3
  CHECK_THROWS_AS(default_serving_group(params), std::invalid_argument);
}

TEST_CASE("multi-group wrapper sums the per-group times") {
  SystemParams params = make_params(4, 2, 1);  // groups of size 3 out of 4 users
  params.cluster_radius_m = 3.0;
  const ChannelRealization chan = sample_scenario(params, 50);
  const MultiGroupOutcome out = evaluate_all_groups(chan, params);
  REQUIRE(out.groups.size() == 4);  // C(4,3)
  double total = 0.0;
  for (const DeliveryOutcome& g : out.groups) total += g.t_d2d + g.t_dl;
  CHECK(out.total_time == doctest::Approx(total));
  CHECK(out.per_user_rate == doctest::Approx(params.file_size_bits / total));
  CHECK_THROWS_AS(evaluate_all_groups(chan, params, {}, 2), ResourceLimitError);
}

}  // TEST_SUITE
