#include "d2dcc/channel.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "d2dcc/rng.hpp"

namespace d2dcc {

namespace {

Point2 uniform_disk(Rng& rng, double radius) {
  const double r = radius * std::sqrt(rng.uniform());
  const double phi = 2.0 * 3.14159265358979323846 * rng.uniform();
  return {r * std::cos(phi), r * std::sin(phi)};
}

double distance(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Fading draws for fixed positions; shared by both samplers so a scenario and
// its fixed-position twin consume the RNG identically.
void draw_fading(ChannelRealization& chan, const SystemParams& params, Rng& rng) {
  const int K = params.num_users;
  const Point2 bs{0.0, 0.0};
  chan.bs_channels.resize(K);
  for (int k = 0; k < K; ++k) {
    const double d = std::max(distance(chan.positions[k], bs), params.min_distance_m);
    const double amp = std::pow(1.0 / d, params.pathloss_dl / 2.0);
    Eigen::VectorXcd h(params.num_antennas);
    for (int l = 0; l < params.num_antennas; ++l) h(l) = amp * rng.cnormal();
    chan.bs_channels[k] = std::move(h);
  }
  chan.d2d_gain = Eigen::MatrixXd::Zero(K, K);
  for (int j = 0; j < K; ++j) {
    for (int k = 0; k < K; ++k) {
      if (j == k) continue;
      if (params.reciprocal_d2d && j > k) {
        chan.d2d_gain(j, k) = chan.d2d_gain(k, j);
        continue;
      }
      const double d = std::max(distance(chan.positions[j], chan.positions[k]),
                                params.min_distance_m);
      const double amp = std::pow(1.0 / d, params.pathloss_d2d / 2.0);
      chan.d2d_gain(j, k) = std::norm(amp * rng.cnormal());
    }
  }
}

}  // namespace

ChannelRealization sample_scenario(const SystemParams& params, std::uint64_t master_seed,
                                   std::uint64_t trial_index) {
  params.validate();
  Rng rng = Rng::for_trial(master_seed, trial_index);
  ChannelRealization chan;
  chan.master_seed = master_seed;
  chan.trial_index = trial_index;
  // Cluster center keeps the whole cluster inside the cell.
  const Point2 center = uniform_disk(rng, params.cell_radius_m - params.cluster_radius_m);
  chan.positions.resize(params.num_users);
  for (auto& pos : chan.positions) {
    const Point2 off = uniform_disk(rng, params.cluster_radius_m);
    pos = {center.x + off.x, center.y + off.y};
  }
  draw_fading(chan, params, rng);
  return chan;
}

ChannelRealization sample_channels_at(const std::vector<Point2>& positions,
                                      const SystemParams& params, std::uint64_t master_seed,
                                      std::uint64_t trial_index) {
  params.validate();
  if (static_cast<int>(positions.size()) != params.num_users)
    throw std::invalid_argument("positions count must equal K");
  Rng rng = Rng::for_trial(master_seed, trial_index);
  ChannelRealization chan;
  chan.master_seed = master_seed;
  chan.trial_index = trial_index;
  chan.positions = positions;
  draw_fading(chan, params, rng);
  return chan;
}

PowerCalibration calibrate_powers(const SystemParams& params, double d2d_ref_m) {
  if (!(d2d_ref_m > 0)) throw std::invalid_argument("reference distance must be positive");
  PowerCalibration cal;
  cal.p_d_over_n0 = std::pow(d2d_ref_m, params.pathloss_d2d);
  cal.p_bs_over_n0 = std::pow(params.cell_radius_m, params.pathloss_dl);
  return cal;
}

SystemParams with_calibrated_powers(SystemParams params, double n0, double d2d_ref_m) {
  const PowerCalibration cal = calibrate_powers(params, d2d_ref_m);
  params.noise_power = n0;
  params.device_power = cal.p_d_over_n0 * n0;
  params.bs_power = cal.p_bs_over_n0 * n0;
  return params;
}

void dump_scenario(std::ostream& os, const ChannelRealization& chan) {
  const int K = static_cast<int>(chan.positions.size());
  const int L = K > 0 ? static_cast<int>(chan.bs_channels[0].size()) : 0;
  os.precision(17);
  os << "# d2dcc scenario v1\n";
  os << "seed " << chan.master_seed << ' ' << chan.trial_index << '\n';
  os << "users " << K << " antennas " << L << '\n';
  for (int k = 0; k < K; ++k) {
    os << "user " << (k + 1) << ' ' << chan.positions[k].x << ' ' << chan.positions[k].y;
    for (int l = 0; l < L; ++l)
      os << ' ' << chan.bs_channels[k](l).real() << ' ' << chan.bs_channels[k](l).imag();
    os << '\n';
  }
  for (int j = 0; j < K; ++j)
    for (int k = 0; k < K; ++k)
      if (j != k) os << "d2d " << (j + 1) << ' ' << (k + 1) << ' ' << chan.d2d_gain(j, k) << '\n';
}

ChannelRealization load_scenario(std::istream& is) {
  ChannelRealization chan;
  std::string line;
  int K = -1, L = -1;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "seed") {
      ls >> chan.master_seed >> chan.trial_index;
    } else if (tag == "users") {
      std::string antennas_tag;
      ls >> K >> antennas_tag >> L;
      if (K <= 0 || L <= 0 || antennas_tag != "antennas")
        throw std::invalid_argument("malformed scenario header: " + line);
      chan.positions.resize(K);
      chan.bs_channels.assign(K, Eigen::VectorXcd(L));
      chan.d2d_gain = Eigen::MatrixXd::Zero(K, K);
    } else if (tag == "user") {
      if (K < 0) throw std::invalid_argument("scenario user row before header");
      int id = 0;
      ls >> id;
      if (id < 1 || id > K) throw std::invalid_argument("scenario user id out of range");
      ls >> chan.positions[id - 1].x >> chan.positions[id - 1].y;
      for (int l = 0; l < L; ++l) {
        double re = 0, im = 0;
        ls >> re >> im;
        chan.bs_channels[id - 1](l) = {re, im};
      }
      if (!ls) throw std::invalid_argument("malformed scenario user row: " + line);
    } else if (tag == "d2d") {
      if (K < 0) throw std::invalid_argument("scenario d2d row before header");
      int j = 0, k = 0;
      double g = 0;
      ls >> j >> k >> g;
      if (!ls || j < 1 || j > K || k < 1 || k > K)
        throw std::invalid_argument("malformed scenario d2d row: " + line);
      chan.d2d_gain(j - 1, k - 1) = g;
    } else {
      throw std::invalid_argument("unknown scenario row: " + line);
    }
  }
  if (K < 0) throw std::invalid_argument("scenario stream had no header");
  return chan;
}

}  // namespace d2dcc
