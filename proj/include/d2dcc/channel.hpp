#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "d2dcc/combinatorics.hpp"

namespace d2dcc {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// One random drop: geometry plus all fading draws. The BS sits at the origin.
struct ChannelRealization {
  std::vector<Point2> positions;               // size K, meters
  std::vector<Eigen::VectorXcd> bs_channels;   // h_k, length L each
  Eigen::MatrixXd d2d_gain;                    // K x K, ||h_jk||^2, diagonal 0
  std::uint64_t master_seed = 0;
  std::uint64_t trial_index = 0;

  double gain(UserId tx, UserId rx) const { return d2d_gain(tx - 1, rx - 1); }
  const Eigen::VectorXcd& bs_channel(UserId k) const { return bs_channels[k - 1]; }
};

struct PowerCalibration {
  double p_d_over_n0 = 1.0;
  double p_bs_over_n0 = 1.0;
};

// Users dropped uniformly in a cluster disk of radius r whose center is
// uniform in the disk of radius R - r around the BS, then per-link Rayleigh
// fading on top of (1/d)^(n/2) path loss. Distances are clamped below at
// params.min_distance_m.
ChannelRealization sample_scenario(const SystemParams& params, std::uint64_t master_seed,
                                   std::uint64_t trial_index = 0);

// Fading-only redraw for fixed user positions (fixtures and regression tests).
ChannelRealization sample_channels_at(const std::vector<Point2>& positions,
                                      const SystemParams& params, std::uint64_t master_seed,
                                      std::uint64_t trial_index = 0);

// Transmit powers making the mean received SNR equal one (0 dB) at the
// reference distances: d2d_ref_m between users, the cell edge for the BS.
PowerCalibration calibrate_powers(const SystemParams& params, double d2d_ref_m = 10.0);

// Convenience: params with noise_power = n0 and powers set from the calibration.
SystemParams with_calibrated_powers(SystemParams params, double n0 = 1.0,
                                    double d2d_ref_m = 10.0);

// Plain-text scenario table (positions, BS channels as re/im pairs, D2D gains).
// Round-trips exactly through load_scenario.
void dump_scenario(std::ostream& os, const ChannelRealization& chan);
ChannelRealization load_scenario(std::istream& is);

}  // namespace d2dcc
