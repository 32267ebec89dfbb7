#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace d2dcc {

// Deterministic RNG used for all scenario sampling. Normal variates are
// produced by an explicit Box-Muller transform over the 53-bit uniform
// output of std::mt19937_64, so a (seed, trial) pair reproduces the exact
// same bit pattern on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Independent per-trial stream: the trial index is mixed into the master
  // seed with splitmix64 so neighbouring trials are decorrelated.
  static Rng for_trial(std::uint64_t master_seed, std::uint64_t trial_index) {
    std::uint64_t z = master_seed + 0x9e3779b97f4a7c15ULL * (trial_index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  // CN(0,1): unit-variance circularly symmetric complex Gaussian.
  std::complex<double> cnormal() {
    const double re = normal();
    const double im = normal();
    return {re * 0x1.6a09e667f3bcdp-1, im * 0x1.6a09e667f3bcdp-1};  // 1/sqrt(2)
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace d2dcc
