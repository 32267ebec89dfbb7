#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace d2dcc {

using UserId = int;  // 1-based user ids

// A user subset, kept sorted strictly increasing. Multicast groups have
// size t+1; the serving group has size min(t+L, K).
using Subset = std::vector<UserId>;

struct SystemParams {
  int num_users = 0;       // K
  int num_antennas = 0;    // L
  int replication = 0;     // t = K*M/N
  int num_files = 0;       // N (library size, >= K)
  double file_size_bits = 1.0;  // F
  double noise_power = 1.0;     // N0, linear
  double bs_power = 1.0;        // P, linear sum-power budget at the BS
  double device_power = 1.0;    // P_d, linear per-device power
  double pathloss_dl = 3.0;
  double pathloss_d2d = 2.0;
  double cell_radius_m = 100.0;
  double cluster_radius_m = 100.0;
  double min_distance_m = 1.0;  // clamp for (1/d)^(n/2) singularities
  bool reciprocal_d2d = false;  // draw one fading realization per unordered pair

  int group_size() const;  // min(t+L, K)
  void validate() const;   // throws std::invalid_argument
};

// Which (t+1)-subsets of the serving group are exchanged device-to-device.
// d2d_subsets is ordered: its order is the D2D time-slot order.
struct ModeAllocation {
  Subset universe;                  // serving group S
  std::vector<Subset> d2d_subsets;  // Ω̄
  void validate(int t) const;       // throws std::invalid_argument
};

// Per-user bookkeeping of the messages still owed by the BS.
struct MessageLedger {
  long long m_total = 0;            // messages left for the DL sub-phase
  std::map<UserId, int> needed;     // W_k for every user in the serving group
  long long n_fragments = 0;        // (t+1) * C(|S|, t+1)
};

// Symbolic subfile: file `file`, cached by the users in `tau`. `piece` is the
// D2D sub-packet index (1..t) or 0 for the undivided fragment.
struct Fragment {
  int file = 0;  // 1-based; printed as A, B, C, ...
  Subset tau;
  int piece = 0;
  std::string label() const;
  bool operator==(const Fragment&) const = default;
};

// One multicast message: XOR of one fragment per served user.
struct CodedMessage {
  Subset subset;
  std::vector<Fragment> parts;  // parts[i] is the fragment wanted by subset[i]
  std::string label() const;    // e.g. "X_{1,3}"
};

// One in-group D2D transmission: user `tx` multicasts the XOR of `parts` to
// the rest of the subset.
struct D2dTransmission {
  UserId tx = 0;
  std::vector<Fragment> parts;
};

// Exact binomial coefficient; 0 when k < 0 or k > n. Throws std::domain_error
// for n < 0 and std::overflow_error past the 64-bit range.
long long binomial(int n, int k);

// All size-`size` subsets of `group` in lexicographic order.
// Throws std::domain_error when size > |group|.
std::vector<Subset> enumerate_subsets(const Subset& group, int size);

// Symmetric placement: file split into C(K,t) subfiles, one per t-subset,
// cached by exactly the users in its index set.
std::vector<Fragment> placement(int K, int t, int file);

// XOR message for a (t+1)-subset under the given demands (user -> file).
// Throws std::invalid_argument when a member's demand is missing.
CodedMessage coded_message(const Subset& subset, const std::map<UserId, int>& demands);

// The t+1 sequential transmissions exchanging the subset's message locally:
// each member sends one XOR of sub-packets (fragments split in t pieces)
// so that every member collects its whole fragment.
std::vector<D2dTransmission> d2d_exchange(const Subset& subset,
                                          const std::map<UserId, int>& demands);

// Size in bits of one transmitted file fragment, F / (C(K,t) * C(K-(t+1), L-1)).
double fragment_size_bits(int K, int t, int L, double file_size_bits);

// W_k / M_T / N_F for an allocation. The serving group is alloc.universe;
// formulas use its size (equal to t+L on the core path).
MessageLedger build_ledger(int t, int L, const ModeAllocation& alloc);

// Ω: the (t+1)-subsets of alloc.universe not allocated to D2D, lexicographic.
std::vector<Subset> remaining_subsets(const ModeAllocation& alloc, int t);

std::string subset_to_string(const Subset& s);  // "{1,3}"

}  // namespace d2dcc
