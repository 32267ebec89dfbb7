#include "d2dcc/combinatorics.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace d2dcc {

int SystemParams::group_size() const { return std::min(replication + num_antennas, num_users); }

void SystemParams::validate() const {
  if (num_users < 2) throw std::invalid_argument("K must be >= 2");
  if (num_antennas < 1) throw std::invalid_argument("L must be >= 1");
  if (replication < 1) throw std::invalid_argument("t must be >= 1");
  if (replication >= num_users) throw std::invalid_argument("t must be < K");
  if (num_files < num_users) throw std::invalid_argument("library must hold at least K files");
  if (!(file_size_bits > 0)) throw std::invalid_argument("file size must be positive");
  if (!(noise_power > 0)) throw std::invalid_argument("noise power must be positive");
  if (bs_power < 0 || device_power < 0) throw std::invalid_argument("powers must be nonnegative");
  if (!(cell_radius_m > 0)) throw std::invalid_argument("cell radius must be positive");
  if (!(cluster_radius_m > 0) || cluster_radius_m > cell_radius_m)
    throw std::invalid_argument("cluster radius must satisfy 0 < r <= R");
  if (!(min_distance_m > 0)) throw std::invalid_argument("distance clamp must be positive");
}

void ModeAllocation::validate(int t) const {
  if (universe.empty()) throw std::invalid_argument("empty serving group");
  if (!std::is_sorted(universe.begin(), universe.end()) ||
      std::adjacent_find(universe.begin(), universe.end()) != universe.end())
    throw std::invalid_argument("serving group must be sorted and duplicate-free");
  std::set<Subset> seen;
  for (const Subset& s : d2d_subsets) {
    if (static_cast<int>(s.size()) != t + 1)
      throw std::invalid_argument("D2D subset size must be t+1");
    if (!std::is_sorted(s.begin(), s.end()))
      throw std::invalid_argument("subset members must be sorted");
    if (!std::includes(universe.begin(), universe.end(), s.begin(), s.end()))
      throw std::invalid_argument("D2D subset not contained in the serving group");
    if (!seen.insert(s).second) throw std::invalid_argument("duplicate D2D subset");
  }
  const long long total = binomial(static_cast<int>(universe.size()), t + 1);
  if (static_cast<long long>(d2d_subsets.size()) > total)
    throw std::invalid_argument("more D2D subsets than exist in the group");
}

long long binomial(int n, int k) {
  if (n < 0) throw std::domain_error("binomial with negative n");
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long result = 1;
  for (int j = 1; j <= k; ++j) {
    // multiply before dividing; the running value C(n0..,j) keeps it exact
    if (result > (std::numeric_limits<long long>::max)() / (n - k + j))
      throw std::overflow_error("binomial overflows 64 bits");
    result = result * (n - k + j) / j;
  }
  return result;
}

std::vector<Subset> enumerate_subsets(const Subset& group, int size) {
  const int n = static_cast<int>(group.size());
  if (size < 0) throw std::domain_error("negative subset size");
  if (size > n) throw std::domain_error("subset size exceeds group size");
  std::vector<Subset> out;
  std::vector<int> idx(size);
  for (int j = 0; j < size; ++j) idx[j] = j;
  while (true) {
    Subset s(size);
    for (int j = 0; j < size; ++j) s[j] = group[idx[j]];
    out.push_back(std::move(s));
    int j = size - 1;
    while (j >= 0 && idx[j] == n - size + j) --j;
    if (j < 0) break;
    ++idx[j];
    for (int m = j + 1; m < size; ++m) idx[m] = idx[m - 1] + 1;
  }
  return out;
}

static std::string file_name(int file) {
  // 1 -> A, 26 -> Z, 27 -> A1, ...
  std::string base(1, static_cast<char>('A' + (file - 1) % 26));
  if (file > 26) base += std::to_string((file - 1) / 26);
  return base;
}

std::string subset_to_string(const Subset& s) {
  std::ostringstream os;
  os << '{';
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (j) os << ',';
    os << s[j];
  }
  os << '}';
  return os.str();
}

std::string Fragment::label() const {
  std::ostringstream os;
  os << file_name(file);
  if (piece > 0) os << '^' << piece;
  os << "_{";
  for (std::size_t j = 0; j < tau.size(); ++j) {
    if (j) os << ',';
    os << tau[j];
  }
  os << '}';
  return os.str();
}

std::string CodedMessage::label() const {
  std::ostringstream os;
  os << "X_{";
  for (std::size_t j = 0; j < subset.size(); ++j) {
    if (j) os << ',';
    os << subset[j];
  }
  os << '}';
  return os.str();
}

std::vector<Fragment> placement(int K, int t, int file) {
  if (t < 1 || t >= K) throw std::invalid_argument("placement requires 1 <= t < K");
  Subset all(K);
  for (int k = 0; k < K; ++k) all[k] = k + 1;
  std::vector<Fragment> out;
  for (Subset& tau : enumerate_subsets(all, t)) out.push_back({file, std::move(tau), 0});
  return out;
}

static int demand_of(const std::map<UserId, int>& demands, UserId k) {
  auto it = demands.find(k);
  if (it == demands.end())
    throw std::invalid_argument("missing demand for user " + std::to_string(k));
  return it->second;
}

CodedMessage coded_message(const Subset& subset, const std::map<UserId, int>& demands) {
  CodedMessage msg;
  msg.subset = subset;
  for (UserId k : subset) {
    Subset tau;
    for (UserId j : subset)
      if (j != k) tau.push_back(j);
    msg.parts.push_back({demand_of(demands, k), std::move(tau), 0});
  }
  return msg;
}

std::vector<D2dTransmission> d2d_exchange(const Subset& subset,
                                          const std::map<UserId, int>& demands) {
  const int t = static_cast<int>(subset.size()) - 1;
  std::vector<D2dTransmission> out;
  for (UserId tx : subset) {
    D2dTransmission tr;
    tr.tx = tx;
    for (UserId rx : subset) {
      if (rx == tx) continue;
      Subset tau;
      int piece = 0, pos = 0;
      for (UserId j : subset) {
        if (j == rx) continue;
        ++pos;
        if (j == tx) piece = pos;  // sub-packet = tx's rank within subset \ {rx}
        tau.push_back(j);
      }
      if (t == 1) piece = 0;  // a single part is the whole fragment
      tr.parts.push_back({demand_of(demands, rx), std::move(tau), piece});
    }
    out.push_back(std::move(tr));
  }
  return out;
}

double fragment_size_bits(int K, int t, int L, double file_size_bits) {
  if (K < 2 || t < 1 || t >= K || L < 1) throw std::domain_error("invalid (K,t,L)");
  const long long denom = binomial(K, t) * binomial(K - (t + 1), L - 1);
  if (denom <= 0) throw std::domain_error("packetization C(K-(t+1),L-1) is empty");
  return file_size_bits / static_cast<double>(denom);
}

MessageLedger build_ledger(int t, int L, const ModeAllocation& alloc) {
  alloc.validate(t);
  const int g = static_cast<int>(alloc.universe.size());
  if (g > t + L) throw std::invalid_argument("serving group larger than t+L");
  if (g < t + 1) throw std::invalid_argument("serving group smaller than t+1");
  MessageLedger ledger;
  const long long total = binomial(g, t + 1);
  ledger.m_total = total - static_cast<long long>(alloc.d2d_subsets.size());
  ledger.n_fragments = static_cast<long long>(t + 1) * total;
  const long long per_user = binomial(g - 1, t);
  for (UserId k : alloc.universe) {
    int in_d2d = 0;
    for (const Subset& s : alloc.d2d_subsets)
      if (std::binary_search(s.begin(), s.end(), k)) ++in_d2d;
    ledger.needed[k] = static_cast<int>(per_user) - in_d2d;
  }
  return ledger;
}

std::vector<Subset> remaining_subsets(const ModeAllocation& alloc, int t) {
  alloc.validate(t);
  std::set<Subset> d2d(alloc.d2d_subsets.begin(), alloc.d2d_subsets.end());
  std::vector<Subset> out;
  for (Subset& s : enumerate_subsets(alloc.universe, t + 1))
    if (!d2d.count(s)) out.push_back(std::move(s));
  return out;
}

}  // namespace d2dcc
