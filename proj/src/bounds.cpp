#include "d2dcc/bounds.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

#include "d2dcc/errors.hpp"

namespace d2dcc {

namespace {

long long check_range(int t, int L, long long i) {
  if (t < 1) throw std::domain_error("t must be >= 1");
  if (L < 1) throw std::domain_error("L must be >= 1");
  const long long total = binomial(t + L, t + 1);
  if (i < 0 || i > total)
    throw std::domain_error("i=" + std::to_string(i) + " outside [0, " + std::to_string(total) +
                            "]");
  return total;
}

long long pow2_minus_1(long long e) {
  if (e < 0) throw std::domain_error("negative exponent in 2^e - 1");
  if (e >= 63) throw std::overflow_error("2^e - 1 overflows 64 bits");
  return (1LL << e) - 1;
}

}  // namespace

BoundsIntermediates bounds_intermediates(int t, int L, long long i) {
  const long long total = check_range(t, L, i);
  const int n = t + L;
  BoundsIntermediates v;
  v.m_total = total - i;
  const long long fragments = static_cast<long long>(t + 1) * v.m_total;
  v.a = fragments / n;
  v.b = fragments - v.a * n;
  if (i >= 1) {
    int u = t + 1;
    while (!(binomial(u - 1, t + 1) < i && i <= binomial(u, t + 1))) {
      if (++u > n) throw std::logic_error("no U in range");
    }
    v.u = u;
    v.x = i - binomial(u - 1, t + 1);
    int u1 = t;
    while (!(binomial(u1 - 1, t) < v.x && v.x <= binomial(u1, t))) {
      if (++u1 > n) throw std::logic_error("no U1 in range");
    }
    v.u1 = u1;
    v.y = binomial(u1, t) - v.x;
  }
  return v;
}

long long mac_min(int t, int L, long long i) {
  check_range(t, L, i);
  const BoundsIntermediates v = bounds_intermediates(t, L, i);
  const int n = t + L;
  return (n - v.b) * pow2_minus_1(v.a) + v.b * pow2_minus_1(v.a + 1);
}

long long mac_max(int t, int L, long long i) {
  check_range(t, L, i);
  const int n = t + L;
  const long long w = binomial(n - 1, t);
  if (i == 0) return n * pow2_minus_1(w);
  const BoundsIntermediates v = bounds_intermediates(t, L, i);
  const long long e2 = w - binomial(v.u - 2, t);
  const long long e3 = w - (binomial(v.u - 2, t) + binomial(v.u1 - 1, t - 1) - v.y);
  const long long e4 = w - v.x;
  return (n - v.u) * pow2_minus_1(w) + (v.u - (v.u1 + 1)) * pow2_minus_1(e2) +
         v.u1 * pow2_minus_1(e3) + pow2_minus_1(e4);
}

long long q_max(int t, int L, long long i) {
  check_range(t, L, i);
  const BoundsIntermediates v = bounds_intermediates(t, L, i);
  const int n = t + L;
  const long long a1 = v.a, a2 = v.a + 1;
  const long long b1 = v.m_total - a1 + 1, b2 = v.m_total - a2 + 1;
  return v.b * a2 * b2 + (n - v.b) * a1 * b1;
}

long long q_min(int t, int L, long long i) {
  check_range(t, L, i);
  if (i == 0) return q_max(t, L, 0);
  const BoundsIntermediates v = bounds_intermediates(t, L, i);
  const int n = t + L;
  const long long a1 = binomial(n - 1, t);
  const long long a2 = a1 - binomial(v.u - 2, t);
  const long long a3 = a2 - binomial(v.u1 - 1, t - 1) + v.y;
  const long long a4 = a1 - v.x;
  const auto bb = [&](long long a) { return v.m_total - a + 1; };
  return (n - v.u) * a1 * bb(a1) + (v.u - (v.u1 + 1)) * a2 * bb(a2) + v.u1 * a3 * bb(a3) +
         a4 * bb(a4);
}

long long mac_count(const MessageLedger& ledger) {
  long long sum = 0;
  for (const auto& [user, w] : ledger.needed) sum += pow2_minus_1(w);
  return sum;
}

long long q_count(const MessageLedger& ledger) {
  long long sum = 0;
  for (const auto& [user, w] : ledger.needed) sum += static_cast<long long>(w) * (ledger.m_total - w + 1);
  return sum;
}

OracleExtremes oracle_bounds(int t, int L, long long i, long long budget) {
  const long long total = check_range(t, L, i);
  if (binomial(static_cast<int>(total), static_cast<int>(i)) > budget)
    throw ResourceLimitError("allocation enumeration needs C(" + std::to_string(total) + "," +
                             std::to_string(i) + ") > budget " + std::to_string(budget));
  const int n = t + L;
  Subset group(n);
  for (int k = 0; k < n; ++k) group[k] = k + 1;
  const std::vector<Subset> subsets = enumerate_subsets(group, t + 1);
  // per-subset membership masks over the n users
  std::vector<unsigned> mask(subsets.size(), 0);
  for (std::size_t s = 0; s < subsets.size(); ++s)
    for (UserId k : subsets[s]) mask[s] |= 1u << (k - 1);

  const long long m_total = total - i;
  const long long w_full = binomial(n - 1, t);
  OracleExtremes ext;
  bool first = true;

  const int m = static_cast<int>(total);
  const int r = static_cast<int>(i);
  std::vector<int> idx(r);
  for (int j = 0; j < r; ++j) idx[j] = j;
  std::vector<int> in_d2d(n);
  while (true) {
    std::fill(in_d2d.begin(), in_d2d.end(), 0);
    for (int j = 0; j < r; ++j) {
      unsigned bits = mask[idx[j]];
      while (bits) {
        in_d2d[std::countr_zero(bits)] += 1;
        bits &= bits - 1;
      }
    }
    long long mac = 0, q = 0, w_sum = 0;
    for (int k = 0; k < n; ++k) {
      const long long w = w_full - in_d2d[k];
      w_sum += w;
      mac += pow2_minus_1(w);
      q += w * (m_total - w + 1);
    }
    if (w_sum != static_cast<long long>(t + 1) * m_total)
      throw std::logic_error("fragment conservation violated in oracle");
    const auto current_alloc = [&] {
      std::vector<Subset> alloc;
      for (int j = 0; j < r; ++j) alloc.push_back(subsets[idx[j]]);
      return alloc;
    };
    if (first || mac < ext.mac_min) {
      ext.mac_min = mac;
      ext.mac_min_alloc = current_alloc();
    }
    if (first || mac > ext.mac_max) {
      ext.mac_max = mac;
      ext.mac_max_alloc = current_alloc();
    }
    if (first || q < ext.q_min) {
      ext.q_min = q;
      ext.q_min_alloc = current_alloc();
    }
    if (first || q > ext.q_max) {
      ext.q_max = q;
      ext.q_max_alloc = current_alloc();
    }
    first = false;
    int j = r - 1;
    while (j >= 0 && idx[j] == m - r + j) --j;
    if (j < 0) break;
    ++idx[j];
    for (int p = j + 1; p < r; ++p) idx[p] = idx[p - 1] + 1;
  }
  return ext;
}

BoundsReport bounds_report(int t, int L, long long i, bool with_oracle, long long budget) {
  BoundsReport rep;
  rep.mac_min = mac_min(t, L, i);
  rep.mac_max = mac_max(t, L, i);
  rep.q_min = q_min(t, L, i);
  rep.q_max = q_max(t, L, i);
  rep.intermediates = bounds_intermediates(t, L, i);
  if (with_oracle) {
    const OracleExtremes ext = oracle_bounds(t, L, i, budget);
    rep.oracle_mac_min = ext.mac_min;
    rep.oracle_mac_max = ext.mac_max;
    rep.oracle_q_min = ext.q_min;
    rep.oracle_q_max = ext.q_max;
  }
  return rep;
}

}  // namespace d2dcc
