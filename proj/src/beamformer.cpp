#include "d2dcc/beamformer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "d2dcc/errors.hpp"
#include "sca_subproblem.hpp"

namespace d2dcc {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

std::vector<int> omega_of(const MulticastProblem& p, UserId user) {
  std::vector<int> ids;
  for (int i = 0; i < static_cast<int>(p.active_subsets.size()); ++i)
    if (std::binary_search(p.active_subsets[i].begin(), p.active_subsets[i].end(), user))
      ids.push_back(i);
  return ids;
}

int user_index(const MulticastProblem& p, UserId user) {
  const auto it = std::lower_bound(p.users.begin(), p.users.end(), user);
  if (it == p.users.end() || *it != user) throw std::invalid_argument("user not in serving group");
  return static_cast<int>(it - p.users.begin());
}

}  // namespace

void MulticastProblem::validate() const {
  if (active_subsets.empty()) throw std::invalid_argument("no active subsets");
  if (users.empty()) throw std::invalid_argument("empty serving group");
  if (!std::is_sorted(users.begin(), users.end()) ||
      std::adjacent_find(users.begin(), users.end()) != users.end())
    throw std::invalid_argument("serving group must be sorted and duplicate-free");
  if (channels.size() != users.size())
    throw std::invalid_argument("one channel vector per serving user required");
  const Eigen::Index L = channels.front().size();
  if (L < 1) throw std::invalid_argument("channels must have at least one antenna entry");
  for (const auto& h : channels)
    if (h.size() != L) throw std::invalid_argument("inconsistent channel dimensions");
  for (const Subset& s : active_subsets) {
    if (s.empty() || !std::is_sorted(s.begin(), s.end()))
      throw std::invalid_argument("subsets must be nonempty and sorted");
    if (!std::includes(users.begin(), users.end(), s.begin(), s.end()))
      throw std::invalid_argument("subset not contained in the serving group");
  }
  for (std::size_t i = 1; i < active_subsets.size(); ++i)
    if (active_subsets[i - 1] == active_subsets[i])
      throw std::invalid_argument("duplicate active subset");
  if (!(noise_power > 0)) throw std::invalid_argument("noise power must be positive");
  if (!(power_budget > 0)) throw std::invalid_argument("power budget must be positive");
}

ConstraintSystem build_constraints(const MulticastProblem& problem) {
  problem.validate();
  ConstraintSystem cs;
  for (UserId k : problem.users) {
    const std::vector<int> ids = omega_of(problem, k);
    if (ids.empty()) continue;  // fully served users impose no DL constraint
    if (ids.size() > 20)
      throw ResourceLimitError("2^" + std::to_string(ids.size()) +
                               " MAC inequalities exceed the enumeration guard");
    const unsigned full = 1u << ids.size();
    for (unsigned mask = 1; mask < full; ++mask) {
      MacConstraint c;
      c.user = k;
      for (std::size_t j = 0; j < ids.size(); ++j)
        if (mask & (1u << j)) c.subset_ids.push_back(ids[j]);
      cs.mac.push_back(std::move(c));
    }
    for (int id : ids) cs.sinr.push_back({k, id});
  }
  return cs;
}

std::string dump_constraints(const MulticastProblem& problem) {
  const ConstraintSystem cs = build_constraints(problem);
  std::ostringstream os;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", problem.power_budget);
  os << "problem users=" << problem.users.size() << " subsets=" << problem.active_subsets.size()
     << " power=" << buf;
  std::snprintf(buf, sizeof buf, "%.9g", problem.noise_power);
  os << " noise=" << buf << '\n';
  for (std::size_t i = 0; i < problem.active_subsets.size(); ++i)
    os << "subset " << i << ' ' << subset_to_string(problem.active_subsets[i]) << '\n';
  for (const MacConstraint& c : cs.mac) {
    os << "mac user=" << c.user << " B={";
    for (std::size_t j = 0; j < c.subset_ids.size(); ++j) {
      if (j) os << ',';
      os << c.subset_ids[j];
    }
    os << "} coeff=1/" << c.subset_ids.size() << '\n';
  }
  for (const SinrCoupling& c : cs.sinr) {
    os << "sinr user=" << c.user << " target=" << c.subset_id << " interferers={";
    bool first = true;
    const std::vector<int> mine = omega_of(problem, c.user);
    for (int i = 0; i < static_cast<int>(problem.active_subsets.size()); ++i) {
      if (std::find(mine.begin(), mine.end(), i) != mine.end()) continue;
      if (!first) os << ',';
      os << i;
      first = false;
    }
    os << "}\n";
  }
  return os.str();
}

double mac_region_symmetric_rate(std::vector<double> sinr_terms) {
  if (sinr_terms.empty()) return std::numeric_limits<double>::infinity();
  std::sort(sinr_terms.begin(), sinr_terms.end());
  double prefix = 0.0;
  double rate = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < sinr_terms.size(); ++m) {
    prefix += sinr_terms[m];
    rate = std::min(rate, std::log1p(prefix) / (kLn2 * static_cast<double>(m + 1)));
  }
  return rate;
}

std::vector<double> user_sinrs(const MulticastProblem& problem,
                               const std::vector<Eigen::VectorXcd>& beams, UserId user) {
  if (beams.size() != problem.active_subsets.size())
    throw std::invalid_argument("one beam per active subset required");
  const Eigen::VectorXcd& h = problem.channels[user_index(problem, user)];
  const std::vector<int> mine = omega_of(problem, user);
  double interference = 0.0;
  std::vector<char> is_mine(problem.active_subsets.size(), 0);
  for (int id : mine) is_mine[id] = 1;
  for (std::size_t i = 0; i < beams.size(); ++i)
    if (!is_mine[i]) interference += std::norm(h.dot(beams[i]));
  const double den = problem.noise_power + interference;
  std::vector<double> out;
  out.reserve(mine.size());
  for (int id : mine) out.push_back(std::norm(h.dot(beams[id])) / den);
  return out;
}

double mac_rate(const MulticastProblem& problem, const std::vector<Eigen::VectorXcd>& beams,
                UserId user) {
  return mac_region_symmetric_rate(user_sinrs(problem, beams, user));
}

double common_rate(const MulticastProblem& problem,
                   const std::vector<Eigen::VectorXcd>& beams) {
  double rate = std::numeric_limits<double>::infinity();
  for (UserId k : problem.users)
    if (!omega_of(problem, k).empty()) rate = std::min(rate, mac_rate(problem, beams, k));
  return rate;
}

std::vector<Eigen::VectorXcd> matched_filter_init(const MulticastProblem& problem) {
  problem.validate();
  const Eigen::Index L = problem.channels.front().size();
  const double per_beam = problem.power_budget / static_cast<double>(problem.active_subsets.size());
  std::vector<Eigen::VectorXcd> beams;
  beams.reserve(problem.active_subsets.size());
  for (const Subset& s : problem.active_subsets) {
    Eigen::VectorXcd dir = Eigen::VectorXcd::Zero(L);
    for (UserId k : s) dir += problem.channels[user_index(problem, k)];
    if (dir.norm() < 1e-14) dir = problem.channels[user_index(problem, s.front())];
    if (dir.norm() < 1e-14) dir = Eigen::VectorXcd::Ones(L);
    beams.push_back(std::sqrt(per_beam) * dir / dir.norm());
  }
  return beams;
}

namespace {

// Everything below runs in normalized units: channels scaled so the strongest
// has unit norm, noise folded into the power budget.
struct Normalized {
  MulticastProblem prob;   // channels/noise/power rewritten
  double beam_scale = 1.0; // w_original = w_normalized / beam_scale
};

Normalized normalize(const MulticastProblem& problem) {
  Normalized n;
  n.prob = problem;
  double hmax = 0.0;
  for (const auto& h : problem.channels) hmax = std::max(hmax, h.norm());
  if (!(hmax > 0)) throw std::invalid_argument("all channels are zero");
  const double c = hmax / std::sqrt(problem.noise_power);
  for (auto& h : n.prob.channels) h /= hmax;
  n.prob.noise_power = 1.0;
  n.prob.power_budget = problem.power_budget * c * c;
  n.beam_scale = c;
  return n;
}

struct GammaLayout {
  // constrained users in serving-group order with their Omega_k
  std::vector<int> user_idx;                  // index into problem.users
  std::vector<std::vector<int>> omegas;       // subset ids per constrained user
  std::vector<std::vector<int>> gamma_var;    // aligned variable indices
  int num_gammas = 0;
};

GammaLayout layout_gammas(const MulticastProblem& p) {
  GammaLayout g;
  int next = 1;
  for (int ui = 0; ui < static_cast<int>(p.users.size()); ++ui) {
    std::vector<int> ids = omega_of(p, p.users[ui]);
    if (ids.empty()) continue;
    std::vector<int> vars;
    for (std::size_t j = 0; j < ids.size(); ++j) vars.push_back(next++);
    g.user_idx.push_back(ui);
    g.omegas.push_back(std::move(ids));
    g.gamma_var.push_back(std::move(vars));
  }
  g.num_gammas = next - 1;
  return g;
}

detail::SubproblemModel build_model(const MulticastProblem& p, const GammaLayout& lay,
                                    const std::vector<Eigen::VectorXcd>& beams,
                                    const ConstraintSystem& cs) {
  const int L = static_cast<int>(p.channels.front().size());
  const int M = static_cast<int>(p.active_subsets.size());
  detail::SubproblemModel m;
  m.num_gammas = lay.num_gammas;
  m.dim_beam = 2 * L;
  m.num_blocks = M;
  m.noise = p.noise_power;
  m.power = p.power_budget;

  // quick lookup (user id, subset id) -> (constrained row, gamma var)
  std::map<std::pair<UserId, int>, std::pair<int, int>> slot;
  for (std::size_t r = 0; r < lay.user_idx.size(); ++r)
    for (std::size_t j = 0; j < lay.omegas[r].size(); ++j)
      slot[{p.users[lay.user_idx[r]], lay.omegas[r][j]}] = {static_cast<int>(r),
                                                            lay.gamma_var[r][j]};

  m.users.resize(lay.user_idx.size());
  for (std::size_t r = 0; r < lay.user_idx.size(); ++r) {
    const Eigen::VectorXcd& h = p.channels[lay.user_idx[r]];
    detail::UserQuad uq;
    uq.p.resize(2 * L);
    uq.q.resize(2 * L);
    for (int l = 0; l < L; ++l) {
      // h^H w with u = [Re w; Im w]
      uq.p[l] = h[l].real();
      uq.p[L + l] = h[l].imag();
      uq.q[l] = -h[l].imag();
      uq.q[L + l] = h[l].real();
    }
    uq.hess = 2.0 * (uq.p * uq.p.transpose() + uq.q * uq.q.transpose());
    std::vector<char> mine(M, 0);
    for (int id : lay.omegas[r]) mine[id] = 1;
    for (int b = 0; b < M; ++b)
      if (!mine[b]) uq.interferers.push_back(b);
    m.users[r] = std::move(uq);
  }

  for (const MacConstraint& c : cs.mac) {
    detail::MacRow row;
    row.coeff = 1.0 / (kLn2 * static_cast<double>(c.subset_ids.size()));
    for (int id : c.subset_ids) row.gammas.push_back(slot.at({c.user, id}).second);
    m.mac.push_back(std::move(row));
  }
  for (const SinrCoupling& c : cs.sinr) {
    const auto [urow, gvar] = slot.at({c.user, c.subset_id});
    const Eigen::VectorXcd& h = p.channels[user_index(p, c.user)];
    const std::complex<double> cbar = h.dot(beams[c.subset_id]);
    // exact SINR at the linearization point
    double interference = 0.0;
    for (int b : m.users[urow].interferers) interference += std::norm(h.dot(beams[b]));
    const double gbar = std::norm(cbar) / (p.noise_power + interference);
    detail::SinrRow row;
    row.gamma = gvar;
    row.target = c.subset_id;
    row.user = urow;
    row.beta = std::norm(cbar) / (gbar * gbar);
    Eigen::VectorXd mbar = cbar.real() * m.users[urow].p + cbar.imag() * m.users[urow].q;
    row.lin = (2.0 / gbar) * mbar;
    m.sinr.push_back(std::move(row));
  }
  return m;
}

Eigen::VectorXd pack_vars(const detail::SubproblemModel& m, const MulticastProblem& p,
                          const GammaLayout& lay, const std::vector<Eigen::VectorXcd>& beams) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m.num_vars());
  const int L = m.dim_beam / 2;
  for (int b = 0; b < m.num_blocks; ++b)
    for (int l = 0; l < L; ++l) {
      x[m.beam_offset(b) + l] = beams[b][l].real();
      x[m.beam_offset(b) + L + l] = beams[b][l].imag();
    }
  for (std::size_t r = 0; r < lay.user_idx.size(); ++r) {
    const std::vector<double> sinrs = user_sinrs(p, beams, p.users[lay.user_idx[r]]);
    for (std::size_t j = 0; j < sinrs.size(); ++j)
      x[lay.gamma_var[r][j]] = sinrs[j] * (1.0 - 1e-6);
  }
  // r strictly below the rate the shrunk gammas allow
  double rmin = std::numeric_limits<double>::infinity();
  for (const detail::MacRow& c : m.mac) {
    double s = 0.0;
    for (int g : c.gammas) s += x[g];
    rmin = std::min(rmin, c.coeff * std::log1p(s));
  }
  x[0] = rmin - std::max(1e-12, 1e-9 * std::abs(rmin));
  return x;
}

std::vector<Eigen::VectorXcd> unpack_beams(const detail::SubproblemModel& m,
                                           const Eigen::VectorXd& x) {
  const int L = m.dim_beam / 2;
  std::vector<Eigen::VectorXcd> beams(m.num_blocks, Eigen::VectorXcd(L));
  for (int b = 0; b < m.num_blocks; ++b)
    for (int l = 0; l < L; ++l)
      beams[b][l] = {x[m.beam_offset(b) + l], x[m.beam_offset(b) + L + l]};
  return beams;
}

// Pulls every needed useful-signal power away from zero so the minorant is
// informative; only fires on degenerate starts.
bool perturb_degenerate(const MulticastProblem& p, const GammaLayout& lay,
                        std::vector<Eigen::VectorXcd>& beams) {
  const double floor = 1e-12 * (1.0 + p.power_budget);
  bool changed = false;
  for (std::size_t r = 0; r < lay.user_idx.size(); ++r) {
    const Eigen::VectorXcd& h = p.channels[lay.user_idx[r]];
    for (int id : lay.omegas[r]) {
      if (std::norm(h.dot(beams[id])) >= floor * std::max(1e-300, h.squaredNorm())) continue;
      Eigen::VectorXcd dir = Eigen::VectorXcd::Zero(h.size());
      for (UserId k : p.active_subsets[id]) dir += p.channels[user_index(p, k)];
      if (dir.norm() < 1e-14) dir = h;
      beams[id] += 1e-5 * std::sqrt(p.power_budget / beams.size()) * dir / dir.norm();
      changed = true;
    }
  }
  if (changed) {
    double total = 0.0;
    for (const auto& w : beams) total += w.squaredNorm();
    if (total > p.power_budget * (1.0 - 1e-9)) {
      const double s = std::sqrt(p.power_budget * (1.0 - 1e-9) / total);
      for (auto& w : beams) w *= s;
    }
  }
  return changed;
}

}  // namespace

BeamformerSolution sca_solve(const MulticastProblem& problem, const ScaOptions& opts) {
  problem.validate();
  const Normalized norm = normalize(problem);
  const MulticastProblem& p = norm.prob;
  const GammaLayout lay = layout_gammas(p);
  if (lay.num_gammas == 0) throw std::invalid_argument("no user needs any active subset");
  const ConstraintSystem cs = build_constraints(p);

  std::vector<Eigen::VectorXcd> beams;
  if (opts.init_beams) {
    if (opts.init_beams->size() != p.active_subsets.size())
      throw std::invalid_argument("init needs one beam per active subset");
    beams = *opts.init_beams;
    for (auto& w : beams) w *= norm.beam_scale;
    double total = 0.0;
    for (const auto& w : beams) total += w.squaredNorm();
    if (!(total > 0)) throw std::invalid_argument("init beams are all zero");
    if (total > p.power_budget * (1.0 - 1e-6)) {
      const double s = std::sqrt(p.power_budget * (1.0 - 1e-6) / total);
      for (auto& w : beams) w *= s;
    }
  } else {
    beams = matched_filter_init(p);
    for (auto& w : beams) w *= std::sqrt(1.0 - 1e-6);
  }

  BeamformerSolution sol;
  sol.status = BeamformerSolution::Status::iteration_capped;
  for (int tries = 0; tries < 4 && perturb_degenerate(p, lay, beams); ++tries) {
    if (tries == 3) throw SolverError("useful-signal power stuck at zero after perturbation");
  }
  sol.trace.push_back(common_rate(p, beams));

  bool restarted = false;
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    const detail::SubproblemModel model = build_model(p, lay, beams, cs);
    Eigen::VectorXd x0 = pack_vars(model, p, lay, beams);
    // defensive shrink toward strict interior
    bool feasible = model.max_constraint(x0) < 0.0;
    for (int shrink = 0; !feasible && shrink < 50; ++shrink) {
      for (int g = 0; g < model.num_gammas; ++g) x0[1 + g] *= 1.0 - 1e-4;
      double rmin = std::numeric_limits<double>::infinity();
      for (const detail::MacRow& c : model.mac) {
        double s = 0.0;
        for (int gi : c.gammas) s += x0[gi];
        rmin = std::min(rmin, c.coeff * std::log1p(s));
      }
      x0[0] = rmin - std::max(1e-9, 1e-6 * std::abs(rmin));
      feasible = model.max_constraint(x0) < 0.0;
    }
    detail::BarrierOutcome outcome;
    if (feasible) outcome = detail::maximize_rate(model, std::move(x0));
    if (!feasible || !outcome.ok) {
      if (!restarted) {
        restarted = true;
        beams = matched_filter_init(p);
        for (auto& w : beams) w *= std::sqrt(1.0 - 1e-6);
        for (int tries = 0; tries < 4 && perturb_degenerate(p, lay, beams); ++tries) {
        }
        sol.trace.assign(1, common_rate(p, beams));
        continue;
      }
      throw SolverError("subproblem solve failed: " +
                        (feasible ? outcome.diagnostic : std::string("no interior point")));
    }
    beams = unpack_beams(model, outcome.x);
    const double now = common_rate(p, beams);
    const double prev = sol.trace.back();
    sol.trace.push_back(now);
    if (now - prev < opts.tol) {
      sol.status = BeamformerSolution::Status::converged;
      break;
    }
  }

  sol.rate = sol.trace.back();
  sol.beams = beams;
  for (auto& w : sol.beams) w /= norm.beam_scale;
  for (std::size_t r = 0; r < lay.user_idx.size(); ++r) {
    const UserId k = p.users[lay.user_idx[r]];
    const std::vector<double> sinrs = user_sinrs(p, beams, k);
    for (std::size_t j = 0; j < sinrs.size(); ++j)
      sol.gammas[{k, lay.omegas[r][j]}] = sinrs[j];
  }
  return sol;
}

}  // namespace d2dcc
