#include "sca_subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace d2dcc::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Workspace {
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  // cached (p'u_b, q'u_b) per (user, block) pair actually used
  Eigen::MatrixXd pu, qu;
};

// Evaluates every constraint; fills per-(user,block) interference projections.
// Returns max g_i.
double eval_all(const SubproblemModel& m, const Eigen::VectorXd& x, Eigen::VectorXd& g,
                Workspace* ws) {
  const int n_users = static_cast<int>(m.users.size());
  if (ws) {
    ws->pu.resize(n_users, m.num_blocks);
    ws->qu.resize(n_users, m.num_blocks);
  }
  g.resize(m.num_constraints());
  int row = 0;
  double worst = -kInf;
  for (const MacRow& c : m.mac) {
    double s = 0.0;
    for (int gi : c.gammas) s += x[gi];
    g[row] = x[0] - c.coeff * std::log1p(s);
    worst = std::max(worst, g[row]);
    ++row;
  }
  // interference projections are shared across the user's sinr rows
  std::vector<std::vector<double>> intf_quad(n_users);
  for (int uidx = 0; uidx < n_users; ++uidx) {
    const UserQuad& uq = m.users[uidx];
    intf_quad[uidx].resize(uq.interferers.size());
    for (std::size_t b = 0; b < uq.interferers.size(); ++b) {
      const int blk = uq.interferers[b];
      const auto u = x.segment(m.beam_offset(blk), m.dim_beam);
      const double pu = uq.p.dot(u);
      const double qu = uq.q.dot(u);
      if (ws) {
        ws->pu(uidx, blk) = pu;
        ws->qu(uidx, blk) = qu;
      }
      intf_quad[uidx][b] = pu * pu + qu * qu;
    }
  }
  for (const SinrRow& c : m.sinr) {
    double val = m.noise + c.beta * x[c.gamma];
    for (double qv : intf_quad[c.user]) val += qv;
    val -= c.lin.dot(x.segment(m.beam_offset(c.target), m.dim_beam));
    g[row] = val;
    worst = std::max(worst, g[row]);
    ++row;
  }
  double pow_sum = 0.0;
  for (int blk = 0; blk < m.num_blocks; ++blk)
    pow_sum += x.segment(m.beam_offset(blk), m.dim_beam).squaredNorm();
  g[row] = pow_sum - m.power;
  worst = std::max(worst, g[row]);
  ++row;
  for (int gi = 0; gi < m.num_gammas; ++gi) {
    g[row] = -x[1 + gi];
    worst = std::max(worst, g[row]);
    ++row;
  }
  return worst;
}

double barrier_value(const SubproblemModel& m, const Eigen::VectorXd& x, double tb,
                     Eigen::VectorXd& g) {
  const double worst = eval_all(m, x, g, nullptr);
  if (!(worst < 0.0) || !std::isfinite(worst)) return kInf;
  double phi = -tb * x[0];
  for (int i = 0; i < g.size(); ++i) phi -= std::log(-g[i]);
  return std::isfinite(phi) ? phi : kInf;
}

// Rank-one barrier update over a sparse support.
void add_outer(Eigen::MatrixXd& hess, const std::vector<int>& idx, const std::vector<double>& val,
               double scale) {
  const std::size_t s = idx.size();
  for (std::size_t a = 0; a < s; ++a) {
    const double va = scale * val[a];
    for (std::size_t b = 0; b < s; ++b) hess(idx[a], idx[b]) += va * val[b];
  }
}

double barrier_derivatives(const SubproblemModel& m, const Eigen::VectorXd& x, double tb,
                           Workspace& ws) {
  Eigen::VectorXd g;
  const double worst = eval_all(m, x, g, &ws);
  if (!(worst < 0.0)) return kInf;
  const int n = m.num_vars();
  ws.grad = Eigen::VectorXd::Zero(n);
  ws.hess = Eigen::MatrixXd::Zero(n, n);
  ws.grad[0] = -tb;
  double phi = -tb * x[0];
  int row = 0;
  std::vector<int> idx;
  std::vector<double> val;
  for (const MacRow& c : m.mac) {
    const double gi = g[row++];
    phi -= std::log(-gi);
    const double inv = 1.0 / (-gi);
    double s = 0.0;
    for (int v : c.gammas) s += x[v];
    const double d = -c.coeff / (1.0 + s);  // d g / d gamma
    idx.assign(1, 0);
    val.assign(1, 1.0);
    for (int v : c.gammas) {
      idx.push_back(v);
      val.push_back(d);
    }
    for (std::size_t a = 0; a < idx.size(); ++a) ws.grad[idx[a]] += inv * val[a];
    add_outer(ws.hess, idx, val, inv * inv);
    // exact hessian of the -c*ln(1+s) term
    const double h = c.coeff / ((1.0 + s) * (1.0 + s));
    for (int va : c.gammas)
      for (int vb : c.gammas) ws.hess(va, vb) += inv * h;
  }
  for (const SinrRow& c : m.sinr) {
    const double gi = g[row++];
    phi -= std::log(-gi);
    const double inv = 1.0 / (-gi);
    const UserQuad& uq = m.users[c.user];
    idx.clear();
    val.clear();
    idx.push_back(c.gamma);
    val.push_back(c.beta);
    const int toff = m.beam_offset(c.target);
    for (int d = 0; d < m.dim_beam; ++d) {
      idx.push_back(toff + d);
      val.push_back(-c.lin[d]);
    }
    for (int blk : uq.interferers) {
      const int boff = m.beam_offset(blk);
      const double pu = ws.pu(c.user, blk);
      const double qu = ws.qu(c.user, blk);
      // target block never interferes with itself (T in Omega_k)
      for (int d = 0; d < m.dim_beam; ++d) {
        idx.push_back(boff + d);
        val.push_back(2.0 * (pu * uq.p[d] + qu * uq.q[d]));
      }
    }
    for (std::size_t a = 0; a < idx.size(); ++a) ws.grad[idx[a]] += inv * val[a];
    add_outer(ws.hess, idx, val, inv * inv);
    for (int blk : uq.interferers) {
      const int boff = m.beam_offset(blk);
      ws.hess.block(boff, boff, m.dim_beam, m.dim_beam) += inv * uq.hess;
    }
  }
  {  // power
    const double gi = g[row++];
    phi -= std::log(-gi);
    const double inv = 1.0 / (-gi);
    const int u0 = m.beam_offset(0);
    const int nu = m.dim_beam * m.num_blocks;
    const auto u = x.segment(u0, nu);
    ws.grad.segment(u0, nu) += inv * 2.0 * u;
    ws.hess.block(u0, u0, nu, nu) += (inv * inv * 4.0) * (u * u.transpose());
    ws.hess.block(u0, u0, nu, nu).diagonal().array() += inv * 2.0;
  }
  for (int gidx = 0; gidx < m.num_gammas; ++gidx) {
    const double gi = g[row++];
    phi -= std::log(-gi);
    const double inv = 1.0 / (-gi);
    ws.grad[1 + gidx] += -inv;
    ws.hess(1 + gidx, 1 + gidx) += inv * inv;
  }
  return phi;
}

}  // namespace

double SubproblemModel::max_constraint(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g;
  return eval_all(*this, x, g, nullptr);
}

BarrierOutcome maximize_rate(const SubproblemModel& model, Eigen::VectorXd x0) {
  BarrierOutcome out;
  if (model.max_constraint(x0) >= 0.0) {
    out.diagnostic = "initial point not strictly feasible";
    return out;
  }
  const double m_count = model.num_constraints();
  const double gap_tol = 1e-11;
  double tb = 1.0;
  Eigen::VectorXd x = std::move(x0);
  Workspace ws;
  Eigen::VectorXd gtmp;

  for (int outer = 0; outer < 64; ++outer) {
    for (int it = 0; it < 120; ++it) {
      const double phi = barrier_derivatives(model, x, tb, ws);
      if (!std::isfinite(phi)) {
        out.diagnostic = "barrier left the domain";
        return out;
      }
      Eigen::MatrixXd H = ws.hess;
      double ridge = 0.0;
      Eigen::VectorXd step;
      for (int attempt = 0; attempt < 8; ++attempt) {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        if (ldlt.info() == Eigen::Success) {
          step = ldlt.solve(-ws.grad);
          if (step.allFinite()) break;
        }
        ridge = (ridge == 0.0) ? 1e-12 * (1.0 + H.diagonal().maxCoeff()) : ridge * 100.0;
        H = ws.hess;
        H.diagonal().array() += ridge;
        step.resize(0);
      }
      if (step.size() == 0) {
        out.diagnostic = "newton system could not be factorized";
        return out;
      }
      const double lambda2 = -ws.grad.dot(step);
      if (lambda2 / 2.0 <= 1e-12 * (1.0 + std::abs(phi))) break;
      double s = 1.0;
      bool moved = false;
      while (s > 1e-13) {
        const double phi_new = barrier_value(model, x + s * step, tb, gtmp);
        if (phi_new <= phi - 0.25 * s * lambda2) {
          x += s * step;
          moved = true;
          break;
        }
        s *= 0.5;
      }
      if (!moved) {
        if (lambda2 / 2.0 <= 1e-6 * (1.0 + std::abs(phi))) break;  // already well centered
        out.diagnostic = "line search stalled";
        return out;
      }
    }
    if (m_count / tb < gap_tol) {
      out.ok = true;
      out.x = x;
      return out;
    }
    tb *= 20.0;
  }
  out.diagnostic = "barrier parameter schedule exhausted";
  return out;
}

}  // namespace d2dcc::detail
