#pragma once

// Internal: log-barrier Newton solver for one SCA subproblem.
//
// Variables x = [r, gamma_0..gamma_{G-1}, u_0..u_{M-1}] with each beam block
// u_j in R^{2L} packing [Re(w_j); Im(w_j)]. All constraints are smooth and
// convex:
//   mac:   r - c * ln(1 + sum gammas) <= 0
//   sinr:  noise + sum_{b in intf} ((p'u_b)^2 + (q'u_b)^2) - lin'u_T + beta*gamma <= 0
//   power: sum ||u||^2 - P <= 0
//   sign:  -gamma <= 0
// The sinr row is the linearization of gamma <= |h^H w|^2 / (noise + intf).

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace d2dcc::detail {

struct MacRow {
  double coeff = 0.0;           // 1 / (|B| ln 2)
  std::vector<int> gammas;      // absolute variable indices
};

struct SinrRow {
  int gamma = -1;               // absolute variable index
  int target = -1;              // beam block of the useful signal
  Eigen::VectorXd lin;          // minorant linear term on the target block
  double beta = 0.0;            // minorant gamma coefficient
  int user = -1;                // row into `users`
};

struct UserQuad {
  Eigen::VectorXd p, q;         // |h^H w|^2 = (p'u)^2 + (q'u)^2
  Eigen::MatrixXd hess;         // 2 (p p' + q q')
  std::vector<int> interferers; // beam blocks seen as interference
};

struct SubproblemModel {
  int num_gammas = 0;
  int dim_beam = 0;             // 2L
  int num_blocks = 0;           // M
  double noise = 1.0;
  double power = 1.0;
  std::vector<MacRow> mac;
  std::vector<SinrRow> sinr;
  std::vector<UserQuad> users;

  int num_vars() const { return 1 + num_gammas + dim_beam * num_blocks; }
  int num_constraints() const {
    return static_cast<int>(mac.size() + sinr.size()) + 1 + num_gammas;
  }
  int beam_offset(int block) const { return 1 + num_gammas + block * dim_beam; }

  // Largest constraint value (strictly feasible iff < 0).
  double max_constraint(const Eigen::VectorXd& x) const;
};

struct BarrierOutcome {
  bool ok = false;
  Eigen::VectorXd x;
  std::string diagnostic;
};

// Maximizes x[0] over the constraint set starting from a strictly feasible
// point; final absolute suboptimality is below ~1e-10.
BarrierOutcome maximize_rate(const SubproblemModel& model, Eigen::VectorXd x0);

}  // namespace d2dcc::detail
