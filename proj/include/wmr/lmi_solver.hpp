#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace wmr::lmi {

/// Symmetric affine block F(y) = constant + sum_k y[vars[k]] * coeffs[k].
/// The solver keeps every block positive definite.
struct AffineBlock {
  std::string label;
  Eigen::MatrixXd constant;
  std::vector<int> vars;
  std::vector<Eigen::MatrixXd> coeffs;

  void add_term(int var, const Eigen::MatrixXd& coeff);
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& y) const;
  Eigen::Index dim() const { return constant.rows(); }
};

struct BarrierSettings {
  double initial_weight = 1.0;
  double weight_growth = 8.0;
  // Stop once (total barrier dimension) / weight falls below this.
  double gap_tol = 1e-9;
  int max_newton = 1500;
  double newton_tol = 1e-9;
};

struct BarrierResult {
  Eigen::VectorXd y;
  double objective = 0.0;
  int newton_iterations = 0;
  int outer_iterations = 0;
  bool converged = false;
};

/// Smallest eigenvalue of the symmetric part of `m`.
double min_eigenvalue(const Eigen::MatrixXd& m);

/// Largest eigenvalue of the symmetric part of `m`.
double max_eigenvalue(const Eigen::MatrixXd& m);

/// Maximizes objective.dot(y) subject to all blocks >= 0 with a log-det
/// barrier and damped Newton steps. `start` must be strictly feasible.
/// Deterministic for identical inputs.
BarrierResult maximize(std::span<const AffineBlock> blocks, const Eigen::VectorXd& objective,
                       const Eigen::VectorXd& start, const BarrierSettings& settings = {});

}  // namespace wmr::lmi
