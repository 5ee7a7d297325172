#include "wmr/lmi_solver.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "wmr/error.hpp"

namespace wmr::lmi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd sym(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// -sum log det F_k(y), or +inf outside the interior.
double barrier_value(std::span<const AffineBlock> blocks, const Eigen::VectorXd& y) {
  double value = 0.0;
  for (const auto& block : blocks) {
    const Eigen::LLT<Eigen::MatrixXd> llt(sym(block.evaluate(y)));
    if (llt.info() != Eigen::Success) return kInf;
    const auto diag = llt.matrixLLT().diagonal();
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
      if (!(diag[i] > 0.0)) return kInf;
      value -= 2.0 * std::log(diag[i]);
    }
  }
  return value;
}

}  // namespace

void AffineBlock::add_term(int var, const Eigen::MatrixXd& coeff) {
  for (std::size_t k = 0; k < vars.size(); ++k) {
    if (vars[k] == var) {
      coeffs[k] += coeff;
      return;
    }
  }
  vars.push_back(var);
  coeffs.push_back(coeff);
}

Eigen::MatrixXd AffineBlock::evaluate(const Eigen::VectorXd& y) const {
  Eigen::MatrixXd f = constant;
  for (std::size_t k = 0; k < vars.size(); ++k) f += y[vars[k]] * coeffs[k];
  return f;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_eigenvalue(const Eigen::MatrixXd& m) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

BarrierResult maximize(std::span<const AffineBlock> blocks, const Eigen::VectorXd& objective,
                       const Eigen::VectorXd& start, const BarrierSettings& settings) {
  const Eigen::Index n = start.size();
  if (objective.size() != n) {
    throw Error(ErrorCode::kInvalidSpec, "objective and start vector sizes differ");
  }
  if (!std::isfinite(barrier_value(blocks, start))) {
    throw Error(ErrorCode::kInvalidSpec, "barrier start point is not strictly feasible");
  }

  double barrier_dim = 0.0;
  for (const auto& block : blocks) barrier_dim += static_cast<double>(block.dim());

  BarrierResult result;
  result.y = start;
  double weight = settings.initial_weight;

  Eigen::VectorXd grad(n);
  Eigen::MatrixXd hess(n, n);
  std::vector<Eigen::MatrixXd> scaled;

  while (result.newton_iterations < settings.max_newton) {
    ++result.outer_iterations;
    // Centering at the current weight.
    while (result.newton_iterations < settings.max_newton) {
      ++result.newton_iterations;
      grad = -weight * objective;
      hess.setZero();
      for (const auto& block : blocks) {
        const Eigen::MatrixXd f = sym(block.evaluate(result.y));
        const Eigen::LLT<Eigen::MatrixXd> llt(f);
        const Eigen::MatrixXd finv =
            llt.solve(Eigen::MatrixXd::Identity(f.rows(), f.cols()));
        scaled.resize(block.vars.size());
        for (std::size_t a = 0; a < block.vars.size(); ++a) {
          scaled[a] = finv * block.coeffs[a];
          grad[block.vars[a]] -= scaled[a].trace();
        }
        for (std::size_t a = 0; a < block.vars.size(); ++a) {
          for (std::size_t b = a; b < block.vars.size(); ++b) {
            // tr(W_a W_b) without forming the product.
            const double h = scaled[a].cwiseProduct(scaled[b].transpose()).sum();
            hess(block.vars[a], block.vars[b]) += h;
            if (a != b) hess(block.vars[b], block.vars[a]) += h;
          }
        }
      }

      Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
      Eigen::VectorXd step = ldlt.solve(-grad);
      if (ldlt.info() != Eigen::Success || !step.allFinite()) {
        const double ridge = 1e-12 * std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
        ldlt.compute(hess + ridge * Eigen::MatrixXd::Identity(n, n));
        step = ldlt.solve(-grad);
      }
      if (!step.allFinite()) return result;

      const double decrement_sq = -grad.dot(step);
      if (decrement_sq * 0.5 <= settings.newton_tol) break;

      const double phi0 = -weight * objective.dot(result.y) + barrier_value(blocks, result.y);
      double alpha = 1.0;
      bool accepted = false;
      for (int halving = 0; halving < 60; ++halving) {
        const Eigen::VectorXd trial = result.y + alpha * step;
        const double phi = -weight * objective.dot(trial) + barrier_value(blocks, trial);
        if (std::isfinite(phi) && phi <= phi0 - 0.25 * alpha * decrement_sq) {
          result.y = trial;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;  // no further progress possible at this weight
    }

    if (barrier_dim / weight <= settings.gap_tol) {
      result.converged = true;
      break;
    }
    weight *= settings.weight_growth;
  }
  result.objective = objective.dot(result.y);
  return result;
}

}  // namespace wmr::lmi
