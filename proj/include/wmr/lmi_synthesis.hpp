#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "wmr/ts_type1.hpp"

namespace wmr {

/// One LMI of the PDC stability family.
struct LmiConstraint {
  enum class Kind { kPositivity, kRule, kCross };
  Kind kind = Kind::kRule;
  int i = 0;
  int j = 0;
  bool strict = true;
};

/// PDC stability conditions in the variables X (symmetric) and M_i = F_i X:
///   X > 0
///   -X A_i' - A_i X + M_i' B_i' + B_i M_i > 0                      for every rule i
///   -X A_i' - A_i X - X A_j' - A_j X
///       + M_j' B_i' + B_i M_j + M_i' B_j' + B_j M_i >= 0            for every pair i < j
class LmiProblem {
 public:
  LmiProblem(std::vector<Eigen::MatrixXd> A, std::vector<Eigen::MatrixXd> B);

  int states() const { return static_cast<int>(A_.front().rows()); }
  int inputs() const { return static_cast<int>(B_.front().cols()); }
  int rules() const { return static_cast<int>(A_.size()); }

  const std::vector<Eigen::MatrixXd>& A() const { return A_; }
  const std::vector<Eigen::MatrixXd>& B() const { return B_; }
  const std::vector<LmiConstraint>& constraints() const { return constraints_; }
  std::size_t size() const { return constraints_.size(); }

  /// Symmetric value of `c` at (X, M_1..M_r).
  Eigen::MatrixXd evaluate(const LmiConstraint& c, const Eigen::MatrixXd& X,
                           std::span<const Eigen::MatrixXd> M) const;

 private:
  std::vector<Eigen::MatrixXd> A_;
  std::vector<Eigen::MatrixXd> B_;
  std::vector<LmiConstraint> constraints_;
};

LmiProblem build_pdc_lmi(const TsModel& model);

struct SolverSettings {
  double tol_feas = 1e-6;
  int max_iter = 1500;
  // Spectral-norm bound on each M_i; keeps the feasible set compact.
  double gain_bound = 10.0;
};

struct PdcSynthesis {
  Eigen::MatrixXd X;
  Eigen::MatrixXd P;
  std::vector<Eigen::MatrixXd> M;
  std::vector<Eigen::MatrixXd> F;
  // Smallest eigenvalue over X and the strict constraints.
  double margin = 0.0;
  // Smallest eigenvalue over the non-strict cross constraints.
  double cross_margin = 0.0;
  int iterations = 0;
  bool used_fallback = false;

  /// Gains as fixed 2x3 matrices; requires a 3-state, 2-input, 16-rule synthesis.
  GainSet gains() const;
};

struct FeasibilityResult {
  bool feasible = false;
  double margin = 0.0;
  std::optional<PdcSynthesis> synthesis;
};

/// Maximizes the margin t with every strict constraint >= t I, every cross
/// constraint >= t I and t I <= X <= I. Feasible when t > tol_feas. Throws
/// kIllConditioned when the recovered X has condition number above 1e12.
FeasibilityResult solve_feasibility(const LmiProblem& problem, const SolverSettings& settings = {});

struct GainRecovery {
  std::vector<Eigen::MatrixXd> F;
  Eigen::MatrixXd P;
};

/// F_i = M_i X^-1 and P = X^-1 (symmetrized).
GainRecovery recover_gains(const Eigen::MatrixXd& X, std::span<const Eigen::MatrixXd> M);

struct LyapunovReport {
  bool passed = false;
  bool p_positive_definite = false;
  double p_min_eigenvalue = 0.0;
  // Largest eigenvalue of G_ii' P + P G_ii over i.
  double worst_diagonal = 0.0;
  // Largest eigenvalue of the symmetrized cross terms over i < j.
  double worst_cross = 0.0;
  // Largest eigenvalue of A_cl' P + P A_cl over the sampled weight vectors.
  double worst_sampled = 0.0;
  int samples = 0;
};

/// Checks the quadratic Lyapunov conditions for G_ij = A_i - B_i F_j.
LyapunovReport verify_lyapunov(const Eigen::MatrixXd& P, const LmiProblem& problem,
                               std::span<const Eigen::MatrixXd> F, int samples = 2000,
                               std::uint32_t seed = 7);

/// sum_i sum_j h_i h_j (A_i - B_i F_j).
Eigen::MatrixXd blended_closed_loop(const LmiProblem& problem, std::span<const Eigen::MatrixXd> F,
                                    const Eigen::VectorXd& h);

struct ClosedLoopPole {
  int i = 0;  // 0-based plant rule
  int j = 0;  // 0-based gain rule
  std::complex<double> value;
  double zeta = 0.0;  // -Re / |lambda|
};

/// Eigenvalues of every G_ij.
std::vector<ClosedLoopPole> closed_loop_poles(const LmiProblem& problem,
                                              std::span<const Eigen::MatrixXd> F);

/// CSV with header i,j,re,im,zeta (1-based indices).
void write_pole_csv(std::ostream& out, const std::vector<ClosedLoopPole>& poles);

void write_lyapunov_report(std::ostream& out, const LyapunovReport& report);

/// JSON document with X, P, margin, M_i and F_i at 9 significant digits.
void write_synthesis(std::ostream& out, const PdcSynthesis& synthesis);
PdcSynthesis read_synthesis(std::istream& in);

}  // namespace wmr
