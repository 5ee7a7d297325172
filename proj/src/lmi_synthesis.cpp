#include "wmr/lmi_synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include "json.hpp"

#include "wmr/error.hpp"
#include "wmr/lmi_solver.hpp"

namespace wmr {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd sym(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Decision-vector layout: upper triangle of X, then each M_i row-major, then t.
struct Layout {
  int n = 0;
  int m = 0;
  int r = 0;

  int x_count() const { return n * (n + 1) / 2; }
  int x_index(int row, int col) const {
    if (row > col) std::swap(row, col);
    return row * n - row * (row - 1) / 2 + (col - row);
  }
  int m_index(int rule, int a, int b) const { return x_count() + rule * m * n + a * n + b; }
  int t_index() const { return x_count() + r * m * n; }
  int size() const { return t_index() + 1; }

  MatrixXd x_basis(int row, int col) const {
    MatrixXd e = MatrixXd::Zero(n, n);
    e(row, col) = 1.0;
    e(col, row) = 1.0;
    return e;
  }

  MatrixXd unpack_x(const VectorXd& y) const {
    MatrixXd x(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) x(a, b) = y[x_index(a, b)];
    return x;
  }

  std::vector<MatrixXd> unpack_m(const VectorXd& y) const {
    std::vector<MatrixXd> ms(r, MatrixXd(m, n));
    for (int i = 0; i < r; ++i)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < n; ++b) ms[i](a, b) = y[m_index(i, a, b)];
    return ms;
  }

  void pack(const MatrixXd& x, const std::vector<MatrixXd>& ms, double t, VectorXd& y) const {
    y.resize(size());
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) y[x_index(a, b)] = x(a, b);
    for (int i = 0; i < r; ++i)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < n; ++b) y[m_index(i, a, b)] = ms[i](a, b);
    y[t_index()] = t;
  }
};

bool nonzero(const MatrixXd& m) { return m.cwiseAbs().maxCoeff() > 0.0; }

// Barrier blocks for the margin program.
std::vector<lmi::AffineBlock> margin_blocks(const LmiProblem& problem, const Layout& layout,
                                            double gain_bound) {
  const int n = layout.n;
  const int m = layout.m;
  const MatrixXd zero_x = MatrixXd::Zero(n, n);
  std::vector<MatrixXd> zero_m(layout.r, MatrixXd::Zero(m, n));
  std::vector<lmi::AffineBlock> blocks;
  blocks.reserve(problem.size() + 1 + layout.r);

  for (const auto& c : problem.constraints()) {
    lmi::AffineBlock block;
    block.constant = MatrixXd::Zero(n, n);
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) {
        const MatrixXd coeff = problem.evaluate(c, layout.x_basis(a, b), zero_m);
        if (nonzero(coeff)) block.add_term(layout.x_index(a, b), coeff);
      }
    }
    std::vector<int> rules;
    if (c.kind == LmiConstraint::Kind::kRule) rules = {c.i};
    if (c.kind == LmiConstraint::Kind::kCross) rules = {c.i, c.j};
    for (int rule : rules) {
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < n; ++b) {
          std::vector<MatrixXd> ms = zero_m;
          ms[rule](a, b) = 1.0;
          const MatrixXd coeff = problem.evaluate(c, zero_x, ms);
          if (nonzero(coeff)) block.add_term(layout.m_index(rule, a, b), coeff);
        }
      }
    }
    block.add_term(layout.t_index(), -MatrixXd::Identity(n, n));
    switch (c.kind) {
      case LmiConstraint::Kind::kPositivity: block.label = "X"; break;
      case LmiConstraint::Kind::kRule: block.label = "rule " + std::to_string(c.i + 1); break;
      case LmiConstraint::Kind::kCross:
        block.label = "cross " + std::to_string(c.i + 1) + "," + std::to_string(c.j + 1);
        break;
    }
    blocks.push_back(std::move(block));
  }

  // X <= I fixes the scale of the homogeneous problem.
  lmi::AffineBlock upper;
  upper.label = "I - X";
  upper.constant = MatrixXd::Identity(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      upper.add_term(layout.x_index(a, b), -layout.x_basis(a, b));
    }
  }
  blocks.push_back(std::move(upper));

  // [mu I, M_i'; M_i, mu I] >= 0  <=>  ||M_i|| <= mu.
  for (int i = 0; i < layout.r; ++i) {
    lmi::AffineBlock bound;
    bound.label = "gain bound " + std::to_string(i + 1);
    bound.constant = gain_bound * MatrixXd::Identity(n + m, n + m);
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < n; ++b) {
        MatrixXd coeff = MatrixXd::Zero(n + m, n + m);
        coeff(n + a, b) = 1.0;
        coeff(b, n + a) = 1.0;
        bound.add_term(layout.m_index(i, a, b), coeff);
      }
    }
    blocks.push_back(std::move(bound));
  }
  return blocks;
}

struct Margins {
  double strict = 0.0;
  double cross = 0.0;
};

Margins evaluate_margins(const LmiProblem& problem, const MatrixXd& x,
                         const std::vector<MatrixXd>& ms) {
  Margins out{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (const auto& c : problem.constraints()) {
    const double lam = lmi::min_eigenvalue(problem.evaluate(c, x, ms));
    if (c.strict) {
      out.strict = std::min(out.strict, lam);
    } else {
      out.cross = std::min(out.cross, lam);
    }
  }
  if (!std::isfinite(out.cross)) out.cross = out.strict;
  return out;
}

// Projected subgradient ascent on the smallest constraint eigenvalue, used
// when the barrier iteration stalls short of a certificate.
void subgradient_refine(const LmiProblem& problem, const Layout& layout, double gain_bound,
                        MatrixXd& x, std::vector<MatrixXd>& ms, int iterations) {
  const auto score = [&](const MatrixXd& xx, const std::vector<MatrixXd>& mm) {
    const Margins mg = evaluate_margins(problem, xx, mm);
    return std::min(mg.strict, mg.cross);
  };
  MatrixXd best_x = x;
  std::vector<MatrixXd> best_m = ms;
  double best = score(x, ms);
  const int n = layout.n;

  for (int k = 0; k < iterations; ++k) {
    // Locate the active constraint and its minimizing eigenvector.
    const LmiConstraint* active = nullptr;
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& c : problem.constraints()) {
      const double lam = lmi::min_eigenvalue(problem.evaluate(c, x, ms));
      if (lam < lowest) {
        lowest = lam;
        active = &c;
      }
    }
    const Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(problem.evaluate(*active, x, ms)));
    const VectorXd v = es.eigenvectors().col(0);

    // d/dY of v' C(X, M) v for the linear constraint C.
    MatrixXd gx = MatrixXd::Zero(n, n);
    std::vector<MatrixXd> gm(layout.r, MatrixXd::Zero(layout.m, n));
    const MatrixXd zero_x = MatrixXd::Zero(n, n);
    std::vector<MatrixXd> zero_m(layout.r, MatrixXd::Zero(layout.m, n));
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        MatrixXd e = MatrixXd::Zero(n, n);
        e(a, b) = 1.0;
        gx(a, b) = v.dot(sym(problem.evaluate(*active, sym(e), zero_m)) * v);
      }
    }
    for (int i : {active->i, active->j}) {
      if (active->kind == LmiConstraint::Kind::kPositivity) break;
      for (int a = 0; a < layout.m; ++a) {
        for (int b = 0; b < n; ++b) {
          std::vector<MatrixXd> e = zero_m;
          e[i](a, b) = 1.0;
          gm[i](a, b) = v.dot(sym(problem.evaluate(*active, zero_x, e)) * v);
        }
      }
      if (active->kind == LmiConstraint::Kind::kRule) break;
    }
    double norm = gx.squaredNorm();
    for (const auto& g : gm) norm += g.squaredNorm();
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) break;

    const double step = 0.05 / std::sqrt(k + 1.0) / norm;
    x = sym(x + step * gx);
    for (int i = 0; i < layout.r; ++i) ms[i] += step * gm[i];

    // Project onto X <= I and ||M_i|| <= gain_bound.
    Eigen::SelfAdjointEigenSolver<MatrixXd> ex(x);
    VectorXd lam = ex.eigenvalues().cwiseMin(1.0);
    x = ex.eigenvectors() * lam.asDiagonal() * ex.eigenvectors().transpose();
    for (auto& mi : ms) {
      Eigen::JacobiSVD<MatrixXd> svd(mi, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const VectorXd s = svd.singularValues().cwiseMin(gain_bound);
      mi = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
    }

    const double now = std::min(score(x, ms), lmi::min_eigenvalue(x));
    if (now > best) {
      best = now;
      best_x = x;
      best_m = ms;
    }
  }
  x = best_x;
  ms = best_m;
}

std::string fmt9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

nlohmann::ordered_json matrix_json(const MatrixXd& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(std::stod(fmt9(m(r, c))));
    rows.push_back(row);
  }
  return rows;
}

MatrixXd json_matrix(const nlohmann::json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw Error(ErrorCode::kConfig, "synthesis file: matrix must be a non-empty array of rows");
  }
  MatrixXd m(j.size(), j[0].size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != j[0].size()) {
      throw Error(ErrorCode::kConfig, "synthesis file: ragged matrix rows");
    }
    for (std::size_t c = 0; c < j[r].size(); ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace

LmiProblem::LmiProblem(std::vector<MatrixXd> A, std::vector<MatrixXd> B)
    : A_(std::move(A)), B_(std::move(B)) {
  if (A_.empty() || A_.size() != B_.size()) {
    throw Error(ErrorCode::kInvalidSpec, "LMI problem needs one (A_i, B_i) pair per rule");
  }
  const auto n = A_.front().rows();
  const auto m = B_.front().cols();
  for (std::size_t i = 0; i < A_.size(); ++i) {
    if (A_[i].rows() != n || A_[i].cols() != n || B_[i].rows() != n || B_[i].cols() != m) {
      throw Error(ErrorCode::kInvalidSpec, "rule matrices have inconsistent shapes");
    }
  }
  const int r = rules();
  constraints_.push_back({LmiConstraint::Kind::kPositivity, 0, 0, true});
  for (int i = 0; i < r; ++i) constraints_.push_back({LmiConstraint::Kind::kRule, i, i, true});
  // Full-support product memberships overlap everywhere, so every pair is kept.
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j)
      constraints_.push_back({LmiConstraint::Kind::kCross, i, j, false});
}

MatrixXd LmiProblem::evaluate(const LmiConstraint& c, const MatrixXd& X,
                              std::span<const MatrixXd> M) const {
  switch (c.kind) {
    case LmiConstraint::Kind::kPositivity:
      return sym(X);
    case LmiConstraint::Kind::kRule: {
      const MatrixXd v = -X * A_[c.i].transpose() - A_[c.i] * X +
                         M[c.i].transpose() * B_[c.i].transpose() + B_[c.i] * M[c.i];
      return sym(v);
    }
    case LmiConstraint::Kind::kCross: {
      const auto& Ai = A_[c.i];
      const auto& Aj = A_[c.j];
      const auto& Bi = B_[c.i];
      const auto& Bj = B_[c.j];
      const MatrixXd v = -X * Ai.transpose() - Ai * X - X * Aj.transpose() - Aj * X +
                         M[c.j].transpose() * Bi.transpose() + Bi * M[c.j] +
                         M[c.i].transpose() * Bj.transpose() + Bj * M[c.i];
      return sym(v);
    }
  }
  return {};
}

LmiProblem build_pdc_lmi(const TsModel& model) {
  std::vector<MatrixXd> A;
  std::vector<MatrixXd> B;
  for (const auto& rule : model.rules) {
    A.emplace_back(rule.A);
    B.emplace_back(rule.B);
  }
  return LmiProblem(std::move(A), std::move(B));
}

GainSet PdcSynthesis::gains() const {
  if (F.size() != static_cast<std::size_t>(kRuleCount)) {
    throw Error(ErrorCode::kInvalidSpec, "synthesis does not have 16 rule gains");
  }
  GainSet out;
  out.reserve(F.size());
  for (const auto& f : F) {
    if (f.rows() != 2 || f.cols() != 3) {
      throw Error(ErrorCode::kInvalidSpec, "synthesis gains are not 2x3");
    }
    out.emplace_back(f);
  }
  return out;
}

FeasibilityResult solve_feasibility(const LmiProblem& problem, const SolverSettings& settings) {
  const Layout layout{problem.states(), problem.inputs(), problem.rules()};
  const auto blocks = margin_blocks(problem, layout, settings.gain_bound);

  // Strictly feasible start: X = I/2, M = 0, t below every block's spectrum.
  const MatrixXd x0 = 0.5 * MatrixXd::Identity(layout.n, layout.n);
  const std::vector<MatrixXd> m0(layout.r, MatrixXd::Zero(layout.m, layout.n));
  VectorXd y0;
  layout.pack(x0, m0, 0.0, y0);
  double t0 = std::numeric_limits<double>::infinity();
  for (const auto& c : problem.constraints()) {
    t0 = std::min(t0, lmi::min_eigenvalue(problem.evaluate(c, x0, m0)));
  }
  y0[layout.t_index()] = t0 - 1.0;

  VectorXd objective = VectorXd::Zero(layout.size());
  objective[layout.t_index()] = 1.0;

  lmi::BarrierSettings bs;
  bs.max_newton = settings.max_iter;
  const lmi::BarrierResult br = lmi::maximize(blocks, objective, y0, bs);

  MatrixXd x = sym(layout.unpack_x(br.y));
  std::vector<MatrixXd> ms = layout.unpack_m(br.y);
  Margins mg = evaluate_margins(problem, x, ms);
  bool fallback = false;
  if (!br.converged && std::min(mg.strict, mg.cross) < settings.tol_feas) {
    subgradient_refine(problem, layout, settings.gain_bound, x, ms, 2000);
    mg = evaluate_margins(problem, x, ms);
    fallback = true;
  }

  FeasibilityResult result;
  result.margin = mg.strict;
  result.feasible = mg.strict >= settings.tol_feas && mg.cross >= 0.0;
  if (!result.feasible) return result;

  GainRecovery rec = recover_gains(x, ms);
  PdcSynthesis syn;
  syn.X = x;
  syn.P = rec.P;
  syn.M = ms;
  syn.F = std::move(rec.F);
  syn.margin = mg.strict;
  syn.cross_margin = mg.cross;
  syn.iterations = br.newton_iterations;
  syn.used_fallback = fallback;
  result.synthesis = std::move(syn);
  return result;
}

GainRecovery recover_gains(const MatrixXd& X, std::span<const MatrixXd> M) {
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(X), Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(es.eigenvalues().size() - 1);
  if (!(lo > 0.0) || hi / lo > 1e12) {
    throw Error(ErrorCode::kIllConditioned,
                "Lyapunov variable X is singular or ill-conditioned (cond > 1e12)");
  }
  const Eigen::PartialPivLU<MatrixXd> lu(sym(X));
  GainRecovery rec;
  rec.P = sym(lu.inverse());
  rec.F.reserve(M.size());
  for (const auto& mi : M) {
    // F X = M  <=>  X F' = M' for symmetric X
    rec.F.push_back(lu.solve(mi.transpose()).transpose());
  }
  return rec;
}

MatrixXd blended_closed_loop(const LmiProblem& problem, std::span<const MatrixXd> F,
                             const VectorXd& h) {
  const int r = problem.rules();
  MatrixXd a_blend = MatrixXd::Zero(problem.states(), problem.states());
  MatrixXd bf = MatrixXd::Zero(problem.states(), problem.states());
  MatrixXd f_blend = MatrixXd::Zero(problem.inputs(), problem.states());
  for (int j = 0; j < r; ++j) f_blend += h[j] * F[j];
  for (int i = 0; i < r; ++i) {
    a_blend += h[i] * problem.A()[i];
    bf += h[i] * problem.B()[i] * f_blend;
  }
  return a_blend - bf;
}

LyapunovReport verify_lyapunov(const MatrixXd& P, const LmiProblem& problem,
                               std::span<const MatrixXd> F, int samples, std::uint32_t seed) {
  LyapunovReport rep;
  rep.p_min_eigenvalue = lmi::min_eigenvalue(P);
  rep.p_positive_definite = rep.p_min_eigenvalue > 0.0;
  const int r = problem.rules();
  const auto g = [&](int i, int j) -> MatrixXd {
    return problem.A()[i] - problem.B()[i] * F[j];
  };
  const auto lyap = [&](const MatrixXd& a) -> double {
    return lmi::max_eigenvalue(a.transpose() * P + P * a);
  };

  rep.worst_diagonal = -std::numeric_limits<double>::infinity();
  rep.worst_cross = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < r; ++i) {
    rep.worst_diagonal = std::max(rep.worst_diagonal, lyap(g(i, i)));
    for (int j = i + 1; j < r; ++j) {
      rep.worst_cross = std::max(rep.worst_cross, lyap(0.5 * (g(i, j) + g(j, i))));
    }
  }
  if (r == 1) rep.worst_cross = rep.worst_diagonal;

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  rep.worst_sampled = -std::numeric_limits<double>::infinity();
  VectorXd h(r);
  for (int s = 0; s < samples; ++s) {
    // Uniform on the simplex via normalized exponentials.
    for (int i = 0; i < r; ++i) h[i] = -std::log(1.0 - unit(rng));
    h /= h.sum();
    rep.worst_sampled = std::max(rep.worst_sampled, lyap(blended_closed_loop(problem, F, h)));
  }
  rep.samples = samples;

  // Cross terms are non-strict; allow round-off relative to P.
  const double slack = 1e-9 * std::max(1.0, lmi::max_eigenvalue(P));
  rep.passed = rep.p_positive_definite && rep.worst_diagonal < 0.0 && rep.worst_cross <= slack &&
               (samples == 0 || rep.worst_sampled < 0.0);
  return rep;
}

std::vector<ClosedLoopPole> closed_loop_poles(const LmiProblem& problem,
                                              std::span<const MatrixXd> F) {
  std::vector<ClosedLoopPole> poles;
  const int r = problem.rules();
  poles.reserve(static_cast<std::size_t>(r * r * problem.states()));
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      const MatrixXd g = problem.A()[i] - problem.B()[i] * F[j];
      const Eigen::EigenSolver<MatrixXd> es(g, false);
      for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const std::complex<double> lam = es.eigenvalues()(k);
        const double mag = std::abs(lam);
        poles.push_back({i, j, lam, mag > 0.0 ? -lam.real() / mag : 0.0});
      }
    }
  }
  return poles;
}

void write_pole_csv(std::ostream& out, const std::vector<ClosedLoopPole>& poles) {
  out << "i,j,re,im,zeta\n";
  for (const auto& p : poles) {
    out << p.i + 1 << ',' << p.j + 1 << ',' << fmt9(p.value.real()) << ','
        << fmt9(p.value.imag()) << ',' << fmt9(p.zeta) << '\n';
  }
}

void write_lyapunov_report(std::ostream& out, const LyapunovReport& report) {
  out << "passed: " << (report.passed ? "yes" : "no") << '\n'
      << "P positive definite: " << (report.p_positive_definite ? "yes" : "no")
      << " (min eigenvalue " << fmt9(report.p_min_eigenvalue) << ")\n"
      << "worst diagonal eigenvalue: " << fmt9(report.worst_diagonal) << '\n'
      << "worst cross eigenvalue: " << fmt9(report.worst_cross) << '\n'
      << "worst sampled eigenvalue: " << fmt9(report.worst_sampled) << " over "
      << report.samples << " weight samples\n";
}

void write_synthesis(std::ostream& out, const PdcSynthesis& synthesis) {
  nlohmann::ordered_json j;
  j["states"] = synthesis.X.rows();
  j["inputs"] = synthesis.F.empty() ? 0 : synthesis.F.front().rows();
  j["rules"] = synthesis.F.size();
  j["margin"] = std::stod(fmt9(synthesis.margin));
  j["cross_margin"] = std::stod(fmt9(synthesis.cross_margin));
  j["iterations"] = synthesis.iterations;
  j["X"] = matrix_json(synthesis.X);
  j["P"] = matrix_json(synthesis.P);
  j["M"] = nlohmann::ordered_json::array();
  j["F"] = nlohmann::ordered_json::array();
  for (const auto& m : synthesis.M) j["M"].push_back(matrix_json(m));
  for (const auto& f : synthesis.F) j["F"].push_back(matrix_json(f));
  out << j.dump(2) << '\n';
}

PdcSynthesis read_synthesis(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("synthesis file: ") + e.what());
  }
  PdcSynthesis syn;
  try {
    syn.X = json_matrix(j.at("X"));
    syn.P = json_matrix(j.at("P"));
    syn.margin = j.at("margin").get<double>();
    syn.cross_margin = j.value("cross_margin", syn.margin);
    syn.iterations = j.value("iterations", 0);
    for (const auto& m : j.at("M")) syn.M.push_back(json_matrix(m));
    for (const auto& f : j.at("F")) syn.F.push_back(json_matrix(f));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("synthesis file: ") + e.what());
  }
  if (syn.F.empty() || syn.F.size() != syn.M.size()) {
    throw Error(ErrorCode::kConfig, "synthesis file: F and M lists must be non-empty and equal");
  }
  return syn;
}

}  // namespace wmr
