// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any hard one fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "scenario.hpp"
#include "wmr/classic_controller.hpp"
#include "wmr/it2_fuzzy.hpp"
#include "wmr/lmi_synthesis.hpp"
#include "wmr/sim_harness.hpp"
#include "wmr/ts_type1.hpp"
#include "wmr/wmr_model.hpp"

using namespace wmr;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const TrackingError kE0{-0.1, -0.1, deg_to_rad(-6.0)};

bool report(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > limit_s) {
    o.pass = false;
    o.detail += " (over time limit)";
  }
  std::printf("criterion %d %s: %s  [%.2fs] %s\n", id, name, o.pass ? "PASS" : "FAIL", secs,
              o.detail.c_str());
  std::fflush(stdout);
  return o.pass;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// 1. Random end poses: sampled ends, end headings and distance travelled.
Outcome path_geometry() {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> pos(-2.0, 2.0), ang(-kPi, kPi), leg(0.3, 1.5),
      dur(0.5, 3.0);
  double end_err = 0, tan_err = 0, len_err = 0;
  int built = 0, rejected = 0;
  while (built < 100) {
    PathSpec s;
    s.start = {pos(rng), pos(rng), ang(rng)};
    s.end = {pos(rng), pos(rng), ang(rng)};
    s.depart_distance = leg(rng);
    s.approach_distance = leg(rng);
    s.duration = dur(rng);
    std::optional<ControlPolygon> cp;
    std::optional<ReferenceTrajectory> built_traj;
    try {
      cp = polygon_from_spec(s);
      built_traj = reference_trajectory(*cp, s.duration, 2001);
    } catch (const Error&) {
      ++rejected;
      continue;
    }
    const ReferenceTrajectory& traj = *built_traj;
    ++built;
    const auto& a = traj.samples().front();
    const auto& b = traj.samples().back();
    end_err = std::max({end_err, std::hypot(a.pose.x - s.start.x, a.pose.y - s.start.y),
                        std::hypot(b.pose.x - s.end.x, b.pose.y - s.end.y)});
    tan_err = std::max({tan_err, std::abs(wrap_angle(a.pose.theta - s.start.theta)),
                        std::abs(wrap_angle(b.pose.theta - s.end.theta))});
    double dist = 0;
    const auto& smp = traj.samples();
    for (std::size_t k = 1; k < smp.size(); ++k) {
      dist += 0.5 * (smp[k].t - smp[k - 1].t) * (smp[k].velocity.v + smp[k - 1].velocity.v);
    }
    const double len = arc_length(*cp);
    len_err = std::max(len_err, std::abs(dist - len) / len);
  }
  return {end_err <= 1e-12 && tan_err <= 1e-9 && len_err <= 1e-4,
          fmt("end %.2e, heading %.2e, rel length %.2e", end_err, tan_err, len_err) +
              " over 100 paths (" + std::to_string(rejected) + " singular draws redrawn)"};
}

// 2. Linearized classic loop places (s + 2 zeta wn)(s^2 + 2 zeta wn s + wn^2).
Outcome classic_poles() {
  const ClassicParams p;
  double worst = 0;
  for (int a = 0; a < 20; ++a) {
    for (int b = 0; b < 20; ++b) {
      const double v = 0.1 + (3.0 - 0.1) * a / 19;
      const double w = 0.1 + (12.0 - 0.1) * b / 19;
      const LinearizedModel m = linearized_matrices(v, w);
      const Mat3 cl = m.A - m.B * classic_feedback_matrix(v, w, p);
      const Eigen::Vector3cd got = Eigen::EigenSolver<Mat3>(cl).eigenvalues();
      const double wn = classic_gains(v, w, p).natural_frequency;
      // Characteristic coefficients of the target: s^3 + c2 s^2 + c1 s + c0.
      const double c2 = 4 * p.zeta * wn;
      const double c1 = wn * wn + 4 * p.zeta * p.zeta * wn * wn;
      const double c0 = 2 * p.zeta * wn * wn * wn;
      for (int k = 0; k < 3; ++k) {
        const std::complex<double> s = got[k];
        const std::complex<double> r = s * s * s + c2 * s * s + c1 * s + c0;
        worst = std::max(worst, std::abs(r) / (wn * wn * wn));
      }
    }
  }
  return {worst <= 1e-6, fmt("worst scaled residual %.2e over 400 points", worst)};
}

// 3. Rule blend equals the nonlinear error model everywhere in the box.
Outcome ts_exactness() {
  const TsModel m = test::u_turn_model();
  const auto& b = m.bounds.var;
  const VelocityExtrema ex = velocity_extrema(test::u_turn());
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double model_err = 0, sum_err = 0;
  for (int n = 0; n < 100000; ++n) {
    const TrackingError e{m.box.ex * (2 * u(rng) - 1), m.box.ey * (2 * u(rng) - 1),
                          m.box.etheta * (2 * u(rng) - 1)};
    const VelocityCommand ref{ex.v_min + (ex.v_max - ex.v_min) * u(rng),
                              b[0].lower + b[0].width() * u(rng)};
    const Premises z = linguistic_values(e, ref.v, ref.omega);
    const FiringStrengths fs = firing_strengths(membership_grades(z, m.bounds));
    sum_err = std::max(sum_err, std::abs(fs.h.sum() - 1.0));
    const BlendedModel bm = blended_matrices(fs.h, m);
    const Eigen::Vector2d ub(u(rng) - 0.5, u(rng) - 0.5);
    const VelocityCommand cmd{ref.v * std::cos(e.etheta) + ub.x(), ref.omega + ub.y()};
    model_err = std::max(model_err, (bm.A * e.vec() + bm.B * ub - error_dynamics(e, ref, cmd)).norm());
  }
  return {model_err <= 1e-10 && sum_err <= 1e-12,
          fmt("model %.2e, weight sum %.2e over 1e5 states", model_err, sum_err)};
}

// 4. Certificate for the 137 constraints.
Outcome synthesis() {
  const LmiProblem p = build_pdc_lmi(test::u_turn_model());
  const FeasibilityResult r = solve_feasibility(p);
  if (!r.feasible) return {false, fmt("infeasible, margin %.3e", r.margin)};
  const PdcSynthesis& s = *r.synthesis;
  const LyapunovReport rep = verify_lyapunov(s.P, p, s.F);
  const auto poles = closed_loop_poles(p, s.F);
  double worst_re = -1e300;
  for (const auto& pole : poles) worst_re = std::max(worst_re, pole.value.real());

  Eigen::MatrixXd known_p(3, 3);
  known_p << 0.5756, 0.0102, 0.0139, 0.0102, 0.9640, 0.6352, 0.0139, 0.6352, 0.6690;
  const bool known_spd = Eigen::LLT<Eigen::MatrixXd>(known_p).info() == Eigen::Success;

  const bool ok = p.size() == 137 && s.margin >= 1e-6 && rep.passed && poles.size() == 768 &&
                  worst_re < 0 && known_spd;
  return {ok, std::to_string(p.size()) + " LMIs, " +
                  fmt("margin %.4f, max Re %.3f, ", s.margin, worst_re) +
                  std::to_string(poles.size()) + " poles, reference P " +
                  (known_spd ? "SPD" : "not SPD")};
}

struct Designs {
  ReferenceTrajectory traj = test::u_turn();
  TsModel model = test::u_turn_model();
  PdcSynthesis syn = *solve_feasibility(build_pdc_lmi(model)).synthesis;
  IntervalBounds wide = interval_bounds(UncertaintyGrid{}, test::u_turn_spec(), 2001, ErrorBox{});
};

const Designs& designs() {
  static const Designs d;
  return d;
}

// 5. Both fuzzy loops settle and the Lyapunov value does not grow.
Outcome fuzzy_settling(std::vector<std::optional<Metrics>>& out) {
  const Designs& d = designs();
  const ClassicTracker c({});
  const Type1Tracker t1(d.model, d.syn.gains(), d.syn.P);
  const Type2Tracker t2(d.wide, ErrorBox{}, d.syn.gains(), d.syn.P);
  const TrackingController* list[] = {&c, &t1, &t2};
  const auto rows = compare_controllers(d.traj, list, kE0, 1e-3, 10.0);
  for (const auto& r : rows) out.push_back(r.metrics);
  bool ok = true;
  std::string detail;
  for (int k = 1; k < 3; ++k) {
    const auto& m = rows[k].metrics;
    if (!m) return {false, to_string(rows[k].kind) + std::string(": ") + rows[k].failure};
    const double slack = m->max_lyapunov_increase / m->initial_lyapunov;
    ok = ok && m->settling_time.has_value() && slack <= 1e-3;
    detail += to_string(rows[k].kind) + fmt(" settles %.3fs, dV/V0 %.1e; ",
                                            m->settling_time.value_or(NAN), slack);
  }
  return {ok, detail};
}

// 6. Fuzzy beats classic on ISE; command rate of type2 is reported.
bool compare_gate(const std::vector<std::optional<Metrics>>& m) {
  const bool have = m.size() == 3 && m[0] && m[1] && m[2];
  const bool hard = have && m[1]->ise_total < m[0]->ise_total;
  std::printf("criterion 6 ISE type1 < classic: %s  %s\n", hard ? "PASS" : "FAIL",
              have ? fmt("classic %.5f, type1 %.5f", m[0]->ise_total, m[1]->ise_total).c_str()
                   : "missing runs");
  if (have) {
    const bool soft = m[2]->max_command_rate <= m[1]->max_command_rate;
    std::printf("criterion 6 (soft) command rate type2 <= type1: %s  type1 %.2f, type2 %.2f\n",
                soft ? "PASS" : "WARN", m[1]->max_command_rate, m[2]->max_command_rate);
  }
  return hard;
}

// 7. A single-member grid collapses the interval controller onto Type I.
Outcome single_member_grid() {
  const Designs& d = designs();
  const PathSpec spec = test::u_turn_spec();
  const UncertaintyGrid one{{spec.start.x, spec.start.x}, {spec.start.y, spec.start.y}, 1};
  const IntervalBounds ib = interval_bounds(one, spec, 2001, ErrorBox{});
  const Type1Tracker t1(d.model, d.syn.gains(), d.syn.P);
  const Type2Tracker t2(ib, ErrorBox{}, d.syn.gains(), d.syn.P);
  const SimTrace a = run_closed_loop(d.traj, t1, kE0, 1e-3, 10.0);
  const SimTrace b = run_closed_loop(d.traj, t2, kE0, 1e-3, 10.0);
  if (a.rows.size() != b.rows.size()) return {false, "trace lengths differ"};
  double worst = 0;
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    worst = std::max(worst, (a.rows[k].pose.vec() - b.rows[k].pose.vec()).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-9, fmt("max pose difference %.2e", worst)};
}

// 8. RK4 order on the open-loop path with smooth analytic commands.
Outcome rk4_order() {
  const PathSpec spec = test::u_turn_spec();
  const ControlPolygon cp = polygon_from_spec(spec);
  const auto command = [&](double t) {
    const BezierDerivatives d = bezier_derivatives(cp, std::clamp(t / spec.duration, 0.0, 1.0));
    const double n2 = d.first.squaredNorm();
    return VelocityCommand{std::sqrt(n2) / spec.duration,
                           (d.first.x() * d.second.y() - d.first.y() * d.second.x()) / n2 /
                               spec.duration};
  };
  const auto integrate = [&](int steps) {
    const double h = spec.duration / steps;
    Vec3 x = spec.start.vec();
    for (int k = 0; k < steps; ++k) {
      const double t = k * h;
      const auto f = [&](const Vec3& s, double tt) {
        return plant_derivative(Pose{s.x(), s.y(), s.z()}, command(tt));
      };
      const Vec3 k1 = f(x, t);
      const Vec3 k2 = f(x + h / 2 * k1, t + h / 2);
      const Vec3 k3 = f(x + h / 2 * k2, t + h / 2);
      const Vec3 k4 = f(x + h * k3, t + h);
      x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return x;
  };
  const int coarse = 100;
  const Vec3 ref = integrate(coarse * 100);
  const double e1 = (integrate(coarse) - ref).norm();
  const double e2 = (integrate(2 * coarse) - ref).norm();
  const double ratio = e1 / e2;
  const double end_gap = (ref.head<2>() - Vec2(spec.end.x, spec.end.y)).norm();
  return {ratio >= 12 && ratio <= 20,
          fmt("error ratio %.2f (dt %.3g), reference lands %.1e from the end point", ratio,
              spec.duration / coarse, end_gap)};
}

}  // namespace

int main() {
  bool ok = true;
  ok &= report(1, "path geometry", 5, path_geometry);
  ok &= report(2, "classic pole placement", 5, classic_poles);
  ok &= report(3, "T-S exactness", 10, ts_exactness);
  ok &= report(4, "LMI synthesis", 60, synthesis);
  std::vector<std::optional<Metrics>> metrics;
  ok &= report(5, "fuzzy settling and Lyapunov decrease", 30, [&] { return fuzzy_settling(metrics); });
  ok &= compare_gate(metrics);
  ok &= report(7, "single-member grid equals Type I", 30, single_member_grid);
  ok &= report(8, "RK4 fourth order", 10, rk4_order);
  std::printf("%s\n", ok ? "ALL PASS" : "FAILURES");
  return ok ? 0 : 1;
}
