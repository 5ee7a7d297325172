#include "wmr/sim_harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "wmr/error.hpp"
#include "wmr/wmr_model.hpp"

namespace wmr {

namespace {

bool premises_inside(const Premises& z, const LinguisticBounds& b) {
  for (int k = 0; k < kPremiseCount; ++k) {
    if (z[k] > b.var[k].upper || z[k] < b.var[k].lower) return false;
  }
  return true;
}

std::string fmt9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

const char* to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kClassic: return "classic";
    case ControllerKind::kType1: return "type1";
    case ControllerKind::kType2: return "type2";
  }
  return "unknown";
}

ControllerKind parse_controller_kind(const std::string& name) {
  if (name == "classic") return ControllerKind::kClassic;
  if (name == "type1") return ControllerKind::kType1;
  if (name == "type2") return ControllerKind::kType2;
  throw Error(ErrorCode::kConfig, "unknown controller kind '" + name + "'");
}

ClassicTracker::ClassicTracker(ClassicParams params) : params_(params) { params_.validate(); }

ControllerOutput ClassicTracker::command(const TrackingError& e,
                                         const VelocityCommand& reference) const {
  return {classic_control(e, reference, params_), std::nullopt, true};
}

Type1Tracker::Type1Tracker(TsModel model, GainSet gains, Mat3 lyapunov, bool clamp)
    : model_(std::move(model)), gains_(std::move(gains)), lyapunov_(lyapunov), clamp_(clamp) {
  if (gains_.size() != static_cast<std::size_t>(kRuleCount)) {
    throw Error(ErrorCode::kInvalidSpec, "type1 controller needs 16 gain matrices");
  }
}

ControllerOutput Type1Tracker::command(const TrackingError& e,
                                       const VelocityCommand& reference) const {
  const Premises z = linguistic_values(e, reference.v, reference.omega);
  const FiringStrengths fs = firing_strengths(membership_grades(z, model_.bounds, clamp_));
  return {pdc_control(e, fs.h, gains_, reference), fs.h,
          model_.box.contains(e) && premises_inside(z, model_.bounds)};
}

Type2Tracker::Type2Tracker(IntervalBounds bounds, ErrorBox box, GainSet gains, Mat3 lyapunov,
                           bool clamp)
    : bounds_(std::move(bounds)),
      box_(box),
      gains_(std::move(gains)),
      lyapunov_(lyapunov),
      clamp_(clamp) {
  if (gains_.size() != static_cast<std::size_t>(kRuleCount)) {
    throw Error(ErrorCode::kInvalidSpec, "type2 controller needs 16 gain matrices");
  }
}

ControllerOutput Type2Tracker::command(const TrackingError& e,
                                       const VelocityCommand& reference) const {
  const Premises z = linguistic_values(e, reference.v, reference.omega);
  const IntervalFiringStrengths fs = interval_firing(interval_grades(z, bounds_, clamp_));
  return {it2_pdc_control(e, fs, gains_, reference), RuleWeights(0.5 * (fs.lower.h + fs.upper.h)),
          box_.contains(e) && premises_inside(z, bounds_.upper)};
}

SimTrace run_closed_loop(const ReferenceTrajectory& traj, const TrackingController& controller,
                         const TrackingError& e0, double dt, double horizon) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kConfig, "time step must be positive");
  if (!(horizon >= traj.duration())) {
    throw Error(ErrorCode::kConfig, "simulation horizon shorter than the path duration");
  }
  if (!e0.vec().allFinite()) throw Error(ErrorCode::kConfig, "initial error is not finite");

  SimTrace trace;
  trace.kind = controller.kind();
  trace.dt = dt;
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  trace.rows.reserve(steps + 1);
  const std::optional<Mat3> P = controller.lyapunov_matrix();

  Pose pose = pose_from_error(traj.at(0.0).pose, e0);
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    const ReferenceSample ref = traj.at(t);
    const TrackingError e = tracking_error(ref.pose, pose);
    const ControllerOutput out = controller.command(e, ref.velocity);
    if (!out.in_box) ++trace.out_of_box_steps;

    TraceRow row;
    row.t = t;
    row.reference = ref.pose;
    row.pose = pose;
    row.error = e;
    row.command = out.command;
    row.firing = out.firing;
    if (P) row.lyapunov = e.vec().dot(*P * e.vec());
    trace.rows.push_back(row);
    if (k == steps) break;

    pose = integrate_plant(pose, out.command, dt);
    if (!pose.vec().allFinite() || !std::isfinite(out.command.v) ||
        !std::isfinite(out.command.omega)) {
      trace.diverged_step = k + 1;
      break;
    }
  }
  return trace;
}

Metrics compute_metrics(const SimTrace& trace, double rate_window, const std::optional<Mat3>& P) {
  Metrics m;
  const auto& rows = trace.rows;
  if (rows.empty()) throw Error(ErrorCode::kInvalidSpec, "cannot compute metrics of an empty trace");

  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Vec3 e = rows[k].error.vec();
    m.max_abs_error = m.max_abs_error.cwiseMax(e.cwiseAbs());
    if (k + 1 < rows.size()) {
      const Vec3 e1 = rows[k + 1].error.vec();
      const double h = rows[k + 1].t - rows[k].t;
      m.ise += 0.5 * h * (e.cwiseAbs2() + e1.cwiseAbs2());
      if (rows[k + 1].t < rate_window - 1e-12) {
        const double dv = (rows[k + 1].command.v - rows[k].command.v) / h;
        const double dw = (rows[k + 1].command.omega - rows[k].command.omega) / h;
        m.max_v_rate = std::max(m.max_v_rate, std::abs(dv));
        m.max_omega_rate = std::max(m.max_omega_rate, std::abs(dw));
        m.max_command_rate = std::max(m.max_command_rate, std::hypot(dv, dw));
      }
    }
  }
  m.ise_total = m.ise.sum();

  const double e0 = rows.front().error.norm();
  if (e0 == 0.0) {
    m.settling_time = rows.front().t;
  } else {
    const double threshold = 0.05 * e0;
    std::optional<std::size_t> last_outside;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k].error.norm() >= threshold) last_outside = k;
    }
    if (!last_outside) {
      m.settling_time = rows.front().t;
    } else if (*last_outside + 1 < rows.size()) {
      m.settling_time = rows[*last_outside + 1].t;
    }
  }

  if (P) {
    const auto v = [&](std::size_t k) {
      const Vec3 e = rows[k].error.vec();
      return e.dot(*P * e);
    };
    m.initial_lyapunov = v(0);
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
      m.max_lyapunov_increase = std::max(m.max_lyapunov_increase, v(k + 1) - v(k));
    }
  }
  return m;
}

std::vector<ComparisonRow> compare_controllers(
    const ReferenceTrajectory& traj, std::span<const TrackingController* const> controllers,
    const TrackingError& e0, double dt, double horizon) {
  std::vector<ComparisonRow> rows;
  rows.reserve(controllers.size());
  for (const TrackingController* c : controllers) {
    ComparisonRow row;
    row.kind = c->kind();
    try {
      const SimTrace trace = run_closed_loop(traj, *c, e0, dt, horizon);
      if (trace.diverged_step) {
        row.failure = "diverged at step " + std::to_string(*trace.diverged_step);
      } else {
        row.metrics = compute_metrics(trace, traj.duration(), c->lyapunov_matrix());
      }
    } catch (const Error& e) {
      row.failure = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  out << "t,x_r,y_r,theta_r,x,y,theta,e_x,e_y,e_theta,v_c,omega_c,V\n";
  for (const auto& r : trace.rows) {
    out << fmt9(r.t) << ',' << fmt9(r.reference.x) << ',' << fmt9(r.reference.y) << ','
        << fmt9(r.reference.theta) << ',' << fmt9(r.pose.x) << ',' << fmt9(r.pose.y) << ','
        << fmt9(r.pose.theta) << ',' << fmt9(r.error.ex) << ',' << fmt9(r.error.ey) << ','
        << fmt9(r.error.etheta) << ',' << fmt9(r.command.v) << ',' << fmt9(r.command.omega) << ','
        << fmt9(r.lyapunov) << '\n';
  }
}

void write_metrics_header(std::ostream& out) {
  out << "controller,ise_x,ise_y,ise_theta,ise_total,max_abs_ex,max_abs_ey,max_abs_etheta,"
         "settled,settling_time,max_command_rate,max_v_rate,max_omega_rate,"
         "max_lyapunov_increase,status\n";
}

void write_metrics_row(std::ostream& out, const std::string& label,
                       const std::optional<Metrics>& metrics, const std::string& status) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const Metrics m = metrics.value_or(Metrics{});
  const auto val = [&](double v) { return fmt9(metrics ? v : nan); };
  out << label << ',' << val(m.ise.x()) << ',' << val(m.ise.y()) << ',' << val(m.ise.z()) << ','
      << val(m.ise_total) << ',' << val(m.max_abs_error.x()) << ',' << val(m.max_abs_error.y())
      << ',' << val(m.max_abs_error.z()) << ',' << (m.settling_time ? 1 : 0) << ','
      << val(m.settling_time.value_or(nan)) << ',' << val(m.max_command_rate) << ','
      << val(m.max_v_rate) << ',' << val(m.max_omega_rate) << ','
      << val(m.max_lyapunov_increase) << ',' << status << '\n';
}

}  // namespace wmr
