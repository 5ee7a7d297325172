#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wmr/classic_controller.hpp"
#include "wmr/it2_fuzzy.hpp"
#include "wmr/path_model.hpp"
#include "wmr/ts_type1.hpp"

namespace wmr {

enum class ControllerKind { kClassic, kType1, kType2 };

const char* to_string(ControllerKind kind);
ControllerKind parse_controller_kind(const std::string& name);

struct ControllerOutput {
  VelocityCommand command;
  std::optional<RuleWeights> firing;  // fuzzy controllers only
  bool in_box = true;                 // premises inside the modeling box
};

/// Feedback law evaluated once per control step.
class TrackingController {
 public:
  virtual ~TrackingController() = default;

  virtual ControllerKind kind() const = 0;
  virtual ControllerOutput command(const TrackingError& e,
                                   const VelocityCommand& reference) const = 0;
  /// Lyapunov matrix of the certified closed loop, if any.
  virtual std::optional<Mat3> lyapunov_matrix() const { return std::nullopt; }
};

class ClassicTracker final : public TrackingController {
 public:
  explicit ClassicTracker(ClassicParams params);

  ControllerKind kind() const override { return ControllerKind::kClassic; }
  ControllerOutput command(const TrackingError& e, const VelocityCommand& reference) const override;

 private:
  ClassicParams params_;
};

class Type1Tracker final : public TrackingController {
 public:
  Type1Tracker(TsModel model, GainSet gains, Mat3 lyapunov, bool clamp = true);

  ControllerKind kind() const override { return ControllerKind::kType1; }
  ControllerOutput command(const TrackingError& e, const VelocityCommand& reference) const override;
  std::optional<Mat3> lyapunov_matrix() const override { return lyapunov_; }

 private:
  TsModel model_;
  GainSet gains_;
  Mat3 lyapunov_;
  bool clamp_;
};

class Type2Tracker final : public TrackingController {
 public:
  Type2Tracker(IntervalBounds bounds, ErrorBox box, GainSet gains, Mat3 lyapunov,
               bool clamp = true);

  ControllerKind kind() const override { return ControllerKind::kType2; }
  ControllerOutput command(const TrackingError& e, const VelocityCommand& reference) const override;
  std::optional<Mat3> lyapunov_matrix() const override { return lyapunov_; }

 private:
  IntervalBounds bounds_;
  ErrorBox box_;
  GainSet gains_;
  Mat3 lyapunov_;
  bool clamp_;
};

struct TraceRow {
  double t = 0.0;
  Pose reference;
  Pose pose;
  TrackingError error;
  VelocityCommand command;
  std::optional<RuleWeights> firing;
  double lyapunov = std::numeric_limits<double>::quiet_NaN();
};

struct SimTrace {
  ControllerKind kind = ControllerKind::kClassic;
  double dt = 0.0;
  std::vector<TraceRow> rows;
  int out_of_box_steps = 0;
  std::optional<std::size_t> diverged_step;  // set when the state became non-finite
};

struct Metrics {
  Vec3 ise = Vec3::Zero();
  double ise_total = 0.0;
  Vec3 max_abs_error = Vec3::Zero();
  std::optional<double> settling_time;  // empty when not settled within the horizon
  double max_command_rate = 0.0;        // |(dv, domega)| / dt
  double max_v_rate = 0.0;
  double max_omega_rate = 0.0;
  double max_lyapunov_increase = 0.0;  // max_k V(k+1) - V(k), 0 without P
  double initial_lyapunov = 0.0;
};

/// Closed loop of the nonlinear plant: the robot starts at the reference pose
/// composed with e0; per step the controller sees the local error and its
/// command is held over one RK4 step of length dt.
SimTrace run_closed_loop(const ReferenceTrajectory& traj, const TrackingController& controller,
                         const TrackingError& e0, double dt, double horizon);

/// Trapezoidal ISE, extrema, 5% settling time, and command rates over
/// t < rate_window (the reference velocity drops to zero at the end of the path).
/// With P, the V = e'Pe series of the trace is recomputed from it.
Metrics compute_metrics(const SimTrace& trace, double rate_window,
                        const std::optional<Mat3>& P = std::nullopt);

struct ComparisonRow {
  ControllerKind kind = ControllerKind::kClassic;
  std::optional<Metrics> metrics;
  std::string failure;
};

/// Runs every controller on the same trajectory and initial error.
std::vector<ComparisonRow> compare_controllers(
    const ReferenceTrajectory& traj, std::span<const TrackingController* const> controllers,
    const TrackingError& e0, double dt, double horizon);

/// Header t,x_r,y_r,theta_r,x,y,theta,e_x,e_y,e_theta,v_c,omega_c,V.
void write_trace_csv(std::ostream& out, const SimTrace& trace);

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const std::string& label,
                       const std::optional<Metrics>& metrics, const std::string& status);

}  // namespace wmr
