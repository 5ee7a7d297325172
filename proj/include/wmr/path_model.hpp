#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "wmr/error.hpp"
#include "wmr/types.hpp"

namespace wmr {

/// Four control points of a cubic Bezier path, in meters. p0 and p3 must differ.
class ControlPolygon {
 public:
  ControlPolygon(const Vec2& p0, const Vec2& p1, const Vec2& p2, const Vec2& p3);

  const Vec2& operator[](std::size_t k) const { return points_[k]; }
  const std::array<Vec2, 4>& points() const { return points_; }

 private:
  std::array<Vec2, 4> points_;
};

/// Endpoint poses plus departure/approach distances that place the interior control points.
struct PathSpec {
  Pose start;
  Pose end;
  double depart_distance = 1.0;
  double approach_distance = 1.0;
  double duration = 1.0;

  void validate() const;
};

struct BezierDerivatives {
  Vec2 first;
  Vec2 second;
};

/// One sample of the reference: curve parameter, time, pose and feedforward velocities.
struct ReferenceSample {
  double eta = 0.0;
  double t = 0.0;
  Pose pose;
  VelocityCommand velocity;
};

/// Uniform grid over eta in [0, 1] with t = eta * duration.
class ReferenceTrajectory {
 public:
  ReferenceTrajectory(std::vector<ReferenceSample> samples, double duration);

  const std::vector<ReferenceSample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double duration() const { return duration_; }

  /// Reference at time t. Linear interpolation between grid points; from the
  /// end time on, the final pose is held with zero velocity.
  ReferenceSample at(double t) const;

 private:
  std::vector<ReferenceSample> samples_;
  double duration_;
};

struct VelocityExtrema {
  double v_min = 0.0;
  double v_max = 0.0;
  double omega_min = 0.0;
  double omega_max = 0.0;
};

/// Cubic Bernstein evaluation. Throws ErrorCode::kDomain for eta outside [0, 1].
Vec2 bezier_point(const ControlPolygon& cp, double eta);

BezierDerivatives bezier_derivatives(const ControlPolygon& cp, double eta);

/// p1 = p0 + d_i (cos th_i, sin th_i), p2 = p3 - d_f (cos th_f, sin th_f).
ControlPolygon polygon_from_spec(const PathSpec& spec);

/// Samples `count` points uniformly in eta. Throws kSingularPath if the tangent
/// vanishes at a sample or reverses between neighbouring samples (a cusp).
ReferenceTrajectory reference_trajectory(const ControlPolygon& cp, double duration,
                                         std::size_t count);

/// Length of the curve by composite 5-point Gauss-Legendre, panels doubled
/// from `panels` until successive estimates agree to 1e-12 relative.
double arc_length(const ControlPolygon& cp, int panels = 64);

VelocityExtrema velocity_extrema(const ReferenceTrajectory& traj);

/// CSV with header eta,t,x_r,y_r,theta_r,v_r,omega_r and 9 significant digits.
void write_trajectory_csv(std::ostream& out, const ReferenceTrajectory& traj);

}  // namespace wmr
