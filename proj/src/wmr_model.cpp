#include "wmr/wmr_model.hpp"

#include <cmath>

#include "wmr/error.hpp"

namespace wmr {

void WheelGeometry::validate() const {
  if (!(wheel_radius > 0.0) || !(half_axle > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "wheel radius and half axle width must be positive");
  }
}

TrackingError tracking_error(const Pose& reference, const Pose& current) {
  Vec3 e = rotation_matrix(current.theta) * (reference.vec() - current.vec());
  e.z() = wrap_angle(e.z());
  return TrackingError::from(e);
}

Pose pose_from_error(const Pose& reference, const TrackingError& e) {
  const double theta = reference.theta - e.etheta;
  const Vec3 delta = rotation_matrix(theta).transpose() * e.vec();
  return {reference.x - delta.x(), reference.y - delta.y(), theta};
}

Vec3 plant_derivative(const Pose& pose, const VelocityCommand& cmd) {
  return {cmd.v * std::cos(pose.theta), cmd.v * std::sin(pose.theta), cmd.omega};
}

Vec3 error_dynamics(const TrackingError& e, const VelocityCommand& reference,
                    const VelocityCommand& cmd) {
  return {cmd.omega * e.ey - cmd.v + reference.v * std::cos(e.etheta),
          -cmd.omega * e.ex + reference.v * std::sin(e.etheta), reference.omega - cmd.omega};
}

WheelSpeeds wheel_speeds(const VelocityCommand& cmd, const WheelGeometry& geom) {
  geom.validate();
  const double v_right = cmd.v + geom.half_axle * cmd.omega;
  const double v_left = cmd.v - geom.half_axle * cmd.omega;
  return {v_right / geom.wheel_radius, v_left / geom.wheel_radius};
}

VelocityCommand body_velocity(const WheelSpeeds& wheels, const WheelGeometry& geom) {
  geom.validate();
  const double v_right = wheels.right * geom.wheel_radius;
  const double v_left = wheels.left * geom.wheel_radius;
  return {0.5 * (v_left + v_right), (v_right - v_left) / (2.0 * geom.half_axle)};
}

Pose integrate_plant(const Pose& pose, const VelocityCommand& cmd, double dt) {
  const auto rhs = [&cmd](double, const Vec3& x) {
    return plant_derivative(Pose::from(x), cmd);
  };
  return Pose::from(rk4_step(rhs, 0.0, pose.vec(), dt));
}

}  // namespace wmr
