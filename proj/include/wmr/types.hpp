#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace wmr {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using Mat23 = Eigen::Matrix<double, 2, 3>;

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar angle) {
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  Scalar wrapped = std::remainder(angle, two_pi);
  if (wrapped <= -std::numbers::pi_v<Scalar>) wrapped += two_pi;
  return wrapped;
}

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Robot configuration in the world frame. Heading is stored unwrapped.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec3 vec() const { return {x, y, theta}; }
  static Pose from(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
};

/// Linear and angular body velocity.
struct VelocityCommand {
  double v = 0.0;
  double omega = 0.0;
};

/// Pose error expressed in the robot's local frame.
struct TrackingError {
  double ex = 0.0;
  double ey = 0.0;
  double etheta = 0.0;

  Vec3 vec() const { return {ex, ey, etheta}; }
  double norm() const { return vec().norm(); }
  static TrackingError from(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
};

/// Modeling box of the fuzzy models: |e_x| <= ex, |e_y| <= ey, |e_theta| <= etheta.
struct ErrorBox {
  double ex = 0.2;
  double ey = 0.2;
  double etheta = kPi / 2.0;

  bool contains(const TrackingError& e) const {
    return std::abs(e.ex) <= ex && std::abs(e.ey) <= ey && std::abs(e.etheta) <= etheta;
  }
};

}  // namespace wmr
