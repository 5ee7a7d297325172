#pragma once

#include <Eigen/Core>

#include "wmr/types.hpp"

namespace wmr {

/// World-to-local rotation [cos, sin, 0; -sin, cos, 0; 0, 0, 1].
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> rotation_matrix(Scalar theta) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(theta);
  const Scalar s = sin(theta);
  Eigen::Matrix<Scalar, 3, 3> r;
  r << c, s, Scalar(0), -s, c, Scalar(0), Scalar(0), Scalar(0), Scalar(1);
  return r;
}

struct WheelGeometry {
  double wheel_radius = 0.05;
  double half_axle = 0.15;

  void validate() const;
};

struct WheelSpeeds {
  double right = 0.0;  // rad/s
  double left = 0.0;   // rad/s
};

/// e = R(theta_C) (P_R - P_C), angular part wrapped to (-pi, pi].
TrackingError tracking_error(const Pose& reference, const Pose& current);

/// Inverse of tracking_error: the pose whose error w.r.t. `reference` is `e`.
Pose pose_from_error(const Pose& reference, const TrackingError& e);

/// Unicycle kinematics (v cos th, v sin th, omega).
Vec3 plant_derivative(const Pose& pose, const VelocityCommand& cmd);

/// Local-frame error rates:
///   de_x = omega_c e_y - v_c + v_R cos e_th
///   de_y = -omega_c e_x + v_R sin e_th
///   de_th = omega_R - omega_c
Vec3 error_dynamics(const TrackingError& e, const VelocityCommand& reference,
                    const VelocityCommand& cmd);

WheelSpeeds wheel_speeds(const VelocityCommand& cmd, const WheelGeometry& geom);
VelocityCommand body_velocity(const WheelSpeeds& wheels, const WheelGeometry& geom);

/// Classic fourth-order Runge-Kutta step for x' = f(t, x).
template <typename State, typename Rhs>
State rk4_step(const Rhs& f, double t, const State& x, double dt) {
  const State k1 = f(t, x);
  const State k2 = f(t + 0.5 * dt, State(x + 0.5 * dt * k1));
  const State k3 = f(t + 0.5 * dt, State(x + 0.5 * dt * k2));
  const State k4 = f(t + dt, State(x + dt * k3));
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// One RK4 step of the plant with the command held constant over the step.
Pose integrate_plant(const Pose& pose, const VelocityCommand& cmd, double dt);

}  // namespace wmr
