#pragma once

#include <Eigen/Core>

#include "wmr/types.hpp"

namespace wmr {

/// Pole-placement parameters: damping ratio and lateral gain scale.
struct ClassicParams {
  double zeta = 0.6;
  double g = 0.1;

  void validate() const;
};

struct LinearizedModel {
  Mat3 A;
  Mat32 B;
};

struct Controllability {
  Eigen::Matrix<double, 3, 6> matrix;
  int rank = 0;
};

struct ClassicGains {
  double natural_frequency = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
};

/// Error dynamics linearized about e = 0, u_B = 0.
LinearizedModel linearized_matrices(double v_ref, double omega_ref);

/// [B, AB, A^2 B]; rank from singular values above 1e-10 * sigma_max.
Controllability controllability_matrix(const Mat3& A, const Mat32& B);

/// w_n = sqrt(omega_R^2 + g v_R^2), k1 = k3 = 2 zeta w_n, k2 = g |v_R|.
ClassicGains classic_gains(double v_ref, double omega_ref, const ClassicParams& params);

/// Feedback matrix K with u_B = -K e, so the linearized closed loop is A - B K.
Mat23 classic_feedback_matrix(double v_ref, double omega_ref, const ClassicParams& params);

/// U_F + U_B with gains rescheduled from the instantaneous reference.
VelocityCommand classic_control(const TrackingError& e, const VelocityCommand& reference,
                                const ClassicParams& params);

}  // namespace wmr
