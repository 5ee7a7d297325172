#include "wmr/classic_controller.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "wmr/error.hpp"

namespace wmr {

namespace {

double sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

void ClassicParams::validate() const {
  if (!(zeta > 0.0 && zeta < 1.0)) {
    throw Error(ErrorCode::kConfig, "classic damping ratio must lie in (0, 1)");
  }
  if (!(g > 0.0)) throw Error(ErrorCode::kConfig, "classic gain parameter g must be positive");
}

LinearizedModel linearized_matrices(double v_ref, double omega_ref) {
  LinearizedModel m;
  m.A << 0.0, omega_ref, 0.0,
         -omega_ref, 0.0, v_ref,
         0.0, 0.0, 0.0;
  m.B << -1.0, 0.0,
         0.0, 0.0,
         0.0, -1.0;
  return m;
}

Controllability controllability_matrix(const Mat3& A, const Mat32& B) {
  Controllability c;
  c.matrix << B, A * B, A * A * B;
  const Eigen::JacobiSVD<Eigen::Matrix<double, 3, 6>> svd(c.matrix);
  const auto& sv = svd.singularValues();
  const double cutoff = 1e-10 * sv(0);
  c.rank = 0;
  for (int k = 0; k < sv.size(); ++k) {
    if (sv(k) > cutoff && sv(k) > 0.0) ++c.rank;
  }
  return c;
}

ClassicGains classic_gains(double v_ref, double omega_ref, const ClassicParams& params) {
  ClassicGains gains;
  gains.natural_frequency = std::sqrt(omega_ref * omega_ref + params.g * v_ref * v_ref);
  gains.k1 = 2.0 * params.zeta * gains.natural_frequency;
  gains.k3 = gains.k1;
  gains.k2 = params.g * std::abs(v_ref);
  return gains;
}

Mat23 classic_feedback_matrix(double v_ref, double omega_ref, const ClassicParams& params) {
  const ClassicGains k = classic_gains(v_ref, omega_ref, params);
  Mat23 K;
  K << -k.k1, 0.0, 0.0,
       0.0, -sign(v_ref) * k.k2, -k.k3;
  return K;
}

VelocityCommand classic_control(const TrackingError& e, const VelocityCommand& reference,
                                const ClassicParams& params) {
  const ClassicGains k = classic_gains(reference.v, reference.omega, params);
  return {reference.v * std::cos(e.etheta) + k.k1 * e.ex,
          reference.omega + sign(reference.v) * k.k2 * e.ey + k.k3 * e.etheta};
}

}  // namespace wmr
