#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "wmr/classic_controller.hpp"
#include "wmr/error.hpp"
#include "wmr/wmr_model.hpp"

using namespace wmr;

namespace {

using Roots = std::vector<std::complex<double>>;

Roots sorted(Roots r) {
  std::sort(r.begin(), r.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return r;
}

// Roots of (s + 2 zeta wn)(s^2 + 2 zeta wn s + wn^2) by the quadratic formula.
Roots target_roots(double zeta, double wn) {
  const std::complex<double> disc = std::sqrt(std::complex<double>(zeta * zeta - 1.0));
  return sorted({-2 * zeta * wn, wn * (-zeta + disc), wn * (-zeta - disc)});
}

Roots closed_loop_roots(double v, double w, const ClassicParams& p) {
  const LinearizedModel m = linearized_matrices(v, w);
  const Mat3 cl = m.A - m.B * classic_feedback_matrix(v, w, p);
  const Eigen::EigenSolver<Mat3> es(cl);
  Roots r;
  for (int k = 0; k < 3; ++k) r.push_back(es.eigenvalues()(k));
  return sorted(r);
}

}  // namespace

TEST_CASE("linearized model") {
  CHECK(linearized_matrices(0, 0).A.isZero(0.0));
  const LinearizedModel m = linearized_matrices(1, 2);
  CHECK(m.A(0, 1) == 2);
  CHECK(m.A(1, 0) == -2);
  CHECK(m.A(1, 2) == 1);
  CHECK(m.A(2, 2) == 0);
  CHECK(m.B == linearized_matrices(-0.4, 7).B);
}

TEST_CASE("linearized model is the Jacobian of the error dynamics") {
  const VelocityCommand ref{1.3, -0.8};
  const LinearizedModel m = linearized_matrices(ref.v, ref.omega);
  const double h = 1e-6;
  for (int j = 0; j < 3; ++j) {
    Vec3 d = Vec3::Zero();
    d[j] = h;
    const Vec3 col = (error_dynamics(TrackingError::from(d), ref, ref) -
                      error_dynamics(TrackingError::from(-d), ref, ref)) / (2 * h);
    CHECK((col - m.A.col(j)).norm() < 1e-8);
  }
  // Feedback enters as cmd = ref + u_B.
  for (int j = 0; j < 2; ++j) {
    VelocityCommand plus = ref, minus = ref;
    (j == 0 ? plus.v : plus.omega) += h;
    (j == 0 ? minus.v : minus.omega) -= h;
    const Vec3 col = (error_dynamics({}, ref, plus) - error_dynamics({}, ref, minus)) / (2 * h);
    CHECK((col - m.B.col(j)).norm() < 1e-8);
  }
}

TEST_CASE("controllability rank") {
  auto rank = [](double v, double w) {
    const LinearizedModel m = linearized_matrices(v, w);
    return controllability_matrix(m.A, m.B).rank;
  };
  CHECK(rank(1, 1) == 3);
  CHECK(rank(0, 0) == 2);
  CHECK(rank(1, 0) == 3);
}

TEST_CASE("gain formulas") {
  const ClassicGains zero = classic_gains(0, 0, {});
  CHECK(zero.k1 == 0);
  CHECK(zero.k2 == 0);
  CHECK(zero.k3 == 0);

  const ClassicGains spin = classic_gains(0, 1, {0.5, 0.1});
  CHECK(spin.k1 == doctest::Approx(1.0));
  CHECK(spin.k3 == doctest::Approx(1.0));
  CHECK(spin.k2 == 0.0);

  const ClassicGains cruise = classic_gains(1, 0, {0.6, 0.1});
  CHECK(cruise.natural_frequency == doctest::Approx(std::sqrt(0.1)));
  CHECK(cruise.k1 == doctest::Approx(1.2 * std::sqrt(0.1)));
  CHECK(cruise.k1 == doctest::Approx(0.3795).epsilon(1e-4));
  CHECK(cruise.k2 == doctest::Approx(0.1));

  // No blow-up as the reference speed vanishes.
  for (double v : {1e-3, 1e-6, 1e-9}) CHECK(classic_gains(v, 0.5, {}).k2 <= 0.1 * v);
}

TEST_CASE("classic control law") {
  const VelocityCommand ref{1.7, -0.4};
  const VelocityCommand ff = classic_control({}, ref, {});
  CHECK(ff.v == ref.v);
  CHECK(ff.omega == ref.omega);

  const VelocityCommand c = classic_control({0.1, 0, 0}, {1, 0}, {0.6, 0.1});
  CHECK(c.v == doctest::Approx(1.0 + 0.1 * 1.2 * std::sqrt(0.1)));
  CHECK(c.v == doctest::Approx(1.03795).epsilon(1e-5));

  CHECK_THROWS_AS(ClassicParams({1.5, 0.1}).validate(), Error);
  CHECK_THROWS_AS(ClassicParams({0.6, 0.0}).validate(), Error);
}

TEST_CASE("linearized closed-loop poles match the target polynomial") {
  for (const ClassicParams p : {ClassicParams{0.6, 0.1}, ClassicParams{0.3, 2.0}}) {
    for (double v : {-2.0, -0.1, 0.0, 0.1, 1.0, 3.0}) {
      for (double w : {-12.0, -0.1, 0.0, 0.1, 4.0}) {
        if (std::abs(v) < 0.1 && std::abs(w) < 0.1) continue;
        const double wn = classic_gains(v, w, p).natural_frequency;
        const Roots want = target_roots(p.zeta, wn);
        const Roots got = closed_loop_roots(v, w, p);
        for (int k = 0; k < 3; ++k) CHECK(std::abs(got[k] - want[k]) <= 1e-6 * std::abs(want[k]));
      }
    }
  }
}
