#include "wmr/path_model.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace wmr {

namespace {

void check_eta(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    std::ostringstream msg;
    msg << "curve parameter eta=" << eta << " outside [0, 1]";
    throw Error(ErrorCode::kDomain, msg.str());
  }
}

// Real roots of a*x^2 + b*x + c inside [0, 1]. Coefficients below `eps` are treated as zero.
std::vector<double> unit_roots(double a, double b, double c, double eps) {
  std::vector<double> roots;
  if (std::abs(a) <= eps) {
    if (std::abs(b) > eps) roots.push_back(-c / b);
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      // Numerically stable pair.
      const double q = -0.5 * (b + std::copysign(sq, b));
      roots.push_back(q / a);
      if (q != 0.0) roots.push_back(c / q);
    }
  }
  std::erase_if(roots, [](double r) { return !(r >= 0.0 && r <= 1.0); });
  return roots;
}

std::string eta_message(const char* what, double eta) {
  std::ostringstream msg;
  msg << what << " at eta=" << std::setprecision(9) << eta;
  return msg.str();
}

// Throws if the analytic first derivative vanishes anywhere on [0, 1].
void check_regular(const ControlPolygon& cp) {
  const Vec2 a = cp[1] - cp[0];
  const Vec2 b = cp[2] - cp[1];
  const Vec2 c = cp[3] - cp[2];
  // B'(eta)/3 = alpha eta^2 + beta eta + gamma
  const Vec2 alpha = a - 2.0 * b + c;
  const Vec2 beta = 2.0 * (b - a);
  const Vec2 gamma = a;
  const double scale = std::max({a.norm(), b.norm(), c.norm()});
  const double tol = 1e-9 * scale;

  const auto component = [&](int k, double eta) {
    return (alpha[k] * eta + beta[k]) * eta + gamma[k];
  };

  for (int k = 0; k < 2; ++k) {
    const bool identically_zero =
        std::abs(alpha[k]) <= tol && std::abs(beta[k]) <= tol && std::abs(gamma[k]) <= tol;
    if (identically_zero) continue;
    for (double eta : unit_roots(alpha[k], beta[k], gamma[k], 1e-14 * scale)) {
      if (std::abs(component(1 - k, eta)) <= tol) {
        throw Error(ErrorCode::kSingularPath, eta_message("path tangent vanishes", eta));
      }
    }
    return;
  }
  // Both components identically zero is excluded by p0 != p3.
}

}  // namespace

ControlPolygon::ControlPolygon(const Vec2& p0, const Vec2& p1, const Vec2& p2, const Vec2& p3)
    : points_{p0, p1, p2, p3} {
  for (const auto& p : points_) {
    if (!p.allFinite()) throw Error(ErrorCode::kInvalidSpec, "control point is not finite");
  }
  if ((p3 - p0).norm() == 0.0) {
    throw Error(ErrorCode::kInvalidSpec, "degenerate control polygon: p0 == p3");
  }
}

void PathSpec::validate() const {
  if (!(depart_distance > 0.0) || !(approach_distance > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "departure and approach distances must be positive");
  }
  if (!(duration > 0.0)) throw Error(ErrorCode::kInvalidSpec, "path duration must be positive");
}

ReferenceTrajectory::ReferenceTrajectory(std::vector<ReferenceSample> samples, double duration)
    : samples_(std::move(samples)), duration_(duration) {
  if (samples_.size() < 2) {
    throw Error(ErrorCode::kInvalidSpec, "reference trajectory needs at least two samples");
  }
}

ReferenceSample ReferenceTrajectory::at(double t) const {
  if (t >= duration_) {
    ReferenceSample hold = samples_.back();
    hold.t = t;
    hold.velocity = {};
    return hold;
  }
  if (t <= 0.0) return samples_.front();

  const double s = t / duration_ * static_cast<double>(samples_.size() - 1);
  const auto k = std::min(static_cast<std::size_t>(s), samples_.size() - 2);
  const double w = s - static_cast<double>(k);
  const ReferenceSample& a = samples_[k];
  const ReferenceSample& b = samples_[k + 1];
  const auto lerp = [w](double u, double v) { return u + w * (v - u); };

  ReferenceSample out;
  out.eta = lerp(a.eta, b.eta);
  out.t = t;
  out.pose = {lerp(a.pose.x, b.pose.x), lerp(a.pose.y, b.pose.y),
              lerp(a.pose.theta, b.pose.theta)};
  out.velocity = {lerp(a.velocity.v, b.velocity.v), lerp(a.velocity.omega, b.velocity.omega)};
  return out;
}

Vec2 bezier_point(const ControlPolygon& cp, double eta) {
  check_eta(eta);
  const double u = 1.0 - eta;
  return u * u * u * cp[0] + 3.0 * u * u * eta * cp[1] + 3.0 * u * eta * eta * cp[2] +
         eta * eta * eta * cp[3];
}

BezierDerivatives bezier_derivatives(const ControlPolygon& cp, double eta) {
  check_eta(eta);
  const double u = 1.0 - eta;
  const Vec2 a = cp[1] - cp[0];
  const Vec2 b = cp[2] - cp[1];
  const Vec2 c = cp[3] - cp[2];
  return {3.0 * (u * u * a + 2.0 * u * eta * b + eta * eta * c),
          6.0 * (u * (b - a) + eta * (c - b))};
}

ControlPolygon polygon_from_spec(const PathSpec& spec) {
  spec.validate();
  const Vec2 p0(spec.start.x, spec.start.y);
  const Vec2 p3(spec.end.x, spec.end.y);
  const Vec2 heading_i(std::cos(spec.start.theta), std::sin(spec.start.theta));
  const Vec2 heading_f(std::cos(spec.end.theta), std::sin(spec.end.theta));
  return ControlPolygon(p0, p0 + spec.depart_distance * heading_i,
                        p3 - spec.approach_distance * heading_f, p3);
}

ReferenceTrajectory reference_trajectory(const ControlPolygon& cp, double duration,
                                         std::size_t count) {
  if (count < 2) throw Error(ErrorCode::kInvalidSpec, "sample count must be at least 2");
  if (!(duration > 0.0)) throw Error(ErrorCode::kInvalidSpec, "path duration must be positive");
  check_regular(cp);

  const double scale = std::max({(cp[1] - cp[0]).norm(), (cp[2] - cp[1]).norm(),
                                 (cp[3] - cp[2]).norm()});
  std::vector<ReferenceSample> samples;
  samples.reserve(count);
  double previous_theta = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double eta = (k + 1 == count) ? 1.0 : static_cast<double>(k) / (count - 1);
    const Vec2 p = bezier_point(cp, eta);
    const auto [d1, d2] = bezier_derivatives(cp, eta);
    const double speed_sq = d1.squaredNorm();
    if (std::sqrt(speed_sq) <= 1e-9 * scale) {
      throw Error(ErrorCode::kSingularPath, eta_message("path tangent vanishes", eta));
    }
    double theta = std::atan2(d1.y(), d1.x());
    if (k > 0) {
      theta = previous_theta + wrap_angle(theta - previous_theta);
    }
    previous_theta = theta;

    ReferenceSample s;
    s.eta = eta;
    s.t = eta * duration;
    s.pose = {p.x(), p.y(), theta};
    s.velocity.v = std::sqrt(speed_sq) / duration;
    s.velocity.omega = (d1.x() * d2.y() - d1.y() * d2.x()) / speed_sq / duration;
    samples.push_back(s);
  }
  return ReferenceTrajectory(std::move(samples), duration);
}

double arc_length(const ControlPolygon& cp, int panels) {
  static constexpr std::array<double, 5> nodes = {
      0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
  static constexpr std::array<double, 5> weights = {
      0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
      0.2369268850561891};

  const auto composite = [&](int n) {
    double total = 0.0;
    const double h = 1.0 / n;
    for (int p = 0; p < n; ++p) {
      const double mid = (p + 0.5) * h;
      double panel = 0.0;
      for (std::size_t q = 0; q < nodes.size(); ++q) {
        panel += weights[q] * bezier_derivatives(cp, mid + 0.5 * h * nodes[q]).first.norm();
      }
      total += 0.5 * h * panel;
    }
    return total;
  };

  panels = std::max(panels, 1);
  double coarse = composite(panels);
  for (int level = 0; level < 12; ++level) {
    panels *= 2;
    const double fine = composite(panels);
    if (std::abs(fine - coarse) <= 1e-12 * std::abs(fine)) return fine;
    coarse = fine;
  }
  return coarse;
}

VelocityExtrema velocity_extrema(const ReferenceTrajectory& traj) {
  const auto& s = traj.samples();
  VelocityExtrema ex{s.front().velocity.v, s.front().velocity.v, s.front().velocity.omega,
                     s.front().velocity.omega};
  for (const auto& sample : s) {
    ex.v_min = std::min(ex.v_min, sample.velocity.v);
    ex.v_max = std::max(ex.v_max, sample.velocity.v);
    ex.omega_min = std::min(ex.omega_min, sample.velocity.omega);
    ex.omega_max = std::max(ex.omega_max, sample.velocity.omega);
  }
  return ex;
}

void write_trajectory_csv(std::ostream& out, const ReferenceTrajectory& traj) {
  out << "eta,t,x_r,y_r,theta_r,v_r,omega_r\n";
  out << std::setprecision(9);
  for (const auto& s : traj.samples()) {
    out << s.eta << ',' << s.t << ',' << s.pose.x << ',' << s.pose.y << ',' << s.pose.theta << ','
        << s.velocity.v << ',' << s.velocity.omega << '\n';
  }
}

}  // namespace wmr
