#include "wmr/ts_type1.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "wmr/error.hpp"

namespace wmr {

namespace {

constexpr double kMinZoneWidth = 1e-9;

Interval span_of(double a, double b, double c, double d) {
  return {std::max({a, b, c, d}), std::min({a, b, c, d})};
}

}  // namespace

const char* LinguisticBounds::name(int k) {
  static constexpr std::array<const char*, kPremiseCount> names = {
      "z1 (omega_R)", "z2 (v_R sinc(e_theta))", "z3 (e_y)", "z4 (e_x)"};
  return names.at(static_cast<std::size_t>(k));
}

double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

Premises linguistic_values(const TrackingError& e, double v_ref, double omega_ref) {
  return {omega_ref, v_ref * sinc(e.etheta), e.ey, e.ex};
}

void check_bounds(const LinguisticBounds& bounds) {
  for (int k = 0; k < kPremiseCount; ++k) {
    if (!(bounds.var[k].width() >= kMinZoneWidth)) {
      throw Error(ErrorCode::kDegenerateZoning,
                  std::string("degenerate zoning for ") + LinguisticBounds::name(k) +
                      ": upper and lower bounds coincide");
    }
  }
}

LinguisticBounds compute_bounds(const ReferenceTrajectory& traj, const ErrorBox& box,
                                double inflate) {
  const VelocityExtrema ex = velocity_extrema(traj);
  // sinc is even and decreasing on [0, pi], so over the box it spans [sinc(box), 1].
  const double sinc_lo = sinc(std::min(box.etheta, kPi));
  LinguisticBounds b;
  b.var[0] = {ex.omega_max, ex.omega_min};
  b.var[1] = span_of(ex.v_max, ex.v_min, ex.v_max * sinc_lo, ex.v_min * sinc_lo);
  b.var[2] = {box.ey, -box.ey};
  b.var[3] = {box.ex, -box.ex};

  if (inflate > 0.0) {
    for (auto& v : b.var) {
      if (v.width() < kMinZoneWidth) {
        v.upper += inflate;
        v.lower -= inflate;
      }
    }
  }
  check_bounds(b);
  return b;
}

Grades membership_grades(const Premises& z, const LinguisticBounds& bounds, bool clamp) {
  Grades g;
  for (int k = 0; k < kPremiseCount; ++k) {
    const Interval& iv = bounds.var[k];
    double upper_grade = (z[k] - iv.lower) / iv.width();
    if (clamp) upper_grade = std::clamp(upper_grade, 0.0, 1.0);
    g(k, 0) = upper_grade;
    g(k, 1) = 1.0 - upper_grade;
  }
  return g;
}

TsModel build_rules(const LinguisticBounds& bounds, const ErrorBox& box) {
  check_bounds(bounds);
  TsModel model;
  model.bounds = bounds;
  model.box = box;
  const auto pick = [&](int var, int label) {
    return label == 0 ? bounds.var[var].upper : bounds.var[var].lower;
  };
  for (int i = 0; i < kRuleCount; ++i) {
    TsRule& rule = model.rules[i];
    rule.index = i;
    for (int k = 0; k < kPremiseCount; ++k) rule.corner[k] = rule_corner(i, k);
    const double e = pick(0, rule.corner[0]);
    const double f = pick(1, rule.corner[1]);
    const double g = pick(2, rule.corner[2]);
    const double p = pick(3, rule.corner[3]);
    rule.A << 0.0, e, 0.0,
              -e, 0.0, f,
              0.0, 0.0, 0.0;
    rule.B << -1.0, g,
              0.0, -p,
              0.0, -1.0;
  }
  return model;
}

FiringStrengths firing_strengths(const Grades& grades) {
  FiringStrengths fs;
  for (int i = 0; i < kRuleCount; ++i) {
    double w = 1.0;
    for (int k = 0; k < kPremiseCount; ++k) w *= grades(k, rule_corner(i, k));
    fs.w[i] = w;
  }
  const double total = fs.w.sum();
  if (!(std::abs(total) >= 1e-300)) {
    throw Error(ErrorCode::kDegenerateFiring, "sum of rule firing strengths vanishes");
  }
  fs.h = fs.w / total;
  return fs;
}

BlendedModel blended_matrices(const RuleWeights& h, const TsModel& model) {
  BlendedModel m{Mat3::Zero(), Mat32::Zero()};
  for (int i = 0; i < kRuleCount; ++i) {
    m.A += h[i] * model.rules[i].A;
    m.B += h[i] * model.rules[i].B;
  }
  return m;
}

Eigen::Vector2d pdc_feedback(const TrackingError& e, const RuleWeights& h,
                             std::span<const Mat23> gains) {
  if (gains.size() != static_cast<std::size_t>(kRuleCount)) {
    throw Error(ErrorCode::kInvalidSpec, "PDC law needs exactly 16 gain matrices");
  }
  Mat23 blended = Mat23::Zero();
  for (int i = 0; i < kRuleCount; ++i) blended += h[i] * gains[i];
  return -blended * e.vec();
}

VelocityCommand pdc_control(const TrackingError& e, const RuleWeights& h,
                            std::span<const Mat23> gains, const VelocityCommand& reference) {
  const Eigen::Vector2d u = pdc_feedback(e, h, gains);
  return {reference.v * std::cos(e.etheta) + u.x(), reference.omega + u.y()};
}

void write_model_summary(std::ostream& out, const TsModel& model) {
  const Eigen::IOFormat fmt(9, 0, " ", "\n", "    ", "");
  out << std::setprecision(9);
  out << "bounds:\n";
  for (int k = 0; k < kPremiseCount; ++k) {
    out << "  " << LinguisticBounds::name(k) << ": upper=" << model.bounds.var[k].upper
        << " lower=" << model.bounds.var[k].lower << '\n';
  }
  out << "box: ex=" << model.box.ex << " ey=" << model.box.ey << " etheta=" << model.box.etheta
      << '\n';
  for (const auto& rule : model.rules) {
    out << "rule " << rule.index + 1 << " corner=(";
    for (int k = 0; k < kPremiseCount; ++k) out << (k ? "," : "") << rule.corner[k] + 1;
    out << ")\n  A:\n" << rule.A.format(fmt) << "\n  B:\n" << rule.B.format(fmt) << '\n';
  }
}

}  // namespace wmr
