#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "wmr/path_model.hpp"
#include "wmr/types.hpp"

namespace wmr {

inline constexpr int kPremiseCount = 4;
inline constexpr int kRuleCount = 16;

/// Upper and lower value of one premise variable over the operating range.
struct Interval {
  double upper = 0.0;
  double lower = 0.0;

  double width() const { return upper - lower; }
};

/// Zoning of the four premise variables, indexed like Premises:
/// 0: omega_R, 1: v_R sinc(e_theta), 2: e_y, 3: e_x.
struct LinguisticBounds {
  std::array<Interval, kPremiseCount> var;

  static const char* name(int k);
};

/// Premise vector z = (omega_R, v_R sinc(e_theta), e_y, e_x).
using Premises = Eigen::Vector4d;

/// Membership grades; column 0 is the label anchored at the upper bound
/// (E1, F1, G1, P1), column 1 its complement.
using Grades = Eigen::Matrix<double, kPremiseCount, 2>;

using RuleWeights = Eigen::Matrix<double, kRuleCount, 1>;

using GainSet = std::vector<Mat23>;

struct TsRule {
  int index = 0;                        // 0-based
  std::array<int, kPremiseCount> corner{};  // 0 = upper label, 1 = lower label
  Mat3 A;
  Mat32 B;
};

struct TsModel {
  LinguisticBounds bounds;
  ErrorBox box;
  std::array<TsRule, kRuleCount> rules;
};

struct FiringStrengths {
  RuleWeights w;
  RuleWeights h;
};

/// sin(x)/x with sinc(0) = 1.
double sinc(double x);

Premises linguistic_values(const TrackingError& e, double v_ref, double omega_ref);

/// Bounds from a reference trajectory and the error box. Collapsed intervals
/// (width < 1e-9) throw kDegenerateZoning unless `inflate` > 0, in which case
/// they are widened symmetrically by `inflate`.
LinguisticBounds compute_bounds(const ReferenceTrajectory& traj, const ErrorBox& box,
                                double inflate = 0.0);

/// Throws kDegenerateZoning naming the first collapsed variable.
void check_bounds(const LinguisticBounds& bounds);

Grades membership_grades(const Premises& z, const LinguisticBounds& bounds, bool clamp = true);

/// Corner label of premise `var` in rule `index` (big-endian bits, rule 0 = all upper).
inline int rule_corner(int index, int var) { return (index >> (kPremiseCount - 1 - var)) & 1; }

TsModel build_rules(const LinguisticBounds& bounds, const ErrorBox& box = {});

FiringStrengths firing_strengths(const Grades& grades);

struct BlendedModel {
  Mat3 A;
  Mat32 B;
};

BlendedModel blended_matrices(const RuleWeights& h, const TsModel& model);

/// -sum_i h_i F_i e.
Eigen::Vector2d pdc_feedback(const TrackingError& e, const RuleWeights& h,
                             std::span<const Mat23> gains);

/// Feedforward (v_R cos e_theta, omega_R) plus PDC feedback.
VelocityCommand pdc_control(const TrackingError& e, const RuleWeights& h,
                            std::span<const Mat23> gains, const VelocityCommand& reference);

/// Human-readable audit dump of bounds and all rule matrices.
void write_model_summary(std::ostream& out, const TsModel& model);

}  // namespace wmr
