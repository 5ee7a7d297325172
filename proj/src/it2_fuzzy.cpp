#include "wmr/it2_fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "wmr/error.hpp"

namespace wmr {

namespace {

constexpr double kEnvelopeTol = 1e-9;

// Extremes of each premise over one trajectory, without the degeneracy check.
LinguisticBounds raw_bounds(const ReferenceTrajectory& traj, const ErrorBox& box) {
  const VelocityExtrema ex = velocity_extrema(traj);
  const double s = sinc(std::min(box.etheta, kPi));
  LinguisticBounds b;
  b.var[0] = {ex.omega_max, ex.omega_min};
  b.var[1] = {std::max({ex.v_max, ex.v_min, ex.v_max * s, ex.v_min * s}),
              std::min({ex.v_max, ex.v_min, ex.v_max * s, ex.v_min * s})};
  b.var[2] = {box.ey, -box.ey};
  b.var[3] = {box.ex, -box.ex};
  return b;
}

}  // namespace

void UncertaintyGrid::validate() const {
  if (n < 1) throw Error(ErrorCode::kConfig, "uncertainty grid needs at least one sample per axis");
  if (!(x.lo <= x.hi) || !(y.lo <= y.hi)) {
    throw Error(ErrorCode::kConfig, "uncertainty ranges must be ordered (lo <= hi)");
  }
}

std::vector<Vec2> uncertainty_grid(const UncertaintyGrid& grid) {
  grid.validate();
  const auto axis = [&](const Range& r) {
    std::vector<double> values;
    for (int j = 0; j < grid.n; ++j) {
      values.push_back(grid.n == 1 ? r.lo : r.lo + j * (r.hi - r.lo) / (grid.n - 1));
    }
    return values;
  };
  std::vector<Vec2> points;
  for (double x : axis(grid.x)) {
    for (double y : axis(grid.y)) points.emplace_back(x, y);
  }
  return points;
}

IntervalBounds interval_bounds(const UncertaintyGrid& grid, const PathBuilder& build,
                               const ErrorBox& box) {
  IntervalBounds out;
  bool first = true;
  for (const Vec2& start : uncertainty_grid(grid)) {
    LinguisticBounds b;
    try {
      b = raw_bounds(build(start), box);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInvalidSpec && e.code() != ErrorCode::kSingularPath) throw;
      ++out.skipped;
      continue;
    }
    ++out.members;
    if (first) {
      out.lower = b;
      out.upper = b;
      first = false;
      continue;
    }
    for (int k = 0; k < kPremiseCount; ++k) {
      out.upper.var[k].upper = std::max(out.upper.var[k].upper, b.var[k].upper);
      out.upper.var[k].lower = std::min(out.upper.var[k].lower, b.var[k].lower);
      out.lower.var[k].upper = std::min(out.lower.var[k].upper, b.var[k].upper);
      out.lower.var[k].lower = std::max(out.lower.var[k].lower, b.var[k].lower);
    }
  }
  if (out.members == 0) {
    throw Error(ErrorCode::kInvalidSpec, "no grid point of the uncertainty range yields a valid path");
  }
  for (int k = 0; k < kPremiseCount; ++k) {
    if (out.lower.var[k].width() < kEnvelopeTol) {
      throw Error(ErrorCode::kUncertaintyTooWide,
                  std::string("uncertainty too wide: lower envelope of ") +
                      LinguisticBounds::name(k) + " collapses");
    }
    out.interval_typed[k] =
        std::abs(out.upper.var[k].upper - out.lower.var[k].upper) > kEnvelopeTol ||
        std::abs(out.upper.var[k].lower - out.lower.var[k].lower) > kEnvelopeTol;
  }
  check_bounds(out.upper);
  return out;
}

IntervalBounds interval_bounds(const UncertaintyGrid& grid, const PathSpec& path,
                               std::size_t count, const ErrorBox& box) {
  const PathBuilder build = [&](const Vec2& start) {
    PathSpec spec = path;
    spec.start.x = start.x();
    spec.start.y = start.y();
    return reference_trajectory(polygon_from_spec(spec), spec.duration, count);
  };
  return interval_bounds(grid, build, box);
}

IntervalGrades interval_grades(const Premises& z, const IntervalBounds& bounds, bool clamp) {
  const Grades a = membership_grades(z, bounds.lower, clamp);
  const Grades b = membership_grades(z, bounds.upper, clamp);
  return {a.cwiseMin(b), a.cwiseMax(b)};
}

IntervalFiringStrengths interval_firing(const IntervalGrades& grades) {
  return {firing_strengths(grades.lower), firing_strengths(grades.upper)};
}

VelocityCommand it2_pdc_control(const TrackingError& e, const IntervalFiringStrengths& fs,
                                std::span<const Mat23> gains, const VelocityCommand& reference) {
  const Eigen::Vector2d u =
      0.5 * (pdc_feedback(e, fs.lower.h, gains) + pdc_feedback(e, fs.upper.h, gains));
  return {reference.v * std::cos(e.etheta) + u.x(), reference.omega + u.y()};
}

Mat3 it2_closed_loop_matrix(const IntervalFiringStrengths& fs, const TsModel& model,
                            std::span<const Mat23> gains) {
  const auto g = [&](int i, int j) -> Mat3 {
    return model.rules[i].A - model.rules[i].B * gains[j];
  };
  const auto half = [&](const RuleWeights& h) {
    Mat3 acc = Mat3::Zero();
    for (int i = 0; i < kRuleCount; ++i) {
      acc += h[i] * h[i] * g(i, i);
      for (int j = i + 1; j < kRuleCount; ++j) acc += h[i] * h[j] * (g(i, j) + g(j, i));
    }
    return acc;
  };
  return 0.5 * (half(fs.upper.h) + half(fs.lower.h));
}

void write_interval_summary(std::ostream& out, const IntervalBounds& bounds) {
  out << std::setprecision(9) << "members: " << bounds.members << " skipped: " << bounds.skipped
      << '\n';
  for (int k = 0; k < kPremiseCount; ++k) {
    out << LinguisticBounds::name(k) << ": "
        << (bounds.interval_typed[k] ? "interval" : "crisp") << " upper-envelope=["
        << bounds.upper.var[k].lower << ", " << bounds.upper.var[k].upper
        << "] lower-envelope=[" << bounds.lower.var[k].lower << ", "
        << bounds.lower.var[k].upper << "]\n";
  }
}

}  // namespace wmr
