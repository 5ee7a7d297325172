#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "wmr/path_model.hpp"
#include "wmr/ts_type1.hpp"

namespace wmr {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Uncertain initial point: x_i in x, y_i in y, `n` samples per axis.
struct UncertaintyGrid {
  Range x{0.7, 1.5};
  Range y{0.5, 0.9};
  int n = 5;

  void validate() const;
};

/// Outer (upper) and inner (lower) envelopes of the zoning over the grid.
struct IntervalBounds {
  LinguisticBounds lower;
  LinguisticBounds upper;
  std::array<bool, kPremiseCount> interval_typed{};
  int members = 0;  // grid paths that contributed
  int skipped = 0;  // grid paths rejected as invalid or singular
};

struct IntervalGrades {
  Grades lower;
  Grades upper;
};

struct IntervalFiringStrengths {
  FiringStrengths lower;
  FiringStrengths upper;
};

/// N x N samples including both range ends (N = 1 gives the range start).
std::vector<Vec2> uncertainty_grid(const UncertaintyGrid& grid);

/// Builds the reference for an initial point; used to rebuild the path per grid member.
using PathBuilder = std::function<ReferenceTrajectory(const Vec2& start)>;

/// Per-member bounds; upper envelope = (max of maxima, min of minima), lower
/// envelope = (min of maxima, max of minima). Members whose path is invalid or
/// singular are skipped and counted. Throws kUncertaintyTooWide when the lower
/// envelope of a variable collapses, kInvalidSpec when no member survives.
IntervalBounds interval_bounds(const UncertaintyGrid& grid, const PathBuilder& build,
                               const ErrorBox& box);

/// Convenience overload: varies the start point of `path` and samples `count` points.
IntervalBounds interval_bounds(const UncertaintyGrid& grid, const PathSpec& path,
                               std::size_t count, const ErrorBox& box);

/// Type I grades under both envelopes, reduced per label to (min, max).
IntervalGrades interval_grades(const Premises& z, const IntervalBounds& bounds, bool clamp = true);

IntervalFiringStrengths interval_firing(const IntervalGrades& grades);

/// Average of the lower- and upper-weighted PDC feedback, plus feedforward.
VelocityCommand it2_pdc_control(const TrackingError& e, const IntervalFiringStrengths& fs,
                                std::span<const Mat23> gains, const VelocityCommand& reference);

/// 1/2 [sum_i hu_i^2 G_ii + 2 sum_{i<j} hu_i hu_j (G_ij + G_ji)/2 + (same for hl)],
/// G_ij = A_i - B_i F_j.
Mat3 it2_closed_loop_matrix(const IntervalFiringStrengths& fs, const TsModel& model,
                            std::span<const Mat23> gains);

void write_interval_summary(std::ostream& out, const IntervalBounds& bounds);

}  // namespace wmr
