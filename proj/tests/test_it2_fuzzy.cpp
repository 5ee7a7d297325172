#include <cmath>
#include <random>

#include "doctest.h"
#include "scenario.hpp"
#include "wmr/it2_fuzzy.hpp"

using namespace wmr;

namespace {

// Two-sample trajectory with given speed and turn-rate ranges.
ReferenceTrajectory synthetic(double v_lo, double v_hi, double w_lo, double w_hi) {
  std::vector<ReferenceSample> s(2);
  s[0].velocity = {v_lo, w_lo};
  s[1].eta = s[1].t = 1.0;
  s[1].velocity = {v_hi, w_hi};
  return ReferenceTrajectory(s, 1.0);
}

GainSet random_gains(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  GainSet F(kRuleCount);
  for (auto& f : F) f = Mat23::NullaryExpr([&] { return u(rng); });
  return F;
}

IntervalFiringStrengths same(const FiringStrengths& fs) { return {fs, fs}; }

}  // namespace

TEST_CASE("uncertainty grid spacing") {
  UncertaintyGrid g;
  g.n = 1;
  const auto one = uncertainty_grid(g);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == Vec2(0.7, 0.5));

  g = {{0, 1}, {0, 1}, 2};
  const auto corners = uncertainty_grid(g);
  REQUIRE(corners.size() == 4);
  CHECK(corners[0] == Vec2(0, 0));
  CHECK(corners[1] == Vec2(0, 1));
  CHECK(corners[2] == Vec2(1, 0));
  CHECK(corners[3] == Vec2(1, 1));

  g = {{0.7, 1.5}, {0.5, 0.9}, 3};
  const auto three = uncertainty_grid(g);
  REQUIRE(three.size() == 9);
  CHECK(three[0].x() == doctest::Approx(0.7));
  CHECK(three[3].x() == doctest::Approx(1.1));
  CHECK(three[6].x() == doctest::Approx(1.5));

  g.n = 0;
  CHECK_THROWS_AS(uncertainty_grid(g), Error);
  g = {{1.0, 0.5}, {0, 1}, 2};
  CHECK_THROWS_AS(uncertainty_grid(g), Error);
}

TEST_CASE("single-member grid reproduces the Type I zoning") {
  const PathSpec spec = test::u_turn_spec();
  UncertaintyGrid g{{spec.start.x, 2.0}, {spec.start.y, 2.0}, 1};
  const IntervalBounds ib = interval_bounds(g, spec, 2001, ErrorBox{});
  const LinguisticBounds t1 = compute_bounds(test::u_turn(), ErrorBox{});
  CHECK(ib.members == 1);
  CHECK(ib.skipped == 0);
  for (int k = 0; k < kPremiseCount; ++k) {
    CHECK(ib.lower.var[k].upper == t1.var[k].upper);
    CHECK(ib.lower.var[k].lower == t1.var[k].lower);
    CHECK(ib.upper.var[k].upper == t1.var[k].upper);
    CHECK(ib.upper.var[k].lower == t1.var[k].lower);
    CHECK_FALSE(ib.interval_typed[k]);
  }
}

TEST_CASE("varying the start height makes omega interval-typed") {
  const PathSpec spec = test::u_turn_spec();
  UncertaintyGrid g{{0.4, 0.4}, {0.6, 0.8}, 3};
  const IntervalBounds ib = interval_bounds(g, spec, 2001, ErrorBox{});

  // Oracle: recompute the extremes of each member path directly.
  double max_hi = -INFINITY, min_hi = INFINITY;
  for (double y : {0.6, 0.7, 0.8}) {
    PathSpec s = spec;
    s.start.y = y;
    const auto ex = velocity_extrema(reference_trajectory(polygon_from_spec(s), 1.0, 2001));
    max_hi = std::max(max_hi, ex.omega_max);
    min_hi = std::min(min_hi, ex.omega_max);
  }
  CHECK(ib.members == 9);
  CHECK(ib.upper.var[0].upper == max_hi);
  CHECK(ib.lower.var[0].upper == min_hi);
  CHECK(ib.interval_typed[0]);
  CHECK_FALSE(ib.interval_typed[2]);
  CHECK_FALSE(ib.interval_typed[3]);
  for (int k = 0; k < kPremiseCount; ++k) {
    CHECK(ib.upper.var[k].upper >= ib.lower.var[k].upper);
    CHECK(ib.upper.var[k].lower <= ib.lower.var[k].lower);
  }
}

TEST_CASE("singular members of the default grid are skipped and counted") {
  const IntervalBounds ib = interval_bounds(UncertaintyGrid{}, test::u_turn_spec(), 2001, ErrorBox{});
  // x = 1.5 lies on the end point's vertical: cusps, and p0 == p3 at y = 0.7.
  CHECK(ib.skipped == 5);
  CHECK(ib.members == 20);
}

TEST_CASE("envelopes that do not overlap are rejected") {
  int call = 0;
  const PathBuilder build = [&](const Vec2&) {
    return call++ == 0 ? synthetic(1, 2, -3, -1) : synthetic(1, 2, 1, 3);
  };
  try {
    interval_bounds({{0, 1}, {0, 0}, 2}, build, ErrorBox{});
    FAIL("collapsed lower envelope accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUncertaintyTooWide);
    CHECK(std::string(e.what()).find("z1") != std::string::npos);
  }
}

TEST_CASE("interval grades") {
  int call = 0;
  const PathBuilder build = [&](const Vec2&) {
    return call++ == 0 ? synthetic(1, 3, -4, 4) : synthetic(1, 3, -6, 6);
  };
  const IntervalBounds ib = interval_bounds({{0, 1}, {0, 0}, 2}, build, ErrorBox{});
  CHECK(ib.interval_typed[0]);
  CHECK_FALSE(ib.interval_typed[1]);

  const IntervalGrades g = interval_grades({2, 2, 0.1, -0.1}, ib);
  // z1 = 2: grade 0.75 against +-4 and 2/3 against +-6.
  CHECK(g.lower(0, 0) == doctest::Approx(2.0 / 3));
  CHECK(g.upper(0, 0) == doctest::Approx(0.75));
  for (int k = 1; k < 4; ++k) CHECK(g.lower(k, 0) == g.upper(k, 0));
  CHECK((g.lower.array() <= g.upper.array()).all());

  const IntervalGrades top = interval_grades({6, 2, 0, 0}, ib);
  CHECK(top.upper(0, 0) == 1.0);
}

TEST_CASE("interval firing strengths") {
  LinguisticBounds b;
  b.var = {Interval{1, 0}, Interval{1, 0}, Interval{1, 0}, Interval{1, 0}};
  IntervalBounds crisp{b, b, {}, 1, 0};
  const IntervalFiringStrengths same_fs =
      interval_firing(interval_grades({0.3, 0.9, 0.5, 0.1}, crisp));
  const FiringStrengths t1 = firing_strengths(membership_grades({0.3, 0.9, 0.5, 0.1}, b));
  CHECK(same_fs.lower.h == t1.h);
  CHECK(same_fs.upper.h == t1.h);

  // z1 has grade interval [0.4, 0.6] while the others sit crisply at their upper corner.
  IntervalGrades g;
  g.lower << 0.4, 0.4, 1, 0, 1, 0, 1, 0;
  g.upper << 0.6, 0.6, 1, 0, 1, 0, 1, 0;
  const IntervalFiringStrengths fs = interval_firing(g);
  // Hand products: rule 0 (z1 upper label) and rule 8 (z1 lower label) fire.
  CHECK(fs.lower.w[0] == doctest::Approx(0.4));
  CHECK(fs.lower.w[8] == doctest::Approx(0.4));
  CHECK(fs.upper.w[0] == doctest::Approx(0.6));
  CHECK(fs.lower.h[0] == doctest::Approx(0.5));
  CHECK(fs.upper.h[0] == doctest::Approx(0.5));
  CHECK(fs.lower.w[0] != fs.upper.w[0]);
  CHECK(fs.lower.h.sum() == doctest::Approx(1.0));
  CHECK(fs.upper.h.sum() == doctest::Approx(1.0));
}

TEST_CASE("members with one-sided or symmetric spread are bracketed by the envelopes") {
  // Symmetric omega ranges and speed ranges that share the lower end.
  const std::vector<ReferenceTrajectory> members = {
      synthetic(1.0, 2.5, -8, 8), synthetic(1.0, 3.0, -10, 10), synthetic(1.0, 2.8, -9, 9)};
  int call = 0;
  const PathBuilder build = [&](const Vec2&) { return members[call++ % members.size()]; };
  const ErrorBox box{0.2, 0.2, 1e-3};
  const IntervalBounds ib = interval_bounds({{0, 2}, {0, 0}, 3}, build, box);

  std::mt19937 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 0; n < 500; ++n) {
    const Premises z(8 * u(rng), 1.75 + 0.75 * u(rng), 0.2 * u(rng), 0.2 * u(rng));
    const IntervalFiringStrengths fs = interval_firing(interval_grades(z, ib));
    for (const auto& m : members) {
      const FiringStrengths t1 = firing_strengths(membership_grades(z, compute_bounds(m, box)));
      CHECK((t1.w.array() >= fs.lower.w.array() - 1e-12).all());
      CHECK((t1.w.array() <= fs.upper.w.array() + 1e-12).all());
    }
  }
}

TEST_CASE("type-reduced control law") {
  std::mt19937 rng(12);
  const GainSet F = random_gains(rng);
  const TsModel m = test::u_turn_model();
  const VelocityCommand ref{1.5, 2.0};
  const TrackingError e{0.1, -0.05, 0.2};

  const FiringStrengths t1 =
      firing_strengths(membership_grades(linguistic_values(e, ref.v, ref.omega), m.bounds));
  const VelocityCommand a = it2_pdc_control(e, same(t1), F, ref);
  const VelocityCommand b = pdc_control(e, t1.h, F, ref);
  CHECK(a.v == doctest::Approx(b.v).epsilon(1e-14));
  CHECK(a.omega == doctest::Approx(b.omega).epsilon(1e-14));

  IntervalFiringStrengths fs;
  fs.lower.h = RuleWeights::Constant(1.0 / 16);
  fs.upper.h = RuleWeights::Zero();
  fs.upper.h[3] = 1.0;
  const VelocityCommand ff = it2_pdc_control({}, fs, F, ref);
  CHECK(ff.v == ref.v);
  CHECK(ff.omega == ref.omega);

  const GainSet flat(kRuleCount, F[7]);
  const VelocityCommand c = it2_pdc_control(e, fs, flat, ref);
  const Eigen::Vector2d ub = -F[7] * e.vec();
  CHECK(c.v == doctest::Approx(ref.v * std::cos(e.etheta) + ub.x()));
  CHECK(c.omega == doctest::Approx(ref.omega + ub.y()));
}

TEST_CASE("interval closed-loop matrix") {
  std::mt19937 rng(31);
  const GainSet F = random_gains(rng);
  const TsModel m = test::u_turn_model();
  const auto G = [&](int i, int j) -> Mat3 { return m.rules[i].A - m.rules[i].B * F[j]; };

  RuleWeights one = RuleWeights::Zero();
  one[4] = 1.0;
  FiringStrengths fs1{one, one};
  CHECK((it2_closed_loop_matrix(same(fs1), m, F) - G(4, 4)).norm() < 1e-12);

  // Uniform weights against the plain double sum.
  FiringStrengths uni{RuleWeights::Constant(1.0 / 16), RuleWeights::Constant(1.0 / 16)};
  Mat3 oracle = Mat3::Zero();
  for (int i = 0; i < kRuleCount; ++i)
    for (int j = 0; j < kRuleCount; ++j) oracle += G(i, j) / 256.0;
  CHECK((it2_closed_loop_matrix(same(uni), m, F) - oracle).norm() < 1e-10);

  // Random interval weights against the average of the two double sums.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  IntervalFiringStrengths fs;
  for (auto* h : {&fs.lower.h, &fs.upper.h}) {
    for (auto& x : *h) x = u(rng);
    *h /= h->sum();
  }
  Mat3 avg = Mat3::Zero();
  for (const auto* h : {&fs.lower.h, &fs.upper.h})
    for (int i = 0; i < kRuleCount; ++i)
      for (int j = 0; j < kRuleCount; ++j) avg += 0.5 * (*h)[i] * (*h)[j] * G(i, j);
  CHECK((it2_closed_loop_matrix(fs, m, F) - avg).norm() < 1e-10);

  // Coefficient mass: with every G_ij = I the result is I.
  TsModel ident = m;
  for (auto& r : ident.rules) {
    r.A = Mat3::Identity();
    r.B.setZero();
  }
  CHECK((it2_closed_loop_matrix(fs, ident, F) - Mat3::Identity()).norm() < 1e-12);
}
