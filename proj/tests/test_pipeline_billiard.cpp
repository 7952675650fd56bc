#include <gtest/gtest.h>

#include "feres/circle_billiard.hpp"
#include "feres/pipeline_billiard.hpp"

using namespace feres;

namespace {

// Starting angle t0 such that branch `b` sends it to `target`.
double preimage(Branch b, double target, double a) {
  switch (b) {
    case Branch::advance: return target - 2 * a;
    case Branch::retreat: return target + 2 * a;
    default: return 0.0;
  }
}

}  // namespace

TEST(PipelineStep, VerticalChord) {
  const BaseAngle alpha = BaseAngle::real(0.3);
  const PipelineStep s = pipeline_step({2.0, Wall::bottom, preimage(Branch::advance, kPi / 2, 0.3)}, Branch::advance, alpha);
  EXPECT_NEAR(s.flight_length, 1.0, 1e-15);
  EXPECT_NEAR(s.state.s, 2.0, 1e-15);
  EXPECT_EQ(s.state.wall, Wall::top);
}

TEST(PipelineStep, FortyFiveDegrees) {
  const BaseAngle alpha = BaseAngle::real(0.3);
  const PipelineStep s = pipeline_step({0.0, Wall::bottom, preimage(Branch::retreat, kPi / 4, 0.3)}, Branch::retreat, alpha);
  EXPECT_NEAR(s.flight_length, std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(s.state.s, 1.0, 1e-14);
  const PipelineStep back = pipeline_step({0.0, Wall::top, preimage(Branch::retreat, kPi / 4, 0.3)}, Branch::retreat, alpha);
  EXPECT_NEAR(back.state.s, -1.0, 1e-14);
  EXPECT_EQ(back.state.wall, Wall::bottom);
}

TEST(PipelineStep, ThirtyDegreesFliesTwoUnits) {
  const BaseAngle alpha = BaseAngle::real(0.3);
  const PipelineStep s = pipeline_step({0.0, Wall::bottom, preimage(Branch::retreat, kPi / 6, 0.3)}, Branch::retreat, alpha);
  EXPECT_NEAR(s.flight_length, 2.0, 1e-14);
}

TEST(PipelineStep, InadmissibleBranchThrows) {
  EXPECT_THROW(pipeline_step({0.0, Wall::bottom, 0.1}, Branch::retreat, BaseAngle::real(0.3)), Error);
}

TEST(PipelineJacobian, OneStep) {
  const PipelineJacobian j = pipeline_jacobian_step({}, kPi / 2, 1.0, +1);
  EXPECT_DOUBLE_EQ(j.offdiag, 1.0);
  EXPECT_EQ(j.parity, -1);
  EXPECT_EQ(j.n, 1);
}

TEST(PipelineJacobian, ConstantPositiveTerms) {
  PipelineJacobian j;
  for (int i = 0; i < 25; ++i) j = pipeline_jacobian_step(j, kPi / 6, 2.0, +1);
  EXPECT_NEAR(j.offdiag, 4.0 * 25, 1e-12);
  EXPECT_EQ(j.parity, -1);
}

TEST(PipelineJacobian, AlternatingSignsTelescope) {
  PipelineJacobian j;
  for (int i = 0; i < 10; ++i) {
    j = pipeline_jacobian_step(j, kPi / 3, 1.5, i % 2 == 0 ? +1 : -1);
    const double term = 1.5 / std::sin(kPi / 3);
    EXPECT_TRUE(std::abs(j.offdiag) < 1e-12 || std::abs(j.offdiag - term) < 1e-12);
  }
}

TEST(PipelineJacobian, ParityTracksStepCount) {
  PipelineJacobian j;
  for (int i = 1; i <= 9; ++i) {
    j = pipeline_jacobian_step(j, 1.0, 1.0, -1);
    EXPECT_EQ(j.parity, i % 2 == 0 ? 1 : -1);
  }
}

TEST(SimulatePipeline, AngleSequenceMatchesTheCircle) {
  for (const BaseAngle& alpha : {BaseAngle::rational(1, 7), BaseAngle::real(0.5)}) {
    const Trajectory circle = simulate({0.0, 1.0}, 5000, alpha, 31);
    const PipelineTrajectory pipe = simulate_pipeline({0.0, Wall::bottom, 1.0}, 5000, alpha, 31);
    ASSERT_EQ(circle.points.size(), pipe.states.size());
    for (std::size_t k = 0; k < pipe.states.size(); ++k) ASSERT_EQ(circle.points[k].theta, pipe.states[k].theta);
    EXPECT_EQ(circle.branches, pipe.branches);
  }
}

TEST(SimulatePipeline, WallsAlternate) {
  const PipelineTrajectory t = simulate_pipeline({0.0, Wall::bottom, 1.0}, 100, BaseAngle::real(0.5), 2);
  for (std::size_t k = 0; k < t.states.size(); ++k) EXPECT_EQ(t.states[k].wall, k % 2 == 0 ? Wall::bottom : Wall::top);
  for (std::size_t k = 0; k < t.length(); ++k) {
    EXPECT_NEAR(t.flight_lengths[k], 1.0 / std::sin(t.states[k + 1].theta), 1e-15);
  }
}

TEST(PipelineLyapunov, HorizontalVectorIsExactlyZero) {
  const auto r = pipeline_lyapunov({0.0, Wall::bottom, kPi / 20}, BaseAngle::rational(1, 7), 1000, 5, {1.0, 0.0});
  EXPECT_EQ(r.estimate, 0.0);
}

TEST(PipelineLyapunov, LongRunIsNearZeroAndBounded) {
  const auto r = pipeline_lyapunov({0.0, Wall::bottom, kPi / 20}, BaseAngle::rational(1, 7), 100000, 5, {0.0, 1.0});
  EXPECT_LT(std::abs(r.estimate), 5e-3);
  EXPECT_TRUE(r.bound_respected);
  EXPECT_EQ(r.jacobian.parity, 1);
  EXPECT_LE(std::abs(r.jacobian.offdiag), 100000 * r.max_flight / r.min_sine);
}

TEST(PipelineLyapunov, SingleStepIsFinite) {
  const auto r = pipeline_lyapunov({0.0, Wall::bottom, 1.0}, BaseAngle::rational(1, 7), 1, 5, {0.3, 0.7});
  EXPECT_TRUE(std::isfinite(r.estimate));
}

TEST(PipelineLyapunov, Preconditions) {
  EXPECT_THROW(pipeline_lyapunov({0.0, Wall::bottom, 1.0}, BaseAngle::rational(1, 7), 10, 5, {0.0, 0.0}), Error);
  EXPECT_THROW(pipeline_lyapunov({0.0, Wall::bottom, 1.0}, BaseAngle::real(0.5), 10, 5, {0.0, 1.0}), Error);
  EXPECT_NO_THROW(pipeline_lyapunov({0.0, Wall::bottom, 1.0}, BaseAngle::real(0.5), 10, 5, {0.0, 1.0}, false));
}

TEST(PipelineLyapunov, MinimumSineComesFromTheReachableSet) {
  const double m = min_reachable_sine(Angle::pi_fraction(1, 20), BaseAngle::rational(1, 7));
  EXPECT_NEAR(m, std::sin(kPi / 20), 1e-15);
}
