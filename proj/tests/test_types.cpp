#include <gtest/gtest.h>

#include <cmath>

#include "cbfrrt/types.hpp"

using namespace cbfrrt;

TEST(ObstacleMotion, StaticObstacleStaysPut) {
  CircleObstacle o{Vec2(1.0, 1.0), 0.5, Vec2::Zero()};
  EXPECT_EQ(obstacle_position_at(o, 7.0), Vec2(1.0, 1.0));
}

TEST(ObstacleMotion, ConstantVelocity) {
  CircleObstacle o{Vec2(0.0, 0.0), 0.5, Vec2(0.1, 0.0)};
  const Vec2 p = obstacle_position_at(o, 2.0);
  EXPECT_NEAR(p.x(), 0.2, 1e-15);
  EXPECT_EQ(p.y(), 0.0);
}

TEST(ObstacleMotion, IdentityAtTimeZeroAndAffine) {
  RandomSource rng(5);
  for (int i = 0; i < 100; ++i) {
    CircleObstacle o{Vec2(rng.uniform(-5, 5), rng.uniform(-5, 5)), 1.0,
                     Vec2(rng.uniform(-1, 1), rng.uniform(-1, 1))};
    const double t = rng.uniform(0, 10);
    EXPECT_EQ(obstacle_position_at(o, 0.0), o.center0);
    const Vec2 d1 = obstacle_position_at(o, 2 * t) - obstacle_position_at(o, t);
    const Vec2 d0 = obstacle_position_at(o, t) - obstacle_position_at(o, 0.0);
    EXPECT_LT((d1 - d0).norm(), 1e-12);
  }
}

TEST(ObstacleValidation, RejectsNonPositiveRadius) {
  EXPECT_THROW((CircleObstacle{Vec2::Zero(), 0.0, Vec2::Zero()}.validate()), std::invalid_argument);
  EXPECT_THROW((CircleObstacle{Vec2::Zero(), 1.0, Vec2(NAN, 0.0)}.validate()), std::invalid_argument);
}

TEST(NormalSample, RejectsNonPositiveVariance) {
  RandomSource rng(1);
  EXPECT_THROW(normal_sample(rng, 0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(normal_sample(rng, 0.0, -1.0), std::invalid_argument);
}

TEST(NormalSample, TinyVarianceReturnsMean) {
  RandomSource rng(1);
  EXPECT_NEAR(normal_sample(rng, 0.7, 1e-30), 0.7, 1e-12);
}

TEST(NormalSample, MeanAndVarianceOverManyDraws) {
  RandomSource rng(42);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = normal_sample(rng, 0.0, 0.2);
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 0.2, 0.01);
}

TEST(RandomSource, SameSeedSameStream) {
  RandomSource a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(a.uniform(), b.uniform());
    ASSERT_EQ(normal_sample(a, 0.0, 0.2), normal_sample(b, 0.0, 0.2));
  }
}

TEST(RandomSource, DerivedStreamsDiffer) {
  auto a = RandomSource::derive(7, 1, 0);
  auto b = RandomSource::derive(7, 2, 0);
  auto c = RandomSource::derive(7, 1, 1);
  auto a2 = RandomSource::derive(7, 1, 0);
  const double x = a.uniform();
  EXPECT_NE(x, b.uniform());
  EXPECT_NE(x, c.uniform());
  EXPECT_EQ(x, a2.uniform());
}

TEST(RandomSource, UniformIndexInRange) {
  RandomSource rng(3);
  std::vector<int> hits(5, 0);
  for (int i = 0; i < 5000; ++i) ++hits[rng.uniform_index(5)];
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(WrapAngle, MapsIntoHalfOpenRange) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi / 2), -kPi / 2, 1e-12);
  RandomSource rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(-50, 50);
    const double w = wrap_angle(a);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
    EXPECT_NEAR(std::remainder(a - w, 2 * kPi), 0.0, 1e-9);
  }
}

TEST(States, VectorRoundTrip) {
  UnicycleState u{1.0, -2.0, 0.5};
  const auto back = UnicycleState::from_vector(u.to_vector());
  EXPECT_EQ(back.x1, 1.0);
  EXPECT_EQ(back.x2, -2.0);
  EXPECT_EQ(back.theta, 0.5);
  PlanarState p{3.0, 4.0};
  EXPECT_EQ(PlanarState::from_vector(p.to_vector()).position(), Vec2(3.0, 4.0));
}

TEST(ControlBounds, ContainsAndValidate) {
  auto b = ControlBounds::uniform(2, -5.0, 5.0);
  EXPECT_TRUE(b.contains(Vec2(5.0, -5.0)));
  EXPECT_FALSE(b.contains(Vec2(5.1, 0.0)));
  EXPECT_TRUE(ControlBounds::unbounded(3).contains(Vec3(1e200, -1e200, 0.0)));
  ControlBounds bad{Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Workspace, ValidationAndBox) {
  Workspace ws{Vec2(-2, -2), Vec2(8, 8), Vec2(7, 6), 0.25};
  EXPECT_NO_THROW(ws.validate());
  EXPECT_TRUE(ws.in_box(Vec3(8.0, -2.0, 100.0)));
  EXPECT_FALSE(ws.in_box(Vec2(8.01, 0.0)));
  ws.goal_radius = 0.0;
  EXPECT_THROW(ws.validate(), std::invalid_argument);
  Workspace far{Vec2(-2, -2), Vec2(8, 8), Vec2(20, 20), 1.0};
  EXPECT_THROW(far.validate(), std::invalid_argument);
}

TEST(Trajectory, InterpolationAndRates) {
  Trajectory t;
  t.samples = {{0.0, Vec2(0, 0), Vec2(1, 0)}, {1.0, Vec2(1, 0), Vec2(0, 2)}, {2.0, Vec2(1, 2), Vec2(0, 0)}};
  EXPECT_TRUE(t.well_formed());
  EXPECT_TRUE(t.state_at(0.5).isApprox(Vec2(0.5, 0.0)));
  EXPECT_TRUE(t.state_at(1.5).isApprox(Vec2(1.0, 1.0)));
  EXPECT_EQ(t.state_at(-1.0), Vec2(0, 0));
  EXPECT_EQ(t.state_at(5.0), Vec2(1, 2));
  EXPECT_TRUE(t.rate_at(0.2).isApprox(Vec2(1, 0)));
  EXPECT_TRUE(t.rate_at(1.0).isApprox(Vec2(0, 2)));
  EXPECT_EQ(t.rate_at(2.0), Vec2(0, 0));
}

TEST(Trajectory, DetectsNonIncreasingTimes) {
  Trajectory t;
  t.samples = {{0.0, Vec2(0, 0), Vec2::Zero()}, {0.0, Vec2(1, 0), Vec2::Zero()}};
  EXPECT_FALSE(t.well_formed());
  t.samples[1].t = 1.0;
  t.samples[1].state = Vec3(1, 0, 0);
  EXPECT_FALSE(t.well_formed());
}

TEST(ModelKind, NamesRoundTrip) {
  for (auto k : {ModelKind::kPlanarRd1, ModelKind::kUnicycleRd2, ModelKind::kArmTwoLink,
                 ModelKind::kArmBaxter}) {
    EXPECT_EQ(parse_model_kind(to_string(k)), k);
  }
  EXPECT_FALSE(parse_model_kind("hexapod").has_value());
}
