#include <gtest/gtest.h>

#include "cbfrrt/planner.hpp"
#include "support/oracles.hpp"

using namespace cbfrrt;
using planner::PointRobotProblem;

namespace {

PointRobotProblem open_problem() {
  PointRobotProblem p;
  p.workspace = {Vec2(-2, -2), Vec2(8, 8), Vec2(6, 0), 0.25};
  p.bounds = ControlBounds::uniform(2, -5, 5);
  return p;
}

PointRobotProblem grid_problem() {
  auto p = open_problem();
  p.workspace.goal_center = Vec2(7, 6);
  const double radii[3] = {0.3, 0.4, 0.5};
  int i = 0;
  for (int gx = 0; gx < 3; ++gx) {
    for (int gy = 0; gy < 3; ++gy) {
      if (gx == 1 && gy == 1) continue;
      p.obstacles.push_back(CircleObstacle{Vec2(1.5 + 1.5 * gx, 1.5 + 1.5 * gy), radii[i++ % 3]});
    }
  }
  p.inflation = 0.1;
  p.steer.horizon = 2.0;
  return p;
}

planner::Tree chain_tree(int n) {
  planner::Tree t(ModelKind::kPlanarRd1, Vec2(0, 0), 0.0);
  for (int i = 1; i < n; ++i) {
    Trajectory e;
    e.samples = {{i - 1.0, Vec2(i - 1.0, 0), Vec2::Zero()}, {double(i), Vec2(double(i), 0), Vec2::Zero()}};
    t.add_child(static_cast<std::size_t>(i - 1), e);
  }
  return t;
}

}  // namespace

TEST(SampleVertex, SingleVertex) {
  planner::Tree t(ModelKind::kPlanarRd1, Vec2(0, 0), 0.0);
  RandomSource rng(1);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(planner::sample_vertex(t, 3.0, rng), 0u);
}

TEST(SampleVertex, ZeroRatioPicksFewestChildren) {
  auto t = chain_tree(4);  // only the last vertex is a leaf
  RandomSource rng(2);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(planner::sample_vertex(t, 0.0, rng), 3u);
}

TEST(SampleVertex, UniformShareMatchesRatio) {
  auto t = chain_tree(4);
  RandomSource rng(3);
  const int n = 100000;
  int leaf = 0;
  for (int i = 0; i < n; ++i) leaf += planner::sample_vertex(t, 3.0, rng) == 3u;
  // P(leaf) = 0.75 * 1/4 + 0.25; the uniform share is recovered from it.
  const double uniform_share = (1.0 - double(leaf) / n) * 4.0 / 3.0;
  EXPECT_NEAR(uniform_share, 0.75, 0.01);
}

TEST(SampleHeading, DesiredHeadingHandValues) {
  EXPECT_NEAR(planner::desired_heading(Vec2(0, 0), Vec2(1, 1)), kPi / 4, 1e-15);
  EXPECT_NEAR(planner::desired_heading(Vec2(0, 0), Vec2(-1, 0)), kPi, 1e-15);
}

TEST(SampleHeading, CoincidentGoalThrows) {
  RandomSource rng(1);
  EXPECT_THROW(planner::sample_heading(Vec2(1, 1), Vec2(1, 1), 0.2, 0.0, rng), std::invalid_argument);
}

TEST(SampleHeading, BiasedVarianceMatches) {
  RandomSource rng(4);
  const int n = 100000;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = planner::sample_heading(Vec2(0, 0), Vec2(1, 0), 0.2, 0.0, rng);
    sq += d * d;
  }
  EXPECT_NEAR(sq / n, 0.2, 0.2 * 0.05);
}

TEST(SampleHeading, RandomShareIsUniform) {
  RandomSource rng(5);
  std::vector<double> draws, reference;
  RandomSource ref_rng(6);
  for (int i = 0; i < 50000; ++i) {
    draws.push_back(planner::sample_heading(Vec2(0, 0), Vec2(0, 1), 0.2, 1e12, rng));
    reference.push_back(ref_rng.uniform(-kPi, kPi));
  }
  EXPECT_LT(oracle::ks_distance(draws, reference), 0.02);
}

TEST(GoalCheck, ClosedBall) {
  Workspace ws{Vec2(-2, -2), Vec2(8, 8), Vec2(1, 1), 0.5};
  EXPECT_TRUE(planner::goal_check(Vec2(1, 1), ws));
  EXPECT_TRUE(planner::goal_check(Vec2(1.5, 1), ws));
  EXPECT_FALSE(planner::goal_check(Vec2(1.5 + 1e-9, 1), ws));
  EXPECT_TRUE(planner::goal_check(Vec3(1, 1, 2.0), ws));
}

TEST(SafeSteer, StraightWithoutObstacles) {
  auto p = open_problem();
  p.stop_at_goal = false;
  auto r = planner::safe_steer(p, Vec2(0, 0), 0.0, 0.0);
  ASSERT_EQ(r.status, planner::SteerStatus::kCompleted);
  ASSERT_EQ(r.path.size(), 101u);
  EXPECT_NEAR(r.path.samples.back().state[0], 0.5, 1e-12);
  EXPECT_NEAR(r.path.samples.back().state[1], 0.0, 1e-12);
  EXPECT_NEAR(r.path.end_time(), 1.0, 1e-12);
}

TEST(SafeSteer, BendsAroundObstacleAhead) {
  auto p = open_problem();
  p.stop_at_goal = false;
  p.obstacles = {CircleObstacle{Vec2(0, 0), 1.0}};
  p.steer.v_ref = 2.0;
  auto r = planner::safe_steer(p, Vec2(2, 0.05), kPi, 0.0);
  ASSERT_TRUE(r.usable());
  double min_h = 1e9, max_dev = 0.0;
  for (const auto& s : r.path.samples) {
    min_h = std::min(min_h, oracle::h_disc(s.state, Vec2(0, 0), Vec2::Zero(), 0, 1.0));
    max_dev = std::max(max_dev, std::abs(s.state[1] - 0.05));
  }
  EXPECT_GE(min_h, -1e-6);
  EXPECT_GT(max_dev, 0.01);
}

TEST(SafeSteer, UnsafeStartThrows) {
  auto p = open_problem();
  p.obstacles = {CircleObstacle{Vec2(0, 0), 1.0}};
  EXPECT_THROW(planner::safe_steer(p, Vec2(0.5, 0), 0.0, 0.0), std::invalid_argument);
}

TEST(SafeSteer, BoxedInIsInfeasibleAtFirstStep) {
  auto p = open_problem();
  p.bounds = ControlBounds::uniform(2, -0.1, 0.1);
  // Two obstacles closing from both sides faster than the robot can dodge.
  p.obstacles = {CircleObstacle{Vec2(-1.01, 0), 1.0, Vec2(3, 0)}, CircleObstacle{Vec2(1.01, 0), 1.0, Vec2(-3, 0)},
                 CircleObstacle{Vec2(0, -1.01), 1.0, Vec2(0, 3)}, CircleObstacle{Vec2(0, 1.01), 1.0, Vec2(0, -3)}};
  auto r = planner::safe_steer(p, Vec2(0, 0), 0.0, 0.0);
  EXPECT_EQ(r.status, planner::SteerStatus::kInfeasible);
  EXPECT_EQ(r.path.size(), 1u);
}

TEST(SafeSteer, LeavingWorkspaceAborts) {
  auto p = open_problem();
  p.stop_at_goal = false;
  p.steer.v_ref = 5.0;
  auto r = planner::safe_steer(p, Vec2(7.5, 0), 0.0, 0.0);
  EXPECT_EQ(r.status, planner::SteerStatus::kLeftWorkspace);
  for (const auto& s : r.path.samples) EXPECT_TRUE(p.workspace.in_box(s.state));
}

TEST(SafeSteer, UnicycleKeepsSpeed) {
  PointRobotProblem p;
  p.model = ModelKind::kUnicycleRd2;
  p.workspace = {Vec2(-10, -10), Vec2(10, 10), Vec2(9, 9), 0.5};
  p.steer.v_ref = 1.5;
  p.bounds = ControlBounds::uniform(1, -3, 3);
  p.obstacles = {CircleObstacle{Vec2(7, 0.5), 1.0}};
  auto r = planner::safe_steer(p, Vec3(0, 0, 0), 0.0, 0.0);
  ASSERT_TRUE(r.usable());
  for (std::size_t i = 1; i < r.path.size(); ++i) {
    const Vec d = r.path.samples[i].state.head(2) - r.path.samples[i - 1].state.head(2);
    EXPECT_NEAR(d.norm(), 1.5 * p.steer.dt(), 1e-12);
    EXPECT_LE(std::abs(r.path.samples[i - 1].control[1]), 3.0 + 1e-12);
  }
}

TEST(Plan, ZeroBudgetGivesSingleVertex) {
  auto p = grid_problem();
  RandomSource rng(1);
  auto r = planner::plan(p, Vec2(-1, -1), rng, 0);
  EXPECT_FALSE(r.reached());
  EXPECT_EQ(r.tree.size(), 1u);
}

TEST(Plan, OpenFieldPathNoShorterThanStraightLine) {
  auto p = open_problem();
  RandomSource rng(2);
  auto r = planner::plan(p, Vec2(0, 0), rng, 5000);
  ASSERT_TRUE(r.reached());
  double len = 0.0;
  for (std::size_t i = 1; i < r.path->size(); ++i) {
    len += (r.path->samples[i].state - r.path->samples[i - 1].state).norm();
  }
  EXPECT_GE(len, 6.0 - 0.25 - 1e-9);
  EXPECT_TRUE(planner::goal_check(r.path->samples.back().state, p.workspace));
}

TEST(Plan, UnsafeStartThrows) {
  auto p = grid_problem();
  RandomSource rng(1);
  EXPECT_THROW(planner::plan(p, Vec2(1.5, 1.5), rng, 10), std::invalid_argument);
}

TEST(Plan, TreeInvariantsAndSafety) {
  auto p = grid_problem();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RandomSource rng(seed);
    auto r = planner::plan(p, Vec2(-1, -1), rng, 5000);
    ASSERT_TRUE(r.tree.well_formed());
    EXPECT_EQ(r.tree.edges().size(), r.tree.size() - 1);
    std::vector<std::size_t> outdeg(r.tree.size(), 0);
    for (const auto& e : r.tree.edges()) {
      ++outdeg[e.parent];
      EXPECT_EQ(e.path.samples.front().state, r.tree.vertex(e.parent).state);
      EXPECT_EQ(e.path.samples.back().state, r.tree.vertex(e.child).state);
      EXPECT_GT(r.tree.vertex(e.child).time, r.tree.vertex(e.parent).time);
      for (const auto& s : e.path.samples) {
        for (const auto& o : p.obstacles) {
          const auto& c = std::get<CircleObstacle>(o);
          ASSERT_GE(oracle::h_disc(s.state, c.center0, c.velocity, s.t, c.radius + p.inflation), -1e-4);
        }
      }
    }
    for (std::size_t v = 0; v < r.tree.size(); ++v) EXPECT_EQ(outdeg[v], r.tree.vertex(v).children_count);
    ASSERT_TRUE(r.reached()) << seed;
    const double vmax = 5.0 * std::sqrt(2.0);
    for (std::size_t i = 1; i < r.path->size(); ++i) {
      const auto& a = r.path->samples[i - 1];
      const auto& b = r.path->samples[i];
      EXPECT_GT(b.t, a.t);
      EXPECT_LE((b.state - a.state).norm(), vmax * p.steer.dt() + 1e-9);
    }
  }
}

TEST(Plan, DeterministicPerSeed) {
  auto p = grid_problem();
  RandomSource a(9), b(9);
  auto ra = planner::plan(p, Vec2(-1, -1), a, 5000);
  auto rb = planner::plan(p, Vec2(-1, -1), b, 5000);
  ASSERT_EQ(ra.tree.size(), rb.tree.size());
  for (std::size_t v = 0; v < ra.tree.size(); ++v) {
    EXPECT_EQ(ra.tree.vertex(v).state, rb.tree.vertex(v).state);
    EXPECT_EQ(ra.tree.vertex(v).parent, rb.tree.vertex(v).parent);
  }
}

TEST(Plan, MovingObstaclesStaySafe) {
  auto p = grid_problem();
  for (auto& o : p.obstacles) {
    auto& c = std::get<CircleObstacle>(o);
    const Vec2 rel = c.center0 - Vec2(3, 3);
    c.velocity = 0.1 * Vec2(-rel.y(), rel.x()).normalized();
  }
  RandomSource rng(4);
  auto r = planner::plan(p, Vec2(-1, -1), rng, 5000);
  ASSERT_TRUE(r.reached());
  EXPECT_GE(planner::min_barrier(*r.path, p.obstacles, p.inflation), -1e-4);
}

TEST(Plan, UnicycleAroundThreeObstacles) {
  PointRobotProblem p;
  p.model = ModelKind::kUnicycleRd2;
  p.workspace = {Vec2(-7, -4), Vec2(12, 10), Vec2(10, 6), 0.5};
  p.obstacles = {CircleObstacle{Vec2(3.75, 0), 3}, CircleObstacle{Vec2(0, 5), 1.5},
                 CircleObstacle{Vec2(-3.75, 3.75), 2.5}};
  p.steer.v_ref = 1.5;
  p.steer.sigma2 = 0.1;
  p.bounds = ControlBounds::uniform(1, -3, 3);
  RandomSource rng(0);
  auto r = planner::plan(p, Vec3(-6.5, 1, 0), rng, 5000);
  ASSERT_TRUE(r.reached());
  EXPECT_GE(planner::min_barrier(*r.path, p.obstacles, 0.0), -1e-4);
  // The stated start lies inside the third obstacle.
  RandomSource rng2(0);
  EXPECT_THROW(planner::plan(p, Vec3(-5, 2, 0), rng2, 10), std::invalid_argument);
}

TEST(Tree, DensePathConcatenatesEdges) {
  auto t = chain_tree(4);
  auto path = t.dense_path_to(3);
  ASSERT_EQ(path.size(), 4u);
  EXPECT_EQ(path.samples.back().state, Vec2(3, 0));
  EXPECT_EQ(t.lineage(3), (std::vector<std::size_t>{0, 1, 2, 3}));
}
