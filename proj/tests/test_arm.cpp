#include <gtest/gtest.h>

#include <random>

#include "cbfrrt/arm.hpp"
#include "cbfrrt/scenario.hpp"
#include "support/oracles.hpp"

using namespace cbfrrt;
using namespace cbfrrt::arm;

namespace {

Vec random_theta(RandomSource& rng, int dof) {
  Vec t(dof);
  for (int i = 0; i < dof; ++i) t[i] = rng.uniform(-kPi, kPi);
  return t;
}

Vec3 world_point(const Transform& world_to_frame, const Vec3& local) {
  return (world_to_frame.inverse() * local.homogeneous()).head<3>();
}

Scenario shipped(const std::string& name) { return load_scenario(std::string(CBFRRT_SCENARIO_DIR) + "/" + name); }

}  // namespace

TEST(Kinematics, TwoLinkMatchesPlanarFormula) {
  const auto chain = two_link_chain(3.0, 2.0, 0.3);
  RandomSource rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Vec th = random_theta(rng, 2);
    const Vec3 elbow = world_point(chain_frame(chain, 1, th), Vec3(3, 0, 0));
    const Vec3 tip = world_point(chain_frame(chain, 2, th), Vec3(2, 0, 0));
    EXPECT_NEAR(elbow.x(), 3 * std::cos(th[0]), 1e-10);
    EXPECT_NEAR(elbow.y(), 3 * std::sin(th[0]), 1e-10);
    EXPECT_NEAR(tip.x(), 3 * std::cos(th[0]) + 2 * std::cos(th[0] + th[1]), 1e-10);
    EXPECT_NEAR(tip.y(), 3 * std::sin(th[0]) + 2 * std::sin(th[0] + th[1]), 1e-10);
    EXPECT_NEAR(tip.z(), 0.0, 1e-12);
  }
}

TEST(Kinematics, FramesAreRigid) {
  const auto chain = baxter_left_arm(BaxterGeometry{}, 0.05);
  RandomSource rng(2);
  for (int i = 0; i < 200; ++i) {
    const Vec th = random_theta(rng, 4);
    for (int j = 0; j <= chain.frame_count(); ++j) {
      const Transform f = chain_frame(chain, j, th);
      const Eigen::Matrix3d r = f.topLeftCorner<3, 3>();
      EXPECT_TRUE((r * r.transpose()).isApprox(Eigen::Matrix3d::Identity(), 1e-12));
      EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
      EXPECT_EQ(f.row(3), Eigen::RowVector4d(0, 0, 0, 1));
    }
  }
}

TEST(Kinematics, PassiveRotationConvention) {
  auto chain = two_link_chain(1.0, 1.0, 0.1);
  chain.base = {Element::rot_z(kPi / 2)};
  const Vec3 p = apply(chain_frame(chain, 0, Vec::Zero(2)), Vec3(1, 0, 0));
  EXPECT_NEAR(p.x(), 0.0, 1e-15);
  EXPECT_NEAR(p.y(), -1.0, 1e-15);
}

TEST(Kinematics, BaxterMountAtBaseOrigin) {
  const BaxterGeometry g;
  const auto chain = baxter_left_arm(g, 0.05);
  const Vec zero = Vec::Zero(4);
  const Vec3 mount(g.mount_x, -g.mount_y, g.mount_z);
  EXPECT_LT(apply(chain_frame(chain, 0, zero), mount).norm(), 1e-12);
  EXPECT_LT(apply(chain_frame(chain, 1, zero), mount).norm(), 1e-12);
  // The first link ends l1 along the local x axis of frame 1.
  const Vec3 shoulder = world_point(chain_frame(chain, 1, zero), Vec3(g.l1, 0, 0));
  EXPECT_NEAR((shoulder - mount).norm(), g.l1, 1e-12);
}

TEST(Kinematics, FrameJacobianMatchesDifferences) {
  const auto chain = baxter_left_arm(BaxterGeometry{}, 0.05);
  RandomSource rng(3);
  for (int i = 0; i < 50; ++i) {
    const Vec th = random_theta(rng, 4);
    for (int j = 1; j <= chain.frame_count(); ++j) {
      const auto jac = chain_frame_jacobian(chain, j, th);
      for (int m = 0; m < 4; ++m) {
        Vec a = th, b = th;
        a[m] += 1e-6;
        b[m] -= 1e-6;
        const Transform fd = (chain_frame(chain, j, a) - chain_frame(chain, j, b)) / 2e-6;
        EXPECT_LT((fd - jac[m]).cwiseAbs().maxCoeff(), 1e-8);
      }
    }
  }
}

TEST(Kinematics, BadIndicesThrow) {
  const auto chain = two_link_chain(1.0, 1.0, 0.1);
  EXPECT_THROW(chain_frame(chain, 3, Vec::Zero(2)), std::out_of_range);
  EXPECT_THROW(link_frame(chain, 0, Vec::Zero(2)), std::out_of_range);
  EXPECT_THROW(chain_frame(chain, 1, Vec::Zero(3)), std::invalid_argument);
}

TEST(LinkBarrier, HandValues) {
  const auto chain = two_link_chain(3.0, 3.0, 0.3);
  const Vec zero = Vec::Zero(2);
  EXPECT_NEAR(link_barrier(chain, 1, zero, {Vec3(1, 2, 0), 0.5}, 0.0), 3.36, 1e-12);
  EXPECT_NEAR(link_barrier(chain, 1, zero, {Vec3(1, 0, 0), 0.5}, 0.0), -0.64, 1e-12);
  EXPECT_NEAR(link_barrier(chain, 1, zero, {Vec3(2, 0, 0.8), 0.5}, 0.0), 0.0, 1e-12);
  // Moving obstacle is evaluated at its current position.
  EXPECT_NEAR(link_barrier(chain, 1, zero, {Vec3(1, 0, 0), 0.5, Vec3(0, 1, 0)}, 2.0), 3.36, 1e-12);
}

TEST(LinkBarrier, ClearanceOfCapsule) {
  const auto chain = two_link_chain(3.0, 3.0, 0.3);
  const Vec zero = Vec::Zero(2);
  EXPECT_NEAR(link_clearance(chain, 1, zero, {Vec3(1, 2, 0), 0.5}, 0.0), 1.2, 1e-12);
  EXPECT_NEAR(link_clearance(chain, 1, zero, {Vec3(5, 0, 0), 0.5}, 0.0), 1.2, 1e-12);
  EXPECT_NEAR(link_clearance(chain, 1, zero, {Vec3(-3, 4, 0), 0.5}, 0.0), 4.2, 1e-12);
}

TEST(LinkBarrier, RowMatchesFiniteDifferences) {
  const Scenario two = shipped("arm_two_link.scn");
  const Scenario bax = shipped("arm_baxter.scn");
  for (const auto* s : {&two, &bax}) {
    const auto chain = make_chain(*s);
    RandomSource rng(4);
    for (int i = 0; i < 500; ++i) {
      const Vec th = random_theta(rng, chain.dof);
      Vec w(chain.dof);
      for (int m = 0; m < chain.dof; ++m) w[m] = rng.uniform(-2, 2);
      SphereObstacle3D obs{Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-1, 2)), 0.2,
                           Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))};
      const int j = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(chain.link_count())));
      const double t = rng.uniform(0, 1);
      const double k = 2.0;
      const double eps = 1e-6;
      const double hp = link_barrier(chain, j, th + eps * w, obs, t + eps);
      const double hm = link_barrier(chain, j, th - eps * w, obs, t - eps);
      const double fd = (hp - hm) / (2 * eps);
      const auto row = link_barrier_rate_row(chain, j, th, obs, t, k);
      const double h = link_barrier(chain, j, th, obs, t);
      const double rate = row.a.dot(w) + (-row.b - k * h);
      EXPECT_NEAR(rate, fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(LinkBarrier, FirstLinkIgnoresSecondJoint) {
  const auto chain = two_link_chain(3.0, 3.0, 0.3);
  RandomSource rng(5);
  for (int i = 0; i < 10000; ++i) {
    const Vec th = random_theta(rng, 2);
    SphereObstacle3D obs{Vec3(rng.uniform(-6, 6), rng.uniform(-6, 6), 0.0), 0.5};
    const auto row = link_barrier_rate_row(chain, 1, th, obs, 0.0, 2.0);
    ASSERT_EQ(row.a[1], 0.0);
  }
}

TEST(LinkBarrier, InvariantUnderBaseShift) {
  auto moved = two_link_chain(3.0, 3.0, 0.3);
  moved.base = {Element::trans_x(-1.5), Element::trans_y(-0.5)};
  const auto chain = two_link_chain(3.0, 3.0, 0.3);
  RandomSource rng(6);
  for (int i = 0; i < 200; ++i) {
    const Vec th = random_theta(rng, 2);
    const Vec3 c(rng.uniform(-6, 6), rng.uniform(-6, 6), rng.uniform(-1, 1));
    for (int j = 1; j <= 2; ++j) {
      const double a = link_barrier(chain, j, th, {c, 0.5}, 0.0);
      const double b = link_barrier(moved, j, th, {c + Vec3(1.5, 0.5, 0), 0.5}, 0.0);
      EXPECT_NEAR(a, b, 1e-10 * std::max(1.0, std::abs(a)));
    }
  }
}

TEST(Activation, InsideAndBeyondTheLink) {
  const auto chain = two_link_chain(3.0, 3.0, 0.3);
  const Vec zero = Vec::Zero(2);
  const ActivationThresholds thr{5.0, 0.5};
  EXPECT_TRUE(activation(chain, 1, zero, {Vec3(1.5, 5.0, 0), 0.2}, 0.0, thr));
  EXPECT_FALSE(activation(chain, 1, zero, {Vec3(1.5, 6.0, 0), 0.2}, 0.0, thr));
  EXPECT_TRUE(activation(chain, 1, zero, {Vec3(3.9, 0, 0), 0.2}, 0.0, thr));
  EXPECT_FALSE(activation(chain, 1, zero, {Vec3(4.1, 0, 0), 0.2}, 0.0, thr));
  EXPECT_FALSE(activation(chain, 1, zero, {Vec3(-1.0, 0, 0), 0.2}, 0.0, thr));
}

TEST(Activation, ThresholdOrderIsChecked) {
  EXPECT_THROW((ActivationThresholds{0.5, 5.0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((ActivationThresholds{5.0, 0.5}.validate()));
}

TEST(SampleDirection, UnitNorm) {
  RandomSource rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Vec d = sample_direction(Vec::Zero(4), Vec::Ones(4), 0.4, 1.0, rng);
    EXPECT_NEAR(d.norm(), 1.0, 1e-12);
  }
}

TEST(SampleDirection, RandomModeIsUniform) {
  RandomSource rng(8);
  std::mt19937_64 ref(9);
  std::uniform_real_distribution<double> angle(-kPi, kPi), coord(-1.0, 1.0);
  std::vector<double> a2, r2, a3, r3;
  const double inf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 20000; ++i) {
    const Vec d2 = sample_direction(Vec::Zero(2), Vec::Ones(2), 0.4, inf, rng);
    a2.push_back(std::atan2(d2[1], d2[0]));
    r2.push_back(angle(ref));
    // Archimedes: one coordinate of a uniform point on the 2-sphere is uniform.
    a3.push_back(sample_direction(Vec::Zero(3), Vec::Ones(3), 0.4, inf, rng)[2]);
    r3.push_back(coord(ref));
  }
  EXPECT_LT(oracle::ks_distance(a2, r2), 0.02);
  EXPECT_LT(oracle::ks_distance(a3, r3), 0.02);
}

TEST(SampleDirection, BiasedModeMatchesPerturbedGoal) {
  RandomSource rng(10);
  std::mt19937_64 ref(11);
  std::normal_distribution<double> g(0.0, std::sqrt(0.4));
  std::vector<double> got, want;
  const Vec2 unit = Vec2(3, 4).normalized();
  for (int i = 0; i < 20000; ++i) {
    const Vec d = sample_direction(Vec::Zero(2), Vec2(3, 4), 0.4, 0.0, rng);
    got.push_back(std::atan2(d[1], d[0]));
    const Vec2 v = unit + Vec2(g(ref), g(ref));
    want.push_back(std::atan2(v.y(), v.x()));
  }
  EXPECT_LT(oracle::ks_distance(got, want), 0.02);
}

TEST(SampleDirection, VanishingVarianceGivesGoalDirection) {
  RandomSource rng(12);
  const Vec goal = (Vec(4) << 1, -2, 0.5, 3).finished();
  const Vec d = sample_direction(Vec::Zero(4), goal, 1e-24, 0.0, rng);
  EXPECT_LT((d - goal.normalized()).norm(), 1e-9);
  EXPECT_THROW(sample_direction(goal, goal, 0.4, 0.0, rng), std::invalid_argument);
}

TEST(ArmSteer, StaysSafe) {
  const Scenario s = shipped("arm_two_link.scn");
  const auto problem = make_arm_problem(s);
  RandomSource rng(13);
  int moved = 0;
  for (int i = 0; i < 100; ++i) {
    const Vec dir = sample_direction(s.arm.theta_init, s.arm.theta_goal, 0.4, 3.0, rng);
    const auto r = arm_safe_steer(problem, s.arm.theta_init, problem.joint_speed * dir, 0.0);
    moved += r.path.size() > 1;
    for (const auto& smp : r.path.samples) {
      for (const auto& b : active_barriers(problem, smp.state, smp.t)) ASSERT_GE(b.h, -1e-4);
      ASSERT_TRUE(problem.workspace.in_box(smp.state));
    }
  }
  EXPECT_GT(moved, 0);
}

TEST(ArmPlan, StartInsideGoal) {
  const Scenario s = shipped("arm_two_link.scn");
  const auto problem = make_arm_problem(s);
  RandomSource rng(14);
  const auto r = arm_plan(problem, s.arm.theta_goal, rng, 100);
  ASSERT_TRUE(r.reached());
  EXPECT_EQ(r.tree.size(), 1u);
  EXPECT_EQ(r.path->size(), 1u);
}

TEST(ArmPlan, PathKeepsGeometricClearance) {
  for (const char* name : {"arm_two_link.scn", "arm_baxter.scn"}) {
    const Scenario s = shipped(name);
    const auto problem = make_arm_problem(s);
    int reached = 0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      RandomSource rng(seed);
      const auto r = arm_plan(problem, s.arm.theta_init, rng, s.max_iters);
      ASSERT_TRUE(r.tree.well_formed());
      if (!r.reached()) continue;
      ++reached;
      for (const auto& smp : r.path->samples) {
        for (int j = 1; j <= problem.chain.link_count(); ++j) {
          for (const auto& obs : problem.obstacles) {
            ASSERT_GE(link_clearance(problem.chain, j, smp.state, obs, smp.t), -1e-3) << name;
          }
        }
      }
      EXPECT_LE((r.path->samples.back().state - s.arm.theta_goal).norm(), s.arm.goal_radius + 1e-12);
    }
    EXPECT_GE(reached, 2) << name;
  }
}
