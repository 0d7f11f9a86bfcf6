#include <benchmark/benchmark.h>

#include "cbfrrt/arm.hpp"
#include "cbfrrt/planner.hpp"
#include "cbfrrt/qp.hpp"
#include "cbfrrt/tracker.hpp"

using namespace cbfrrt;

static void BM_QpSolve(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0));
  RandomSource rng(3);
  qp::QpProblem p;
  p.u_ref = Vec2(2.0, 1.0);
  p.bounds = ControlBounds::uniform(2, -5.0, 5.0);
  for (int i = 0; i < rows; ++i) {
    const double a = rng.uniform(-kPi, kPi);
    p.rows.push_back({Vec2(std::cos(a), std::sin(a)), rng.uniform(-1.0, 0.5)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(qp::solve(p));
}
BENCHMARK(BM_QpSolve)->Arg(1)->Arg(4)->Arg(8);

static planner::PointRobotProblem grid_problem() {
  planner::PointRobotProblem p;
  p.workspace.state_lower = Vec2(-2.0, -2.0);
  p.workspace.state_upper = Vec2(8.0, 8.0);
  p.workspace.goal_center = Vec2(7.0, 6.0);
  p.workspace.goal_radius = 0.25;
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
  p.bounds = ControlBounds::uniform(2, -5.0, 5.0);
  return p;
}

static void BM_SafeSteerPlanar(benchmark::State& state) {
  const auto p = grid_problem();
  for (auto _ : state) benchmark::DoNotOptimize(planner::safe_steer(p, Vec2(-1.0, -1.0), 0.7, 0.0));
}
BENCHMARK(BM_SafeSteerPlanar);

static void BM_PlanPlanar(benchmark::State& state) {
  const auto p = grid_problem();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    RandomSource rng(seed++);
    benchmark::DoNotOptimize(planner::plan(p, Vec2(-1.0, -1.0), rng, 5000));
  }
}
BENCHMARK(BM_PlanPlanar)->Unit(benchmark::kMillisecond);

static void BM_MpcStep(benchmark::State& state) {
  tracker::MpcProblem p;
  p.x0 = Vec2(0.0, 0.0);
  p.theta = 0.3;
  p.config.horizon = static_cast<int>(state.range(0));
  p.config.dt = 0.02;
  for (int k = 0; k <= p.config.horizon; ++k) {
    p.ref_window.push_back(Vec2(0.01 * k, 0.003 * k));
  }
  p.u_ref = Vec::Constant(p.config.horizon, 0.5);
  p.obstacles = {CircleObstacle{Vec2(1.0, 0.4), 0.3}, CircleObstacle{Vec2(0.5, -0.8), 0.4}};
  p.inflation = 0.1;
  p.bounds = ControlBounds::uniform(1, -5.0, 5.0);
  for (auto _ : state) benchmark::DoNotOptimize(tracker::mpc_step(p));
}
BENCHMARK(BM_MpcStep)->Arg(1)->Arg(3)->Arg(5);

static void BM_ArmSteerBaxter(benchmark::State& state) {
  arm::ArmProblem p;
  p.model = ModelKind::kArmBaxter;
  p.chain = arm::baxter_left_arm({}, 0.5);
  p.obstacles = {{Vec3(0.75, 0.5, 0.0), 0.5}};
  p.bounds = ControlBounds::uniform(4, -kPi, kPi);
  p.workspace.state_lower = Vec::Constant(4, -kPi);
  p.workspace.state_upper = Vec::Constant(4, kPi);
  Vec goal(4), start(4), u(4);
  goal << -kPi / 3.0, 0.0, 0.0, kPi / 2.0;
  start << 0.0, -kPi / 3.0, 0.0, 0.0;
  u << -0.5, 0.5, 0.0, 0.7;
  p.workspace.goal_center = goal;
  p.stop_at_goal = false;
  for (auto _ : state) benchmark::DoNotOptimize(arm::arm_safe_steer(p, start, u, 0.0));
}
BENCHMARK(BM_ArmSteerBaxter);
BENCHMARK_MAIN();
