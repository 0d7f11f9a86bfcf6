#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cbfrrt/cbf.hpp"
#include "cbfrrt/planner.hpp"
#include "cbfrrt/qp.hpp"
#include "cbfrrt/types.hpp"

namespace cbfrrt::tracker {

/// Horizon, weights and step of the receding-horizon tracker.
///
/// State deviations are divided by dt before weighting, so Q and R act on
/// comparable (velocity) scales.
struct MpcConfig {
  int horizon = 3;                    // N
  Vec2 q = Vec2(10.0, 10.0);          // diagonal of Q
  double r = 1.0;                     // R, must be positive
  Vec2 terminal = Vec2(10.0, 10.0);   // diagonal of the terminal weight
  double dt = 0.01;
  double heading_sigma2 = 0.2;        // 0 disables the heading perturbation
  double lag_tolerance = 0.1;         // reference clock pauses beyond this lag, m
  int max_steps = 0;                  // 0: 3 * reference samples + 1000

  void validate() const;
};

struct RobotSpec {
  int id = 1;
  double radius = 0.1;
  Vec2 start = Vec2::Zero();
  Vec2 goal = Vec2::Zero();
  double goal_radius = 0.25;
  int priority = 1;  // 1 = highest
};

/// One solve of the horizon-N program under a fixed heading.
struct MpcProblem {
  Vec2 x0 = Vec2::Zero();
  double t0 = 0.0;
  std::vector<Vec2> ref_window;  // N + 1 reference positions, entry 0 at t0
  Vec u_ref;                     // N reference speeds
  double theta = 0.0;
  std::vector<DiscObstacle> obstacles;
  double inflation = 0.0;
  cbf::Rd1Params rd1;
  MpcConfig config;
  ControlBounds bounds;          // speed, one entry
  Vec2 state_lower = Vec2::Constant(-1e300);
  Vec2 state_upper = Vec2::Constant(1e300);
  std::optional<Vec> nominal;    // speeds used to linearize rows beyond step 0
};

struct MpcSolution {
  std::optional<Vec> speeds;  // all N planned speeds

  bool feasible() const { return speeds.has_value(); }
  double first() const { return (*speeds)[0]; }
};

/// Builds the weighted QP over the N speeds. The barrier row at step 0 is
/// exact; rows at later steps are linearized around `nominal` (or u_ref).
qp::WeightedQp assemble(const MpcProblem& problem);

/// Throws std::invalid_argument on malformed windows.
MpcSolution mpc_step(const MpcProblem& problem);

enum class TrackStatus { kReachedGoal, kBudgetExhausted, kInfeasibleStart };

std::string_view to_string(TrackStatus status);

struct TrackResult {
  Trajectory trajectory;  // controls are planar velocities
  TrackStatus status = TrackStatus::kBudgetExhausted;
  int fallback_steps = 0;  // steps where the horizon program was infeasible
};

struct TrackInputs {
  const Trajectory* reference = nullptr;
  std::vector<DiscObstacle> obstacles;  // circles and higher-priority robots
  RobotSpec spec;
  MpcConfig config;
  cbf::Rd1Params rd1;
  ControlBounds bounds = ControlBounds::uniform(1, -5.0, 5.0);
  Vec2 state_lower = Vec2::Constant(-1e300);
  Vec2 state_upper = Vec2::Constant(1e300);
  double hold_until = 0.0;  // keep regulating at the goal until this time
};

/// Closed-loop receding-horizon tracking of a time-indexed reference. The
/// reference clock only advances while the robot is within `lag_tolerance` of
/// the current reference point. After the
/// goal is reached the robot keeps tracking the held reference end until
/// `hold_until`, so robots that ignore it cannot run into it.
TrackResult track(const TrackInputs& inputs, RandomSource& rng);

enum class RobotOutcome { kReached, kPlanExhausted, kTrackExhausted, kInfeasibleStart, kSkipped };

std::string_view to_string(RobotOutcome outcome);

struct RobotRun {
  RobotSpec spec;
  RobotOutcome outcome = RobotOutcome::kSkipped;
  int plan_iterations = 0;
  std::optional<planner::Tree> tree;
  std::optional<Trajectory> reference;
  std::optional<Trajectory> tracked;
};

struct FleetResult {
  std::vector<RobotRun> robots;  // in priority order

  bool all_reached() const;
};

struct FleetInputs {
  std::vector<RobotSpec> fleet;
  Workspace workspace;            // box; goal fields are overridden per robot
  std::vector<CircleObstacle> obstacles;
  planner::SteerConfig steer;
  cbf::Rd1Params rd1;
  ControlBounds bounds = ControlBounds::uniform(2, -5.0, 5.0);
  MpcConfig mpc;
  int max_iters = 2000;
};

/// Prioritized pipeline: each robot plans against circles and the references
/// of higher-priority robots, then tracks against circles and their tracked
/// trajectories. Stops at the first robot that fails.
FleetResult plan_fleet(const FleetInputs& inputs, std::uint64_t seed);

/// Smallest center distance between two trajectories over their common
/// sample times (the shorter one holds its last state).
double min_distance(const Trajectory& a, const Trajectory& b);

}  // namespace cbfrrt::tracker
