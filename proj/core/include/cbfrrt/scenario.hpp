#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbfrrt/arm.hpp"
#include "cbfrrt/cbf.hpp"
#include "cbfrrt/planner.hpp"
#include "cbfrrt/tracker.hpp"
#include "cbfrrt/types.hpp"

namespace cbfrrt {

/// Syntax or semantic problem in a scenario file.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(int line, const std::string& message);

  int line() const { return line_; }  // 0 when not tied to a line

 private:
  int line_;
};

struct RobotEntry {
  tracker::RobotSpec spec;
  double heading = 0.0;  // unicycle start heading
};

struct ArmSettings {
  double link_radius = 0.3;
  double l1 = 3.0;  // two-link lengths
  double l2 = 3.0;
  arm::BaxterGeometry baxter;
  Vec theta_init;
  Vec theta_goal;
  double goal_radius = 0.1;
  arm::ActivationThresholds thresholds;
  double k = 2.0;
  double horizon = 0.3;
  int substeps = 100;
  double joint_speed = 1.0;
  double sigma2 = 0.4;
  double eta_vs = 3.0;
  double eta_ss = 3.0;
  double guard_factor = 2.0;
  arm::PartialEdgePolicy partial = arm::PartialEdgePolicy::kCommitIfLong;
  double min_commit_fraction = 0.1;
  double joint_limit = kPi;  // symmetric joint box
  double rate_limit = kPi;   // symmetric joint-rate bound
};

struct RenderSettings {
  std::string obstacle_color = "#808080";
  std::string tree_color = "#2ca02c";
  std::string cspace_tree_color = "#d62728";
  std::string vertex_color = "#1f77b4";
  std::string reference_color = "#1f77b4";
  std::string tracked_color = "#d62728";
  std::string start_color = "#2ca02c";
  std::string goal_color = "#000000";
  double scale = 0.05;  // meters (or radians) per SVG user unit
};

struct Scenario {
  std::string name;
  ModelKind model = ModelKind::kPlanarRd1;
  std::uint64_t seed = 1;
  int max_iters = 5000;
  Vec state_lower;  // planar box
  Vec state_upper;
  std::vector<CircleObstacle> obstacles;          // point-robot models
  std::vector<arm::SphereObstacle3D> spheres;     // arm models
  std::vector<RobotEntry> robots;                 // point-robot models, in file order
  planner::SteerConfig steer;
  ControlBounds bounds;
  cbf::Rd1Params rd1;
  cbf::Rd2Params rd2;
  std::optional<tracker::MpcConfig> mpc;
  ArmSettings arm;
  RenderSettings render;

  bool is_arm() const;
  /// Cross-field checks; throws ScenarioError.
  void validate() const;
};

bool operator==(const Scenario& a, const Scenario& b);

/// Model defaults used for omitted keys.
Scenario default_scenario(ModelKind model);

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
/// Complete text form: parse_scenario(serialize(s)) == s.
std::string serialize(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::string& path);

arm::KinematicChain make_chain(const Scenario& scenario);
arm::ArmProblem make_arm_problem(const Scenario& scenario);
/// Single-robot planning problem for `robot` against the circles only.
planner::PointRobotProblem make_point_problem(const Scenario& scenario, const RobotEntry& robot);
tracker::FleetInputs make_fleet_inputs(const Scenario& scenario);
/// Start state of a point robot (x1, x2) or (x1, x2, theta).
Vec start_state(const Scenario& scenario, const RobotEntry& robot);

/// Per-robot line of a run report.
struct RobotReport {
  int id = 0;
  std::string outcome;  // reached | exhausted | infeasible-start | ...
  int iterations = 0;
  std::size_t tree_size = 0;
  double min_barrier = 0.0;
  double path_time = 0.0;  // duration of the final trajectory
};

struct RunReport {
  std::string command;
  std::string scenario;
  std::string model;
  std::uint64_t seed = 0;
  std::vector<RobotReport> robots;
  double min_barrier = 0.0;              // over every committed state of every phase
  std::optional<double> min_robot_distance;
  double wall_clock = 0.0;               // seconds; not part of the persisted text

  bool all_reached() const;
};

/// Key-value block. Wall-clock time is only included on request so that
/// persisted reports are reproducible.
std::string format_report(const RunReport& report, bool include_wall_clock);

}  // namespace cbfrrt
