#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "cbfrrt/cbf.hpp"
#include "cbfrrt/types.hpp"

namespace cbfrrt::planner {

/// Edge expansion and sampling parameters.
struct SteerConfig {
  double v_ref = 0.5;       // reference speed, m/s
  int substeps = 100;       // Euler steps per edge
  double horizon = 1.0;     // edge duration t_h, s
  double sigma2 = 0.2;      // heading variance, rad^2
  double goal_bias_ratio = 0.0;  // eta_ss: random headings per goal-biased heading
  double vertex_bias_ratio = std::numeric_limits<double>::infinity();  // eta_vs
  double heading_gain = 2.0;     // unicycle: omega_ref = gain * (theta_sampled - theta)

  void validate() const;
  double dt() const { return horizon / substeps; }
};

struct Vertex {
  Vec state;
  double time = 0.0;
  std::optional<std::size_t> parent;
  std::size_t children_count = 0;
};

struct Edge {
  std::size_t parent = 0;
  std::size_t child = 0;
  Trajectory path;  // starts at the parent state, ends at the child state
};

/// Vertex/edge store of a steering RRT.
class Tree {
 public:
  Tree(ModelKind model, Vec root_state, double t_init);

  /// Appends the end of `path` as a child of `parent` and returns its index.
  std::size_t add_child(std::size_t parent, Trajectory path);

  ModelKind model() const { return model_; }
  std::size_t size() const { return vertices_.size(); }
  const Vertex& vertex(std::size_t i) const { return vertices_.at(i); }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Vertex indices from the root to `v`, inclusive.
  std::vector<std::size_t> lineage(std::size_t v) const;
  /// All sub-trajectories from the root to `v`, concatenated without duplicate junctions.
  Trajectory dense_path_to(std::size_t v) const;

  /// Acyclic, connected, child counts match out-degrees, times increase along edges.
  bool well_formed() const;

 private:
  ModelKind model_;
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> edge_of_child_;  // edge index per vertex (root: npos)
};

/// With probability eta/(eta+1) a uniform vertex, else a vertex with the
/// fewest children (ties uniform). eta = inf means always uniform.
std::size_t sample_vertex(const Tree& tree, double eta_vs, RandomSource& rng);

/// atan2 heading from `from` toward `goal`.
double desired_heading(const Vec2& from, const Vec2& goal);

/// With probability 1/(eta+1) a Gaussian around the goal heading, otherwise a
/// uniform angle. eta = 0 is pure goal bias. Throws when from == goal.
double sample_heading(const Vec2& from, const Vec2& goal, double sigma2, double eta_ss,
                      RandomSource& rng);

/// Closed goal ball test on the leading coordinates of `state`.
bool goal_check(const Vec& state, const Workspace& ws);

/// Decision vector of the planar model's CBF-QP.
enum class PlanarControl {
  kVelocity,  // u = (u1, u2), heading free
  kSpeed,     // u = v along the sampled heading
};

/// Everything a point-robot steer or plan needs besides the start state.
struct PointRobotProblem {
  ModelKind model = ModelKind::kPlanarRd1;
  Workspace workspace;
  std::vector<DiscObstacle> obstacles;
  double inflation = 0.0;  // robot body radius
  SteerConfig steer;
  cbf::Rd1Params rd1;
  cbf::Rd2Params rd2;
  ControlBounds bounds;  // velocity (2), speed (1) or angular rate (1)
  PlanarControl planar_control = PlanarControl::kVelocity;
  bool stop_at_goal = true;

  void validate() const;
  int control_dim() const;
  int state_dim() const { return model == ModelKind::kUnicycleRd2 ? 3 : 2; }
};

enum class SteerStatus { kCompleted, kReachedGoal, kInfeasible, kLeftWorkspace };

struct SteerResult {
  Trajectory path;  // committed motion; a single sample when nothing moved
  SteerStatus status = SteerStatus::kInfeasible;

  bool usable() const {
    return status == SteerStatus::kCompleted || status == SteerStatus::kReachedGoal;
  }
};

/// Integrates `steer.substeps` Euler steps from (x, t0) under the CBF-QP
/// filtered reference built from heading `theta`. Throws std::invalid_argument
/// if the start violates a barrier.
SteerResult safe_steer(const PointRobotProblem& problem, const Vec& x, double theta, double t0);

/// Minimum barrier value over obstacles and samples of `path`.
double min_barrier(const Trajectory& path, const std::vector<DiscObstacle>& obstacles,
                   double inflation);

struct PlanResult {
  Tree tree;
  std::optional<Trajectory> path;  // dense root-to-goal reference
  std::size_t goal_vertex = 0;
  int iterations = 0;

  bool reached() const { return path.has_value(); }
};

/// Steering CBF-RRT. Stops at the first vertex inside the goal region, or
/// after `max_iters` expansion attempts. Throws if x_init violates a barrier.
PlanResult plan(const PointRobotProblem& problem, const Vec& x_init, RandomSource& rng,
                int max_iters, double t_init = 0.0);

}  // namespace cbfrrt::planner
