#include "cbfrrt/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cbfrrt::planner {
namespace {

constexpr std::size_t kNoEdge = static_cast<std::size_t>(-1);
constexpr double kStartTol = 1e-6;

// Probability of the "random" branch for a ratio eta of random to biased picks.
double random_share(double eta) {
  if (std::isinf(eta)) return 1.0;
  return eta / (eta + 1.0);
}

void validate_ratio(double eta, const char* what) {
  if (std::isnan(eta) || eta < 0.0) throw std::invalid_argument(what);
}

}  // namespace

void SteerConfig::validate() const {
  if (substeps < 1) throw std::invalid_argument("steer: substeps must be at least 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("steer: horizon must be positive");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("steer: sigma2 must be positive");
  validate_ratio(goal_bias_ratio, "steer: eta_ss must be nonnegative");
  validate_ratio(vertex_bias_ratio, "steer: eta_vs must be nonnegative");
  if (!std::isfinite(v_ref)) throw std::invalid_argument("steer: v_ref must be finite");
}

Tree::Tree(ModelKind model, Vec root_state, double t_init) : model_(model) {
  vertices_.push_back({std::move(root_state), t_init, std::nullopt, 0});
  edge_of_child_.push_back(kNoEdge);
}

std::size_t Tree::add_child(std::size_t parent, Trajectory path) {
  if (parent >= vertices_.size()) throw std::out_of_range("Tree::add_child: bad parent");
  if (path.size() < 2) throw std::invalid_argument("Tree::add_child: edge needs motion");
  const auto& last = path.samples.back();
  const std::size_t child = vertices_.size();
  vertices_.push_back({last.state, last.t, parent, 0});
  ++vertices_[parent].children_count;
  edge_of_child_.push_back(edges_.size());
  edges_.push_back({parent, child, std::move(path)});
  return child;
}

std::vector<std::size_t> Tree::lineage(std::size_t v) const {
  std::vector<std::size_t> out;
  for (std::optional<std::size_t> cur = v; cur; cur = vertices_.at(*cur).parent) {
    out.push_back(*cur);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

Trajectory Tree::dense_path_to(std::size_t v) const {
  Trajectory out;
  out.model = model_;
  const auto chain = lineage(v);
  for (std::size_t i = 1; i < chain.size(); ++i) {
    const auto& edge = edges_[edge_of_child_[chain[i]]];
    if (!out.samples.empty()) out.samples.pop_back();  // junction comes from the next edge
    out.samples.insert(out.samples.end(), edge.path.samples.begin(), edge.path.samples.end());
  }
  if (out.samples.empty()) {
    const auto& root = vertices_.front();
    const bool arm = model_ == ModelKind::kArmTwoLink || model_ == ModelKind::kArmBaxter;
    const auto cdim = arm ? root.state.size() : Eigen::Index{2};
    out.samples.push_back({root.time, root.state, Vec::Zero(cdim)});
  }
  return out;
}

bool Tree::well_formed() const {
  if (vertices_.empty() || vertices_[0].parent) return false;
  if (edges_.size() + 1 != vertices_.size()) return false;
  std::vector<std::size_t> degree(vertices_.size(), 0);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& edge = edges_[e];
    // Children are appended after their parents, which rules out cycles.
    if (edge.parent >= edge.child || edge.child >= vertices_.size()) return false;
    if (vertices_[edge.child].parent != edge.parent) return false;
    if (edge_of_child_[edge.child] != e) return false;
    ++degree[edge.parent];
    if (edge.path.samples.front().state != vertices_[edge.parent].state) return false;
    if (edge.path.samples.back().state != vertices_[edge.child].state) return false;
    if (!(vertices_[edge.child].time > vertices_[edge.parent].time)) return false;
    if (!edge.path.well_formed()) return false;
  }
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (degree[i] != vertices_[i].children_count) return false;
  }
  return true;
}

std::size_t sample_vertex(const Tree& tree, double eta_vs, RandomSource& rng) {
  validate_ratio(eta_vs, "sample_vertex: eta_vs must be nonnegative");
  const auto& vs = tree.vertices();
  if (vs.empty()) throw std::invalid_argument("sample_vertex: empty tree");
  if (rng.uniform() < random_share(eta_vs)) return rng.uniform_index(vs.size());
  std::size_t fewest = vs.front().children_count;
  for (const auto& v : vs) fewest = std::min(fewest, v.children_count);
  std::vector<std::size_t> ties;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (vs[i].children_count == fewest) ties.push_back(i);
  }
  return ties[rng.uniform_index(ties.size())];
}

double desired_heading(const Vec2& from, const Vec2& goal) {
  const Vec2 d = goal - from;
  if (d.squaredNorm() == 0.0) throw std::invalid_argument("desired_heading: state is at the goal");
  return std::atan2(d.y(), d.x());
}

double sample_heading(const Vec2& from, const Vec2& goal, double sigma2, double eta_ss,
                      RandomSource& rng) {
  validate_ratio(eta_ss, "sample_heading: eta_ss must be nonnegative");
  const double theta_d = desired_heading(from, goal);
  if (rng.uniform() < random_share(eta_ss)) {
    return wrap_angle(-rng.uniform(-kPi, kPi));  // (-pi, pi]
  }
  return wrap_angle(normal_sample(rng, theta_d, sigma2));
}

bool goal_check(const Vec& state, const Workspace& ws) {
  const auto n = ws.goal_center.size();
  if (state.size() < n) throw std::invalid_argument("goal_check: state too short");
  return (state.head(n) - ws.goal_center).norm() <= ws.goal_radius;
}

void PointRobotProblem::validate() const {
  if (model != ModelKind::kPlanarRd1 && model != ModelKind::kUnicycleRd2) {
    throw std::invalid_argument("point robot problem needs a planar or unicycle model");
  }
  workspace.validate();
  if (workspace.state_lower.size() != 2) {
    throw std::invalid_argument("point robot workspace must be planar");
  }
  steer.validate();
  if (model == ModelKind::kPlanarRd1) {
    rd1.validate();
  } else {
    rd2.validate();
  }
  if (bounds.dim() != control_dim()) throw std::invalid_argument("control bounds dimension");
  bounds.validate();
  if (inflation < 0.0) throw std::invalid_argument("inflation must be nonnegative");
  for (const auto& obs : obstacles) {
    if (const auto* c = std::get_if<CircleObstacle>(&obs)) c->validate();
  }
}

int PointRobotProblem::control_dim() const {
  if (model == ModelKind::kUnicycleRd2) return 1;
  return planar_control == PlanarControl::kVelocity ? 2 : 1;
}

namespace {

SteerResult steer_planar(const PointRobotProblem& p, const Vec& x0, double theta, double t0) {
  const double dt = p.steer.dt();
  const Vec2 heading(std::cos(theta), std::sin(theta));
  const bool velocity_mode = p.planar_control == PlanarControl::kVelocity;

  qp::QpProblem qp_problem;
  qp_problem.bounds = p.bounds;
  if (velocity_mode) {
    qp_problem.u_ref = p.steer.v_ref * heading;
  } else {
    qp_problem.u_ref = Vec::Constant(1, p.steer.v_ref);
  }

  SteerResult out;
  out.path.model = ModelKind::kPlanarRd1;
  Vec2 x = x0.head<2>();
  out.path.samples.push_back({t0, x, Vec2::Zero()});
  for (int step = 0; step < p.steer.substeps; ++step) {
    const double t = out.path.samples.back().t;
    qp_problem.rows.clear();
    for (const auto& obs : p.obstacles) {
      const auto snap = snapshot(obs, t);
      qp_problem.rows.push_back(velocity_mode
                                    ? cbf::rd1_velocity_row(x, snap, p.rd1, p.inflation)
                                    : cbf::rd1_row(x, theta, snap, p.rd1, p.inflation));
    }
    const auto sol = qp::solve(qp_problem);
    if (!sol.feasible()) {
      out.status = SteerStatus::kInfeasible;
      return out;
    }
    const Vec2 velocity = velocity_mode ? Vec2(*sol.u_opt) : Vec2((*sol.u_opt)[0] * heading);
    const Vec2 next = x + dt * velocity;
    if (!p.workspace.in_box(next)) {
      out.status = SteerStatus::kLeftWorkspace;
      return out;
    }
    out.path.samples.back().control = velocity;
    x = next;
    out.path.samples.push_back({t0 + (step + 1) * dt, x, Vec2::Zero()});
    if (p.stop_at_goal && goal_check(x, p.workspace)) {
      out.status = SteerStatus::kReachedGoal;
      return out;
    }
  }
  out.status = SteerStatus::kCompleted;
  return out;
}

SteerResult steer_unicycle(const PointRobotProblem& p, const Vec& x0, double theta_target,
                           double t0) {
  const double dt = p.steer.dt();
  const double v = p.steer.v_ref;
  UnicycleState s = UnicycleState::from_vector(x0);

  SteerResult out;
  out.path.model = ModelKind::kUnicycleRd2;
  out.path.samples.push_back({t0, s.to_vector(), Vec2::Zero()});

  // h >= 0 alone is not enough at second order: h' + p h >= 0 must hold too,
  // where p is the fast root of the gain polynomial.
  for (const auto& obs : p.obstacles) {
    const auto snap = snapshot(obs, t0);
    const double h = cbf::barrier_value(s.position(), snap, p.inflation);
    if (cbf::rd2_barrier_rate(s, v, snap) + p.rd2.fast_rate() * h < -kStartTol) {
      out.status = SteerStatus::kInfeasible;
      return out;
    }
  }

  qp::QpProblem qp_problem;
  qp_problem.bounds = p.bounds;
  for (int step = 0; step < p.steer.substeps; ++step) {
    const double t = out.path.samples.back().t;
    qp_problem.u_ref = Vec::Constant(1, p.steer.heading_gain * wrap_angle(theta_target - s.theta));
    qp_problem.rows.clear();
    for (const auto& obs : p.obstacles) {
      qp_problem.rows.push_back(cbf::rd2_row(s, v, snapshot(obs, t), p.rd2, p.inflation));
    }
    const auto sol = qp::solve(qp_problem);
    if (!sol.feasible()) {
      out.status = SteerStatus::kInfeasible;
      return out;
    }
    const double omega = (*sol.u_opt)[0];
    UnicycleState next{s.x1 + dt * v * std::cos(s.theta), s.x2 + dt * v * std::sin(s.theta),
                       wrap_angle(s.theta + dt * omega)};
    if (!p.workspace.in_box(next.position())) {
      out.status = SteerStatus::kLeftWorkspace;
      return out;
    }
    out.path.samples.back().control = Vec2(v, omega);
    s = next;
    out.path.samples.push_back({t0 + (step + 1) * dt, s.to_vector(), Vec2::Zero()});
    if (p.stop_at_goal && goal_check(s.position(), p.workspace)) {
      out.status = SteerStatus::kReachedGoal;
      return out;
    }
  }
  out.status = SteerStatus::kCompleted;
  return out;
}

void require_safe_start(const PointRobotProblem& p, const Vec& x, double t) {
  for (const auto& obs : p.obstacles) {
    if (cbf::barrier_value(x.head<2>(), snapshot(obs, t), p.inflation) < -kStartTol) {
      throw std::invalid_argument("start state violates an obstacle barrier");
    }
  }
}

}  // namespace

SteerResult safe_steer(const PointRobotProblem& problem, const Vec& x, double theta, double t0) {
  if (x.size() != problem.state_dim()) throw std::invalid_argument("safe_steer: state dimension");
  require_safe_start(problem, x, t0);
  if (problem.model == ModelKind::kUnicycleRd2) return steer_unicycle(problem, x, theta, t0);
  return steer_planar(problem, x, theta, t0);
}

double min_barrier(const Trajectory& path, const std::vector<DiscObstacle>& obstacles,
                   double inflation) {
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& sample : path.samples) {
    for (const auto& obs : obstacles) {
      lowest = std::min(lowest, cbf::barrier_value(sample.state.head<2>(),
                                                   snapshot(obs, sample.t), inflation));
    }
  }
  return lowest;
}

PlanResult plan(const PointRobotProblem& problem, const Vec& x_init, RandomSource& rng,
                int max_iters, double t_init) {
  problem.validate();
  if (x_init.size() != problem.state_dim()) throw std::invalid_argument("plan: state dimension");
  require_safe_start(problem, x_init, t_init);

  Vec root = x_init;
  if (problem.model == ModelKind::kUnicycleRd2) root[2] = wrap_angle(root[2]);
  PlanResult result{Tree(problem.model, root, t_init), std::nullopt, 0, 0};
  if (goal_check(root, problem.workspace)) {
    result.path = result.tree.dense_path_to(0);
    return result;
  }

  const Vec2 goal = problem.workspace.goal_center.head<2>();
  for (int iter = 0; iter < max_iters; ++iter) {
    result.iterations = iter + 1;
    const std::size_t from = sample_vertex(result.tree, problem.steer.vertex_bias_ratio, rng);
    const Vertex& v = result.tree.vertex(from);
    const double theta = sample_heading(v.state.head<2>(), goal, problem.steer.sigma2,
                                        problem.steer.goal_bias_ratio, rng);
    auto steer = safe_steer(problem, v.state, theta, v.time);
    if (!steer.usable()) continue;
    const bool reached = steer.status == SteerStatus::kReachedGoal;
    const std::size_t child = result.tree.add_child(from, std::move(steer.path));
    if (reached) {
      result.goal_vertex = child;
      result.path = result.tree.dense_path_to(child);
      return result;
    }
  }
  return result;
}

}  // namespace cbfrrt::planner
