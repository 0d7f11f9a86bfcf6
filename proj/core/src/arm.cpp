#include "cbfrrt/arm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace cbfrrt::arm {
namespace {

constexpr double kSafetyTol = 1e-4;

Transform element_matrix(const Element& e, double angle) {
  Transform m = Transform::Identity();
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  switch (e.kind) {
    case Element::Kind::kRotX:
      m(1, 1) = c;
      m(1, 2) = s;
      m(2, 1) = -s;
      m(2, 2) = c;
      break;
    case Element::Kind::kRotZ:
      m(0, 0) = c;
      m(0, 1) = s;
      m(1, 0) = -s;
      m(1, 1) = c;
      break;
    case Element::Kind::kTransX:
      m(0, 3) = e.value;
      break;
    case Element::Kind::kTransY:
      m(1, 3) = e.value;
      break;
    case Element::Kind::kTransZ:
      m(2, 3) = e.value;
      break;
  }
  return m;
}

// Derivative of a rotation factor with respect to its angle.
Transform element_derivative(const Element& e, double angle) {
  Transform d = Transform::Zero();
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  if (e.kind == Element::Kind::kRotX) {
    d(1, 1) = -s;
    d(1, 2) = c;
    d(2, 1) = -c;
    d(2, 2) = -s;
  } else if (e.kind == Element::Kind::kRotZ) {
    d(0, 0) = -s;
    d(0, 1) = c;
    d(1, 0) = -c;
    d(1, 1) = -s;
  }
  return d;
}

double element_angle(const Element& e, const Vec& theta) {
  if (e.joint < 0) return e.value;
  return e.value + e.joint_sign * theta[e.joint];
}

bool is_rotation(const Element& e) {
  return e.kind == Element::Kind::kRotX || e.kind == Element::Kind::kRotZ;
}

Transform product(const std::vector<Element>& elements, const Vec& theta) {
  Transform m = Transform::Identity();
  for (const auto& e : elements) m = m * element_matrix(e, element_angle(e, theta));
  return m;
}

// d(product)/dtheta_joint: sum over factors driven by `joint`.
Transform product_derivative(const std::vector<Element>& elements, const Vec& theta, int joint) {
  Transform total = Transform::Zero();
  for (std::size_t k = 0; k < elements.size(); ++k) {
    if (elements[k].joint != joint) continue;
    Transform m = Transform::Identity();
    for (std::size_t i = 0; i < elements.size(); ++i) {
      const auto& e = elements[i];
      const double angle = element_angle(e, theta);
      m = m * (i == k ? Transform(e.joint_sign * element_derivative(e, angle))
                      : element_matrix(e, angle));
    }
    total += m;
  }
  return total;
}

void check_theta(const KinematicChain& chain, const Vec& theta) {
  if (theta.size() != chain.dof) throw std::invalid_argument("joint vector length must equal dof");
}

const LinkCylinder& link_at(const KinematicChain& chain, int j) {
  if (j < 1 || j > chain.link_count()) throw std::out_of_range("link index out of range");
  return chain.links[static_cast<std::size_t>(j - 1)];
}

// Link-frame pose of every link at one configuration.
struct LinkPose {
  Transform frame;
  std::vector<Transform> jacobian;
};

LinkPose link_pose(const KinematicChain& chain, int j, const Vec& theta) {
  const auto& link = link_at(chain, j);
  LinkPose pose;
  pose.frame = link.alignment * chain_frame(chain, link.frame, theta);
  for (const auto& d : chain_frame_jacobian(chain, link.frame, theta)) {
    pose.jacobian.push_back(link.alignment * d);
  }
  return pose;
}

struct CapsuleGeometry {
  double radial = 0.0;     // distance from the infinite axis
  double overshoot = 0.0;  // axial distance beyond the extent, 0 when inside
};

CapsuleGeometry capsule_geometry(const LinkCylinder& link, const Vec3& p) {
  return {std::hypot(p.y(), p.z()),
          std::max({0.0, link.axis_min - p.x(), p.x() - link.axis_max})};
}

bool activation_at(const LinkCylinder& link, const Vec3& p, double obstacle_radius,
                   const ActivationThresholds& thr) {
  const auto g = capsule_geometry(link, p);
  const double reach = obstacle_radius + link.radius;
  if (g.overshoot == 0.0) return std::max(0.0, g.radial - reach) < thr.delta1;
  return std::max(0.0, std::hypot(g.radial, g.overshoot) - reach) < thr.delta2;
}

double barrier_at(const LinkCylinder& link, const Vec3& p, double obstacle_radius) {
  const double reach = obstacle_radius + link.radius;
  return p.y() * p.y() + p.z() * p.z() - reach * reach;
}

qp::LinearRow rate_row_at(const LinkCylinder& link, const LinkPose& pose,
                          const SphereObstacle3D& obs, double t, double k) {
  const Vec3 world = obs.position_at(t);
  const Vec3 p = apply(pose.frame, world);
  const auto n = static_cast<Eigen::Index>(pose.jacobian.size());
  Vec a(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    const Vec3 q = (pose.jacobian[m] * world.homogeneous()).head<3>();
    a[m] = 2.0 * (p.y() * q.y() + p.z() * q.z());
  }
  const Vec3 w = pose.frame.topLeftCorner<3, 3>() * obs.velocity;
  const double motion = 2.0 * (p.y() * w.y() + p.z() * w.z());
  return {a, -k * barrier_at(link, p, obs.radius) - motion};
}

}  // namespace

void KinematicChain::validate() const {
  if (dof < 1) throw std::invalid_argument("chain needs at least one joint");
  if (links.empty()) throw std::invalid_argument("chain needs at least one link");
  for (const auto& step : frame_steps) {
    for (const auto& e : step) {
      if (e.joint >= dof) throw std::invalid_argument("element references a missing joint");
      if (e.joint >= 0 && !is_rotation(e)) {
        throw std::invalid_argument("only rotations may depend on a joint");
      }
    }
  }
  for (const auto& link : links) {
    if (link.frame < 0 || link.frame > frame_count()) {
      throw std::invalid_argument("link refers to a missing frame");
    }
    if (!(link.axis_min < link.axis_max)) throw std::invalid_argument("empty link extent");
    if (!(link.radius > 0.0)) throw std::invalid_argument("link radius must be positive");
  }
}

KinematicChain two_link_chain(double l1, double l2, double link_radius) {
  KinematicChain chain;
  chain.name = "two-link";
  chain.dof = 2;
  chain.frame_steps = {
      {Element::rot_z_joint(0)},
      {Element::rot_z_joint(1), Element::trans_x(-l1)},
  };
  chain.links = {
      {1, Transform::Identity(), 0.0, l1, link_radius},
      {2, Transform::Identity(), 0.0, l2, link_radius},
  };
  chain.validate();
  return chain;
}

KinematicChain baxter_left_arm(const BaxterGeometry& g, double link_radius) {
  KinematicChain chain;
  chain.name = "baxter-left";
  chain.dof = 4;
  chain.base = {Element::rot_z(kPi / 4.0), Element::trans_y(g.mount_y),
                Element::trans_x(-g.mount_x), Element::trans_z(-g.mount_z)};
  chain.frame_steps = {
      {Element::rot_z_joint(0)},
      {Element::rot_z_joint(1, -1.0, -kPi / 2.0), Element::trans_x(-g.l1),
       Element::rot_x(kPi / 2.0)},
      {Element::trans_z(-g.l2), Element::rot_z_joint(2, -1.0), Element::rot_x(-kPi / 2.0)},
      {Element::rot_x(kPi / 2.0), Element::trans_x(-g.l3), Element::rot_z_joint(3, -1.0)},
  };
  // Upper arm and forearm run along local y of their frames. The 69 mm elbow
  // offset between F3 and F4 lies inside the end caps of its neighbours.
  const Transform y_to_x = element_matrix(Element::rot_z(kPi / 2.0), kPi / 2.0);
  chain.links = {
      {1, Transform::Identity(), 0.0, g.l1, link_radius},
      {2, y_to_x, 0.0, g.l2, link_radius},
      {4, y_to_x, 0.0, g.l4 + g.l6, link_radius},
  };
  chain.validate();
  return chain;
}

Transform chain_frame(const KinematicChain& chain, int j, const Vec& theta) {
  check_theta(chain, theta);
  if (j < 0 || j > chain.frame_count()) throw std::out_of_range("frame index out of range");
  Transform m = product(chain.base, theta);
  for (int i = 0; i < j; ++i) m = product(chain.frame_steps[i], theta) * m;
  return m;
}

std::vector<Transform> chain_frame_jacobian(const KinematicChain& chain, int j,
                                            const Vec& theta) {
  check_theta(chain, theta);
  if (j < 0 || j > chain.frame_count()) throw std::out_of_range("frame index out of range");
  Transform frame = product(chain.base, theta);
  std::vector<Transform> d(static_cast<std::size_t>(chain.dof));
  for (int m = 0; m < chain.dof; ++m) d[m] = product_derivative(chain.base, theta, m);
  for (int i = 0; i < j; ++i) {
    const auto& step = chain.frame_steps[i];
    const Transform local = product(step, theta);
    for (int m = 0; m < chain.dof; ++m) {
      d[m] = product_derivative(step, theta, m) * frame + local * d[m];
    }
    frame = local * frame;
  }
  return d;
}

Transform link_frame(const KinematicChain& chain, int j, const Vec& theta) {
  const auto& link = link_at(chain, j);
  return link.alignment * chain_frame(chain, link.frame, theta);
}

Vec3 apply(const Transform& m, const Vec3& p) { return (m * p.homogeneous()).head<3>(); }

void SphereObstacle3D::validate() const {
  if (!(radius > 0.0)) throw std::invalid_argument("sphere radius must be positive");
  if (!center.allFinite() || !velocity.allFinite()) {
    throw std::invalid_argument("sphere center and velocity must be finite");
  }
}

Vec3 obstacle_in_link_frame(const KinematicChain& chain, int j, const Vec& theta,
                            const SphereObstacle3D& obs, double t) {
  return apply(link_frame(chain, j, theta), obs.position_at(t));
}

double link_barrier(const KinematicChain& chain, int j, const Vec& theta,
                    const SphereObstacle3D& obs, double t) {
  return barrier_at(link_at(chain, j), obstacle_in_link_frame(chain, j, theta, obs, t),
                    obs.radius);
}

qp::LinearRow link_barrier_rate_row(const KinematicChain& chain, int j, const Vec& theta,
                                    const SphereObstacle3D& obs, double t, double k) {
  return rate_row_at(link_at(chain, j), link_pose(chain, j, theta), obs, t, k);
}

double link_clearance(const KinematicChain& chain, int j, const Vec& theta,
                      const SphereObstacle3D& obs, double t) {
  const auto& link = link_at(chain, j);
  const auto g = capsule_geometry(link, obstacle_in_link_frame(chain, j, theta, obs, t));
  return std::hypot(g.radial, g.overshoot) - (obs.radius + link.radius);
}

void ActivationThresholds::validate() const {
  if (!(delta2 > 0.0) || !(delta1 > delta2)) {
    throw std::invalid_argument("activation thresholds need delta1 > delta2 > 0");
  }
}

bool activation(const KinematicChain& chain, int j, const Vec& theta, const SphereObstacle3D& obs,
                double t, const ActivationThresholds& thresholds) {
  return activation_at(link_at(chain, j), obstacle_in_link_frame(chain, j, theta, obs, t),
                       obs.radius, thresholds);
}

void ArmProblem::validate() const {
  chain.validate();
  thresholds.validate();
  for (const auto& obs : obstacles) obs.validate();
  if (!(k > 0.0)) throw std::invalid_argument("arm: k must be positive");
  if (!(guard_factor >= 1.0)) throw std::invalid_argument("arm: guard factor must be >= 1");
  if (bounds.dim() != chain.dof) throw std::invalid_argument("arm: bounds dimension");
  bounds.validate();
  workspace.validate();
  if (workspace.state_lower.size() != chain.dof) {
    throw std::invalid_argument("arm: joint box dimension");
  }
  if (substeps < 1 || !(horizon > 0.0)) throw std::invalid_argument("arm: bad horizon");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("arm: sigma2 must be positive");
  if (eta_vs < 0.0 || eta_ss < 0.0) throw std::invalid_argument("arm: ratios must be >= 0");
  if (!(joint_speed > 0.0)) throw std::invalid_argument("arm: joint speed must be positive");
}

std::vector<ActiveBarrier> active_barriers(const ArmProblem& problem, const Vec& theta,
                                           double t) {
  std::vector<ActiveBarrier> out;
  for (int j = 1; j <= problem.chain.link_count(); ++j) {
    const auto& link = link_at(problem.chain, j);
    const Transform frame = link_frame(problem.chain, j, theta);
    for (std::size_t i = 0; i < problem.obstacles.size(); ++i) {
      const auto& obs = problem.obstacles[i];
      const Vec3 p = apply(frame, obs.position_at(t));
      if (activation_at(link, p, obs.radius, problem.thresholds)) {
        out.push_back({static_cast<int>(i), j, barrier_at(link, p, obs.radius)});
      }
    }
  }
  return out;
}

ArmSteerResult arm_safe_steer(const ArmProblem& problem, const Vec& theta, const Vec& u_ref,
                              double t0) {
  check_theta(problem.chain, theta);
  if (u_ref.size() != problem.chain.dof) throw std::invalid_argument("arm: u_ref dimension");
  const int dof = problem.chain.dof;
  const double dt = problem.dt();

  for (const auto& b : active_barriers(problem, theta, t0)) {
    if (b.h < -kSafetyTol) throw std::invalid_argument("arm: start violates an active barrier");
  }

  ArmSteerResult out;
  out.path.model = problem.model;
  out.path.samples.push_back({t0, theta, Vec::Zero(dof)});
  qp::QpProblem qp_problem{u_ref, {}, problem.bounds};
  Vec current = theta;

  auto finish = [&](planner::SteerStatus status) {
    out.status = status;
    const bool usable = status == planner::SteerStatus::kCompleted ||
                        status == planner::SteerStatus::kReachedGoal;
    const double elapsed = out.path.samples.back().t - t0;
    out.committed =
        usable || (problem.partial_policy == PartialEdgePolicy::kCommitIfLong &&
                   out.path.size() >= 2 &&
                   elapsed >= problem.min_commit_fraction * problem.horizon - 1e-12);
    return out;
  };

  ActivationThresholds guard = problem.thresholds;
  guard.delta1 *= problem.guard_factor;
  guard.delta2 *= problem.guard_factor;

  for (int step = 0; step < problem.substeps; ++step) {
    const double t = out.path.samples.back().t;
    qp_problem.rows.clear();
    for (int j = 1; j <= problem.chain.link_count(); ++j) {
      const auto& link = link_at(problem.chain, j);
      const auto pose = link_pose(problem.chain, j, current);
      for (const auto& obs : problem.obstacles) {
        const Vec3 p = apply(pose.frame, obs.position_at(t));
        const bool active_now = activation_at(link, p, obs.radius, problem.thresholds);
        // Near-active pairs that are still safe are kept safe ahead of activation.
        const bool guarded = activation_at(link, p, obs.radius, guard) &&
                             barrier_at(link, p, obs.radius) >= 0.0;
        if (active_now || guarded) qp_problem.rows.push_back(rate_row_at(link, pose, obs, t, problem.k));
      }
    }
    const auto sol = qp::solve(qp_problem);
    if (!sol.feasible()) return finish(planner::SteerStatus::kInfeasible);

    const Vec next = current + dt * (*sol.u_opt);
    if (!problem.workspace.in_box(next)) return finish(planner::SteerStatus::kLeftWorkspace);
    const double t_next = t0 + (step + 1) * dt;
    for (const auto& b : active_barriers(problem, next, t_next)) {
      if (b.h < -kSafetyTol) return finish(planner::SteerStatus::kInfeasible);
    }
    out.path.samples.back().control = *sol.u_opt;
    current = next;
    out.path.samples.push_back({t_next, current, Vec::Zero(dof)});
    if (problem.stop_at_goal && planner::goal_check(current, problem.workspace)) {
      return finish(planner::SteerStatus::kReachedGoal);
    }
  }
  return finish(planner::SteerStatus::kCompleted);
}

Vec sample_direction(const Vec& current, const Vec& goal, double sigma2, double eta_ss,
                     RandomSource& rng) {
  if (current.size() != goal.size()) throw std::invalid_argument("sample_direction: dimension");
  if (std::isnan(eta_ss) || eta_ss < 0.0) {
    throw std::invalid_argument("sample_direction: eta_ss must be nonnegative");
  }
  const Vec to_goal = goal - current;
  const double distance = to_goal.norm();
  if (distance == 0.0) throw std::invalid_argument("sample_direction: already at the goal");
  const double random_share = std::isinf(eta_ss) ? 1.0 : eta_ss / (eta_ss + 1.0);
  const auto n = current.size();
  Vec dir(n);
  if (rng.uniform() < random_share) {
    do {
      for (Eigen::Index i = 0; i < n; ++i) dir[i] = rng.standard_normal();
    } while (dir.norm() == 0.0);
  } else {
    dir = to_goal / distance;
    for (Eigen::Index i = 0; i < n; ++i) dir[i] += normal_sample(rng, 0.0, sigma2);
    if (dir.norm() == 0.0) dir = to_goal / distance;
  }
  return dir / dir.norm();
}

planner::PlanResult arm_plan(const ArmProblem& problem, const Vec& theta_init, RandomSource& rng,
                             int max_iters) {
  problem.validate();
  check_theta(problem.chain, theta_init);
  for (const auto& b : active_barriers(problem, theta_init, 0.0)) {
    if (b.h < -kSafetyTol) throw std::invalid_argument("arm: initial configuration is unsafe");
  }
  planner::PlanResult result{planner::Tree(problem.model, theta_init, 0.0), std::nullopt, 0, 0};
  const Vec& goal = problem.workspace.goal_center;
  if (planner::goal_check(theta_init, problem.workspace)) {
    result.path = result.tree.dense_path_to(0);
    return result;
  }
  for (int iter = 0; iter < max_iters; ++iter) {
    result.iterations = iter + 1;
    const std::size_t from = planner::sample_vertex(result.tree, problem.eta_vs, rng);
    const auto& v = result.tree.vertex(from);
    const Vec dir = sample_direction(v.state, goal, problem.sigma2, problem.eta_ss, rng);
    auto steer = arm_safe_steer(problem, v.state, problem.joint_speed * dir, v.time);
    if (!steer.committed) continue;
    const bool reached = steer.status == planner::SteerStatus::kReachedGoal;
    const std::size_t child = result.tree.add_child(from, std::move(steer.path));
    if (reached) {
      result.goal_vertex = child;
      result.path = result.tree.dense_path_to(child);
      return result;
    }
  }
  return result;
}

std::vector<BarrierLogEntry> barrier_log(const ArmProblem& problem, const Trajectory& path) {
  std::vector<BarrierLogEntry> out;
  for (const auto& s : path.samples) {
    for (const auto& b : active_barriers(problem, s.state, s.t)) {
      out.push_back({s.t, b.obstacle, b.link, b.h});
    }
  }
  return out;
}

}  // namespace cbfrrt::arm
