#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "cbfrrt/planner.hpp"
#include "cbfrrt/qp.hpp"
#include "cbfrrt/types.hpp"

namespace cbfrrt::arm {

/// Homogeneous world-to-frame map, rows/cols 4x4.
using Transform = Eigen::Matrix4d;

/// Elementary factor of a frame map.
///
/// Rotations are coordinate changes into a frame turned by the angle about the
/// axis, so R_z(pi/2) maps world (1, 0, 0) to (0, -1, 0). Translations add
/// `value` along their axis.
struct Element {
  enum class Kind { kRotX, kRotZ, kTransX, kTransY, kTransZ };

  Kind kind = Kind::kRotZ;
  double value = 0.0;     // constant angle offset or translation length
  int joint = -1;         // rotations only: joint whose angle is added, or -1
  double joint_sign = 1.0;

  static Element rot_x(double angle) { return {Kind::kRotX, angle}; }
  static Element rot_z(double angle) { return {Kind::kRotZ, angle}; }
  static Element rot_z_joint(int joint, double sign = 1.0, double offset = 0.0) {
    return {Kind::kRotZ, offset, joint, sign};
  }
  static Element trans_x(double d) { return {Kind::kTransX, d}; }
  static Element trans_y(double d) { return {Kind::kTransY, d}; }
  static Element trans_z(double d) { return {Kind::kTransZ, d}; }
};

/// Cylinder over-approximating one link, expressed in a frame of the chain.
struct LinkCylinder {
  int frame = 1;                                  // 1-based frame index
  Transform alignment = Transform::Identity();    // puts the cylinder axis on local x
  double axis_min = 0.0;
  double axis_max = 1.0;
  double radius = 0.1;
};

/// Serial chain as a sequence of parameterized frame maps:
///   F_0 = base product,  F_j = (frame_steps[j-1] product) * F_{j-1}.
/// Products are written left to right.
struct KinematicChain {
  std::string name;
  int dof = 0;
  std::vector<Element> base;
  std::vector<std::vector<Element>> frame_steps;
  std::vector<LinkCylinder> links;

  int frame_count() const { return static_cast<int>(frame_steps.size()); }
  int link_count() const { return static_cast<int>(links.size()); }
  void validate() const;
};

/// Planar two-link arm: F1 = R_z(th1), F2 = R_z(th2) T_x(-L1) F1; links along +x.
KinematicChain two_link_chain(double l1, double l2, double link_radius);

/// Link lengths of the Baxter left arm, meters.
struct BaxterGeometry {
  double mount_x = 0.278;   // L
  double mount_y = 0.064;   // h
  double mount_z = 1.104;   // H
  double l0 = 0.27035;
  double l1 = 0.069;
  double l2 = 0.36435;
  double l3 = 0.069;
  double l4 = 0.37429;
  double l5 = 0.010;
  double l6 = 0.3683;
};

/// First four joints of the Baxter left arm. Cylinders: shoulder offset (F1),
/// upper arm (F2) and forearm plus wrist (F4).
KinematicChain baxter_left_arm(const BaxterGeometry& geometry, double link_radius);

/// World-to-frame map F_j(theta); j = 0 is the base. Throws std::out_of_range.
Transform chain_frame(const KinematicChain& chain, int j, const Vec& theta);
/// dF_j / dtheta_m for every joint m.
std::vector<Transform> chain_frame_jacobian(const KinematicChain& chain, int j, const Vec& theta);

/// World-to-cylinder map of link j (1-based). Throws std::out_of_range.
Transform link_frame(const KinematicChain& chain, int j, const Vec& theta);

/// Applies a homogeneous map to a point.
Vec3 apply(const Transform& m, const Vec3& p);

struct SphereObstacle3D {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  Vec3 velocity = Vec3::Zero();

  Vec3 position_at(double t) const { return center + velocity * t; }
  void validate() const;
};

Vec3 obstacle_in_link_frame(const KinematicChain& chain, int j, const Vec& theta,
                            const SphereObstacle3D& obs, double t);

/// h_ij = (y^2 + z^2) - (r_obs + r_link)^2 with (y, z) the link-frame obstacle
/// coordinates orthogonal to the cylinder axis.
double link_barrier(const KinematicChain& chain, int j, const Vec& theta,
                    const SphereObstacle3D& obs, double t);

/// Row over the joint rates: a . omega >= b  <=>  h_ij' + k h_ij >= 0. Joint
/// terms use dF_j/dtheta; the obstacle velocity enters through the frame rotation.
qp::LinearRow link_barrier_rate_row(const KinematicChain& chain, int j, const Vec& theta,
                                    const SphereObstacle3D& obs, double t, double k);

/// Signed distance between the finite capsule of link j and the obstacle surface.
double link_clearance(const KinematicChain& chain, int j, const Vec& theta,
                      const SphereObstacle3D& obs, double t);

struct ActivationThresholds {
  double delta1 = 5.0;  // projection inside the link extent
  double delta2 = 0.5;  // projection beyond an end of the link

  void validate() const;
};

/// Case 1 (axial projection inside the extent): active iff distance < delta1.
/// Case 2 (projection outside): active iff distance < delta2.
bool activation(const KinematicChain& chain, int j, const Vec& theta, const SphereObstacle3D& obs,
                double t, const ActivationThresholds& thresholds);

/// What to do with the motion already integrated when a steer stops early.
enum class PartialEdgePolicy { kDiscard, kCommitIfLong };

struct ArmProblem {
  ModelKind model = ModelKind::kArmTwoLink;
  KinematicChain chain;
  std::vector<SphereObstacle3D> obstacles;
  ActivationThresholds thresholds;
  double guard_factor = 2.0;  // pairs inside the scaled thresholds with h >= 0 are also constrained
  double k = 2.0;
  ControlBounds bounds;   // joint rates, rad/s
  Workspace workspace;    // joint box and goal ball, rad
  int substeps = 100;
  double horizon = 0.3;   // t_h, s
  double joint_speed = 1.0;  // |u_ref|, rad/s
  double sigma2 = 0.4;
  double eta_vs = 3.0;
  double eta_ss = 3.0;
  PartialEdgePolicy partial_policy = PartialEdgePolicy::kCommitIfLong;
  double min_commit_fraction = 0.1;
  bool stop_at_goal = true;

  void validate() const;
  double dt() const { return horizon / substeps; }
};

struct ActiveBarrier {
  int obstacle = 0;  // 0-based
  int link = 0;      // 1-based
  double h = 0.0;
};

/// Barrier values of the pairs currently passing the activation test.
std::vector<ActiveBarrier> active_barriers(const ArmProblem& problem, const Vec& theta, double t);

struct ArmSteerResult {
  Trajectory path;
  planner::SteerStatus status = planner::SteerStatus::kInfeasible;
  bool committed = false;  // whether the caller should add the path to the tree
};

/// Euler integration of theta' = u for `horizon` with a QP over the active
/// link barriers at every substep, plus the still-safe pairs inside the guard
/// thresholds. Stops early when the QP is infeasible, the joint box is left,
/// or an active barrier drops below -1e-4. Throws std::invalid_argument if an
/// active barrier is below -1e-4 at the start.
ArmSteerResult arm_safe_steer(const ArmProblem& problem, const Vec& theta, const Vec& u_ref,
                              double t0);

/// Unit direction in joint space: Gaussian-perturbed goal direction with
/// probability 1/(eta+1), otherwise uniform on the sphere.
Vec sample_direction(const Vec& current, const Vec& goal, double sigma2, double eta_ss,
                     RandomSource& rng);

/// Joint-space CBF-RRT. Throws if theta_init violates an active barrier.
planner::PlanResult arm_plan(const ArmProblem& problem, const Vec& theta_init, RandomSource& rng,
                             int max_iters);

struct BarrierLogEntry {
  double t = 0.0;
  int obstacle = 0;
  int link = 0;
  double h = 0.0;
};

/// Active barrier values along a joint trajectory.
std::vector<BarrierLogEntry> barrier_log(const ArmProblem& problem, const Trajectory& path);

}  // namespace cbfrrt::arm
