#include "cbfrrt/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace cbfrrt::tracker {
namespace {

constexpr double kStartTol = 1e-6;

// Displacement rows: x_k = x0 + dt * dir * (v_0 + ... + v_{k-1}).
Vec prefix_row(int n, int k) {
  Vec s = Vec::Zero(n);
  s.head(k).setOnes();
  return s;
}

}  // namespace

void MpcConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("mpc: horizon must be at least 1");
  if ((q.array() < 0.0).any() || (terminal.array() < 0.0).any()) {
    throw std::invalid_argument("mpc: weights must be nonnegative");
  }
  if (!(r > 0.0)) throw std::invalid_argument("mpc: R must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("mpc: dt must be positive");
  if (heading_sigma2 < 0.0) throw std::invalid_argument("mpc: heading variance");
  if (max_steps < 0) throw std::invalid_argument("mpc: max_steps must be nonnegative");
  if (!(lag_tolerance > 0.0)) throw std::invalid_argument("mpc: lag tolerance must be positive");
}

qp::WeightedQp assemble(const MpcProblem& p) {
  p.config.validate();
  const int n = p.config.horizon;
  if (static_cast<int>(p.ref_window.size()) != n + 1 || p.u_ref.size() != n) {
    throw std::invalid_argument("mpc: window length must match the horizon");
  }
  if (p.bounds.dim() != 1) throw std::invalid_argument("mpc: speed bounds must be scalar");
  const double dt = p.config.dt;
  const Vec2 dir(std::cos(p.theta), std::sin(p.theta));

  qp::WeightedQp out;
  out.hessian = 2.0 * p.config.r * Eigen::MatrixXd::Identity(n, n);
  out.gradient = -2.0 * p.config.r * p.u_ref;
  for (int k = 1; k <= n; ++k) {
    const Vec2 weight = k == n ? p.config.terminal : p.config.q;
    const Vec s = prefix_row(n, k);
    const Vec2 error = (p.x0 - p.ref_window[k]) / dt;
    const double w = dir.cwiseProduct(weight).dot(dir);
    const double c = dir.cwiseProduct(weight).dot(error);
    out.hessian += 2.0 * w * s * s.transpose();
    out.gradient += 2.0 * c * s;
  }
  out.bounds = ControlBounds{Vec::Constant(n, p.bounds.lower[0]),
                             Vec::Constant(n, p.bounds.upper[0])};

  const Vec nominal = p.nominal ? *p.nominal : p.u_ref;
  if (nominal.size() != n) throw std::invalid_argument("mpc: nominal length");
  for (int k = 0; k < n; ++k) {
    const Vec s = prefix_row(n, k);
    const double t = p.t0 + k * dt;
    const Vec2 x_nom = p.x0 + dt * dir * s.dot(nominal);
    for (const auto& obs : p.obstacles) {
      const auto snap = snapshot(obs, t);
      const Vec2 d = x_nom - snap.center;
      const double h = cbf::barrier_value(x_nom, snap, p.inflation);
      const double motion = -2.0 * d.dot(snap.velocity);
      // h' + k h >= 0 with h linearized in the earlier speeds.
      const double slope = 2.0 * d.dot(dir) * dt;
      Vec a = p.rd1.k * slope * s;
      a[k] += 2.0 * d.dot(dir);
      const double b = -p.rd1.k * (h - slope * s.dot(nominal)) - motion;
      out.rows.push_back({a, b});
    }
  }
  for (int k = 1; k <= n; ++k) {
    const Vec s = prefix_row(n, k);
    for (int i = 0; i < 2; ++i) {
      if (dir[i] == 0.0) continue;
      out.rows.push_back({dt * dir[i] * s, p.state_lower[i] - p.x0[i]});
      out.rows.push_back({-dt * dir[i] * s, p.x0[i] - p.state_upper[i]});
    }
  }
  return out;
}

MpcSolution mpc_step(const MpcProblem& problem) {
  return {qp::solve(assemble(problem)).u_opt};
}

std::string_view to_string(TrackStatus status) {
  switch (status) {
    case TrackStatus::kReachedGoal:
      return "reached";
    case TrackStatus::kBudgetExhausted:
      return "exhausted";
    case TrackStatus::kInfeasibleStart:
      return "infeasible-start";
  }
  return "unknown";
}

TrackResult track(const TrackInputs& in, RandomSource& rng) {
  if (in.reference == nullptr || in.reference->empty()) {
    throw std::invalid_argument("track: empty reference");
  }
  in.config.validate();
  in.rd1.validate();
  const Trajectory& ref = *in.reference;
  const int n = in.config.horizon;
  const double dt = in.config.dt;
  const double inflation = in.spec.radius;
  const int hold_steps =
      static_cast<int>(std::ceil(std::max(0.0, in.hold_until - ref.start_time()) / dt));
  const int budget = in.config.max_steps > 0
                         ? in.config.max_steps
                         : 3 * static_cast<int>(ref.size()) + 1000 + hold_steps;
  bool reached = false;

  TrackResult out;
  out.trajectory.model = ModelKind::kPlanarRd1;
  Vec2 x = in.spec.start;
  double t = ref.start_time();
  out.trajectory.samples.push_back({t, x, Vec2::Zero()});
  for (const auto& obs : in.obstacles) {
    if (cbf::barrier_value(x, snapshot(obs, t), inflation) < -kStartTol) {
      out.status = TrackStatus::kInfeasibleStart;
      return out;
    }
  }

  MpcProblem p;
  p.obstacles = in.obstacles;
  p.inflation = inflation;
  p.rd1 = in.rd1;
  p.config = in.config;
  p.bounds = in.bounds;
  p.state_lower = in.state_lower;
  p.state_upper = in.state_upper;
  p.ref_window.resize(n + 1);
  p.u_ref.resize(n);
  double last_heading = 0.0;
  std::optional<Vec> previous;
  double clock = ref.start_time();  // reference time

  for (int step = 0; step < budget; ++step) {
    reached = reached || (x - in.spec.goal).norm() <= in.spec.goal_radius;
    if (reached && t >= in.hold_until) {
      out.status = TrackStatus::kReachedGoal;
      return out;
    }
    for (int k = 0; k <= n; ++k) p.ref_window[k] = ref.state_at(clock + k * dt).head<2>();
    for (int k = 0; k < n; ++k) p.u_ref[k] = (p.ref_window[k + 1] - p.ref_window[k]).norm() / dt;
    const Vec2 to_target = p.ref_window[n] - x;
    if (to_target.norm() > 1e-12) last_heading = std::atan2(to_target.y(), to_target.x());
    double theta = last_heading;
    if (in.config.heading_sigma2 > 0.0) {
      theta = wrap_angle(normal_sample(rng, last_heading, in.config.heading_sigma2));
    }
    p.x0 = x;
    p.t0 = t;
    p.nominal.reset();
    if (previous) {
      Vec shifted(n);
      shifted.head(n - 1) = previous->tail(n - 1);
      shifted[n - 1] = (*previous)[n - 1];
      p.nominal = shifted;
    }

    p.theta = theta;
    const auto sol = mpc_step(p);
    Vec2 velocity = Vec2::Zero();
    if (sol.feasible()) {
      velocity = sol.first() * Vec2(std::cos(theta), std::sin(theta));
      previous = *sol.speeds;
    } else {
      // Fallback: one-step planar velocity filter, then standing still.
      ++out.fallback_steps;
      previous.reset();
      qp::QpProblem filter;
      filter.u_ref = p.u_ref[0] * Vec2(std::cos(last_heading), std::sin(last_heading));
      filter.bounds = ControlBounds::uniform(2, in.bounds.lower[0], in.bounds.upper[0]);
      for (const auto& obs : in.obstacles) {
        filter.rows.push_back(cbf::rd1_velocity_row(x, snapshot(obs, t), in.rd1, inflation));
      }
      for (int i = 0; i < 2; ++i) {
        Vec a = Vec::Zero(2);
        a[i] = dt;
        filter.rows.push_back({a, in.state_lower[i] - x[i]});
        filter.rows.push_back({-a, x[i] - in.state_upper[i]});
      }
      if (const auto safe = qp::solve(filter); safe.feasible()) velocity = *safe.u_opt;
    }
    out.trajectory.samples.back().control = velocity;
    x += dt * velocity;
    t = ref.start_time() + (step + 1) * dt;
    out.trajectory.samples.push_back({t, x, Vec2::Zero()});
    if ((x - ref.state_at(clock).head<2>()).norm() <= in.config.lag_tolerance) clock += dt;
  }
  reached = reached || (x - in.spec.goal).norm() <= in.spec.goal_radius;
  out.status = reached ? TrackStatus::kReachedGoal : TrackStatus::kBudgetExhausted;
  return out;
}

std::string_view to_string(RobotOutcome outcome) {
  switch (outcome) {
    case RobotOutcome::kReached:
      return "reached";
    case RobotOutcome::kPlanExhausted:
      return "exhausted";
    case RobotOutcome::kTrackExhausted:
      return "track-exhausted";
    case RobotOutcome::kInfeasibleStart:
      return "infeasible-start";
    case RobotOutcome::kSkipped:
      return "skipped";
  }
  return "unknown";
}

bool FleetResult::all_reached() const {
  return std::all_of(robots.begin(), robots.end(),
                     [](const RobotRun& r) { return r.outcome == RobotOutcome::kReached; });
}

FleetResult plan_fleet(const FleetInputs& in, std::uint64_t seed) {
  std::vector<RobotSpec> order = in.fleet;
  std::stable_sort(order.begin(), order.end(),
                   [](const RobotSpec& a, const RobotSpec& b) { return a.priority < b.priority; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i].priority == order[i - 1].priority) {
      throw std::invalid_argument("plan_fleet: priorities must be unique");
    }
  }

  FleetResult result;
  std::vector<DiscObstacle> plan_obstacles(in.obstacles.begin(), in.obstacles.end());
  std::vector<DiscObstacle> track_obstacles = plan_obstacles;
  bool failed = false;
  double busy_until = 0.0;
  for (const auto& spec : order) {
    if (!(spec.radius > 0.0)) throw std::invalid_argument("plan_fleet: robot radius");
    RobotRun run;
    run.spec = spec;
    if (failed) {
      result.robots.push_back(std::move(run));
      continue;
    }

    planner::PointRobotProblem problem;
    problem.model = ModelKind::kPlanarRd1;
    problem.workspace = in.workspace;
    problem.workspace.goal_center = spec.goal;
    problem.workspace.goal_radius = spec.goal_radius;
    problem.obstacles = plan_obstacles;
    problem.inflation = spec.radius;
    problem.steer = in.steer;
    problem.rd1 = in.rd1;
    problem.bounds = in.bounds;

    auto plan_rng = RandomSource::derive(seed, static_cast<std::uint64_t>(spec.id), 0);
    std::optional<planner::PlanResult> planned;
    try {
      planned.emplace(planner::plan(problem, spec.start, plan_rng, in.max_iters));
    } catch (const std::invalid_argument&) {
      run.outcome = RobotOutcome::kInfeasibleStart;
    }
    if (planned) {
      run.plan_iterations = planned->iterations;
      run.tree = planned->tree;
      if (!planned->reached()) {
        run.outcome = RobotOutcome::kPlanExhausted;
      } else {
        run.reference = *planned->path;
        TrackInputs ti;
        ti.reference = &*run.reference;
        ti.obstacles = track_obstacles;
        ti.spec = spec;
        ti.config = in.mpc;
        ti.rd1 = in.rd1;
        ti.bounds = ControlBounds::uniform(1, in.bounds.lower.minCoeff(),
                                           in.bounds.upper.maxCoeff());
        ti.state_lower = in.workspace.state_lower.head<2>();
        ti.state_upper = in.workspace.state_upper.head<2>();
        ti.hold_until = busy_until;
        auto track_rng = RandomSource::derive(seed, static_cast<std::uint64_t>(spec.id), 1);
        auto tracked = track(ti, track_rng);
        run.tracked = std::move(tracked.trajectory);
        if (tracked.status == TrackStatus::kReachedGoal) {
          run.outcome = RobotOutcome::kReached;
        } else if (tracked.status == TrackStatus::kInfeasibleStart) {
          run.outcome = RobotOutcome::kInfeasibleStart;
        } else {
          run.outcome = RobotOutcome::kTrackExhausted;
        }
      }
    }
    if (run.outcome != RobotOutcome::kReached) {
      failed = true;
    } else {
      plan_obstacles.push_back(
          TrajectoryDisc{std::make_shared<const Trajectory>(*run.reference), spec.radius});
      track_obstacles.push_back(
          TrajectoryDisc{std::make_shared<const Trajectory>(*run.tracked), spec.radius});
      busy_until = std::max(busy_until, run.tracked->end_time());
    }
    result.robots.push_back(std::move(run));
  }
  return result;
}

double min_distance(const Trajectory& a, const Trajectory& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("min_distance: empty trajectory");
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& s : a.samples) {
    lowest = std::min(lowest, (s.state.head<2>() - b.state_at(s.t).head<2>()).norm());
  }
  for (const auto& s : b.samples) {
    lowest = std::min(lowest, (s.state.head<2>() - a.state_at(s.t).head<2>()).norm());
  }
  return lowest;
}

}  // namespace cbfrrt::tracker
