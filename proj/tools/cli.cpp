#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "cbfrrt/scenario.hpp"
#include "cbfrrt/svg.hpp"
#include "cbfrrt/trajectory_io.hpp"

namespace cbfrrt::cli {
namespace {

namespace fs = std::filesystem;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct RunOptions {
  std::string scenario_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = ".";
  int runs = 1;
};

/// Result of one seeded run: files already written, report text for stdout.
struct RunOutput {
  int code = kOk;
  RunReport report;
};

std::string robot_file(const fs::path& dir, int id, const std::string& what) {
  return (dir / ("robot" + std::to_string(id) + "_" + what)).string();
}

double circles_min(const Trajectory& traj, const Scenario& s, double inflation) {
  std::vector<DiscObstacle> obs(s.obstacles.begin(), s.obstacles.end());
  return traj.empty() ? kInf : planner::min_barrier(traj, obs, inflation);
}

double tree_min(const planner::Tree& tree, const Scenario& s, double inflation) {
  double m = kInf;
  for (const auto& e : tree.edges()) m = std::min(m, circles_min(e.path, s, inflation));
  return m;
}

RunOutput run_plan(const Scenario& s, std::uint64_t seed, const fs::path& dir) {
  RunOutput res;
  res.report.command = "plan";
  std::vector<const RobotEntry*> order;
  for (const auto& r : s.robots) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](const RobotEntry* a, const RobotEntry* b) {
    return a->spec.priority < b->spec.priority;
  });

  std::vector<std::unique_ptr<planner::Tree>> trees;
  std::vector<std::shared_ptr<const Trajectory>> refs;
  bool failed = false;
  res.report.min_barrier = kInf;
  for (const RobotEntry* robot : order) {
    RobotReport rr;
    rr.id = robot->spec.id;
    if (failed) {
      rr.outcome = "skipped";
      res.report.robots.push_back(rr);
      continue;
    }
    planner::PointRobotProblem problem = make_point_problem(s, *robot);
    for (const auto& ref : refs) problem.obstacles.push_back(TrajectoryDisc{ref, robot->spec.radius});
    RandomSource rng = RandomSource::derive(seed, static_cast<std::uint64_t>(robot->spec.id), 0);
    try {
      auto plan = planner::plan(problem, start_state(s, *robot), rng, s.max_iters);
      rr.iterations = plan.iterations;
      rr.tree_size = plan.tree.size();
      rr.min_barrier = tree_min(plan.tree, s, robot->spec.radius);
      write_text_file(robot_file(dir, rr.id, "tree.csv"), tree_csv(plan.tree));
      if (plan.path) {
        rr.outcome = "reached";
        rr.path_time = plan.path->end_time() - plan.path->start_time();
        write_trajectory_csv(*plan.path, robot_file(dir, rr.id, "reference.csv"));
        refs.push_back(std::make_shared<const Trajectory>(*plan.path));
      } else {
        rr.outcome = "exhausted";
        failed = true;
      }
      trees.push_back(std::make_unique<planner::Tree>(std::move(plan.tree)));
    } catch (const std::invalid_argument&) {
      rr.outcome = "infeasible-start";
      Trajectory start;
      start.model = s.model;
      start.samples.push_back({0.0, start_state(s, *robot), Vec()});
      rr.min_barrier = planner::min_barrier(start, problem.obstacles, robot->spec.radius);
      failed = true;
    }
    res.report.min_barrier = std::min(res.report.min_barrier, rr.min_barrier);
    res.report.robots.push_back(rr);
  }
  if (refs.size() > 1) {
    double d = kInf;
    for (std::size_t i = 0; i < refs.size(); ++i) {
      for (std::size_t j = i + 1; j < refs.size(); ++j) d = std::min(d, tracker::min_distance(*refs[i], *refs[j]));
    }
    res.report.min_robot_distance = d;
  }
  std::vector<const planner::Tree*> tree_ptrs;
  for (const auto& t : trees) tree_ptrs.push_back(t.get());
  std::vector<const Trajectory*> ref_ptrs;
  for (const auto& r : refs) ref_ptrs.push_back(r.get());
  render_svg(s, tree_ptrs, ref_ptrs, {}, 0.0, (dir / "plan.svg").string());
  res.code = failed ? kExhausted : kOk;
  return res;
}

RunOutput run_track(const Scenario& s, std::uint64_t seed, const fs::path& dir) {
  RunOutput res;
  res.report.command = "track";
  const auto fleet = tracker::plan_fleet(make_fleet_inputs(s), seed);
  res.report.min_barrier = kInf;
  std::vector<const Trajectory*> refs, tracked;
  for (const auto& run : fleet.robots) {
    RobotReport rr;
    rr.id = run.spec.id;
    rr.outcome = std::string(tracker::to_string(run.outcome));
    rr.iterations = run.plan_iterations;
    rr.tree_size = run.tree ? run.tree->size() : 0;
    rr.min_barrier = kInf;
    if (run.tree) rr.min_barrier = tree_min(*run.tree, s, run.spec.radius);
    if (run.reference) {
      write_trajectory_csv(*run.reference, robot_file(dir, rr.id, "reference.csv"));
      refs.push_back(&*run.reference);
    }
    if (run.tracked) {
      write_trajectory_csv(*run.tracked, robot_file(dir, rr.id, "tracked.csv"));
      tracked.push_back(&*run.tracked);
      rr.min_barrier = std::min(rr.min_barrier, circles_min(*run.tracked, s, run.spec.radius));
      rr.path_time = run.tracked->end_time() - run.tracked->start_time();
    }
    res.report.min_barrier = std::min(res.report.min_barrier, rr.min_barrier);
    res.report.robots.push_back(rr);
  }
  if (tracked.size() > 1) {
    double d = kInf;
    for (std::size_t i = 0; i < tracked.size(); ++i) {
      for (std::size_t j = i + 1; j < tracked.size(); ++j) d = std::min(d, tracker::min_distance(*tracked[i], *tracked[j]));
    }
    res.report.min_robot_distance = d;
  }
  render_svg(s, {}, refs, tracked, 0.0, (dir / "track.svg").string());
  res.code = fleet.all_reached() ? kOk : kExhausted;
  return res;
}

RunOutput run_arm(const Scenario& s, std::uint64_t seed, const fs::path& dir) {
  RunOutput res;
  res.report.command = "arm";
  const auto problem = make_arm_problem(s);
  RandomSource rng(seed);
  RobotReport rr;
  rr.id = 1;
  rr.min_barrier = kInf;
  try {
    auto plan = arm::arm_plan(problem, s.arm.theta_init, rng, s.max_iters);
    rr.iterations = plan.iterations;
    rr.tree_size = plan.tree.size();
    for (const auto& e : plan.tree.edges()) {
      for (const auto& b : arm::barrier_log(problem, e.path)) rr.min_barrier = std::min(rr.min_barrier, b.h);
    }
    write_text_file((dir / "tree.csv").string(), tree_csv(plan.tree));
    std::vector<const Trajectory*> refs;
    if (plan.path) {
      rr.outcome = "reached";
      rr.path_time = plan.path->end_time() - plan.path->start_time();
      write_trajectory_csv(*plan.path, (dir / "path.csv").string());
      const auto log = arm::barrier_log(problem, *plan.path);
      write_text_file((dir / "barriers.csv").string(), barrier_csv(log));
      write_text_file((dir / "barriers.svg").string(), render_barrier_chart(log));
      refs.push_back(&*plan.path);
    } else {
      rr.outcome = "exhausted";
    }
    render_svg(s, {&plan.tree}, refs, {}, 0.0, (dir / "cspace.svg").string());
  } catch (const std::invalid_argument&) {
    rr.outcome = "infeasible-start";
    for (const auto& b : arm::active_barriers(problem, s.arm.theta_init, 0.0)) {
      rr.min_barrier = std::min(rr.min_barrier, b.h);
    }
  }
  res.report.min_barrier = rr.min_barrier;
  res.report.robots.push_back(rr);
  res.code = rr.outcome == "reached" ? kOk : kExhausted;
  return res;
}

using Runner = RunOutput (*)(const Scenario&, std::uint64_t, const fs::path&);

int run_seeds(const RunOptions& opt, Runner runner, bool want_arm, bool want_fleet, std::ostream& out,
              std::ostream& err) {
  Scenario s;
  try {
    s = load_scenario(opt.scenario_path);
  } catch (const std::exception& e) {
    err << "error: " << opt.scenario_path << ": " << e.what() << '\n';
    return kUsage;
  }
  if (s.is_arm() != want_arm || (want_fleet && !s.mpc)) {
    err << "error: scenario model " << to_string(s.model) << " does not fit this command\n";
    return kUsage;
  }
  const std::uint64_t base = opt.seed_set ? opt.seed : s.seed;
  std::vector<fs::path> dirs;
  for (int i = 0; i < opt.runs; ++i) {
    dirs.push_back(opt.runs == 1 ? fs::path(opt.out_dir) : fs::path(opt.out_dir) / ("run_" + std::to_string(i)));
  }
  std::vector<RunOutput> results(static_cast<std::size_t>(opt.runs));
  std::vector<std::string> errors(static_cast<std::size_t>(opt.runs));
  auto work = [&](int i) {
    const auto start = std::chrono::steady_clock::now();
    try {
      fs::create_directories(dirs[static_cast<std::size_t>(i)]);
      results[static_cast<std::size_t>(i)] = runner(s, base + static_cast<std::uint64_t>(i), dirs[static_cast<std::size_t>(i)]);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
      return;
    }
    auto& rep = results[static_cast<std::size_t>(i)].report;
    rep.scenario = s.name;
    rep.model = std::string(to_string(s.model));
    rep.seed = base + static_cast<std::uint64_t>(i);
    rep.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  const int workers = std::max(1, std::min<int>(opt.runs, static_cast<int>(std::thread::hardware_concurrency())));
  for (int first = 0; first < opt.runs; first += workers) {
    std::vector<std::thread> pool;
    for (int i = first; i < std::min(opt.runs, first + workers); ++i) pool.emplace_back(work, i);
    for (auto& t : pool) t.join();
  }
  int code = kOk;
  for (int i = 0; i < opt.runs; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (!errors[idx].empty()) {
      err << "error: " << errors[idx] << '\n';
      code = std::max(code, static_cast<int>(kUsage));
      continue;
    }
    const auto& rep = results[idx].report;
    try {
      write_text_file((dirs[idx] / "report.txt").string(), format_report(rep, false));
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      code = std::max(code, static_cast<int>(kUsage));
    }
    out << format_report(rep, true);
    code = std::max(code, results[idx].code);
  }
  return code;
}

int run_verify(const std::string& scenario_path, const std::string& csv_path, int robot_id, double tol,
               std::ostream& out, std::ostream& err) {
  Scenario s;
  Trajectory traj;
  try {
    s = load_scenario(scenario_path);
    traj = read_trajectory_csv(csv_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  if (traj.model != s.model) {
    err << "error: trajectory model " << to_string(traj.model) << " does not match scenario model "
        << to_string(s.model) << '\n';
    return kUsage;
  }
  double worst = kInf;
  std::string where;
  auto note = [&](double h, double t, int i, int j) {
    if (h < worst) {
      worst = h;
      std::ostringstream w;
      w << "t=" << t << " obstacle=" << i;
      if (j > 0) w << " link=" << j;
      where = w.str();
    }
  };
  if (s.is_arm()) {
    const auto problem = make_arm_problem(s);
    for (const auto& sample : traj.samples) {
      for (const auto& b : arm::active_barriers(problem, sample.state, sample.t)) {
        note(arm::link_barrier(problem.chain, b.link, sample.state, problem.obstacles[static_cast<std::size_t>(b.obstacle)], sample.t),
             sample.t, b.obstacle + 1, b.link);
      }
    }
  } else {
    auto it = std::find_if(s.robots.begin(), s.robots.end(),
                           [&](const RobotEntry& r) { return r.spec.id == robot_id; });
    if (it == s.robots.end()) {
      err << "error: no robot " << robot_id << " in scenario\n";
      return kUsage;
    }
    for (const auto& sample : traj.samples) {
      const Vec2 p(sample.state[0], sample.state[1]);
      for (std::size_t i = 0; i < s.obstacles.size(); ++i) {
        note(cbf::barrier_value(p, s.obstacles[i], sample.t, it->spec.radius), sample.t,
             static_cast<int>(i) + 1, 0);
      }
    }
  }
  out << "samples = " << traj.size() << '\n';
  if (worst == kInf) {
    out << "min_barrier = none\nverify = ok\n";
    return kOk;
  }
  out << "min_barrier = " << worst << " at " << where << '\n';
  if (worst < -tol) {
    out << "verify = violation\n";
    return kUnsafe;
  }
  out << "verify = ok\n";
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sampling-based planning with control barrier functions", "cbfrrt"};
  app.require_subcommand(1);

  RunOptions plan_opt, track_opt, arm_opt;
  auto add_run = [&](const char* name, const char* help, RunOptions& o) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("scenario", o.scenario_path, "Scenario file")->required();
    sub->add_option("--seed", o.seed, "Base seed (default: scenario seed)")
        ->each([&o](const std::string&) { o.seed_set = true; });
    sub->add_option("--out", o.out_dir, "Output directory");
    sub->add_option("--runs", o.runs, "Independent seeds to run in parallel")->check(CLI::PositiveNumber);
    return sub;
  };
  auto* plan = add_run("plan", "Plan reference paths with CBF-RRT", plan_opt);
  auto* track = add_run("track", "Plan and track the whole fleet", track_opt);
  auto* arm_cmd = add_run("arm", "Plan a joint-space path for an arm", arm_opt);

  std::string v_scenario, v_csv;
  int v_robot = 1;
  double v_tol = 1e-3;
  auto* verify = app.add_subcommand("verify", "Recompute barriers along a stored trajectory");
  verify->add_option("scenario", v_scenario, "Scenario file")->required();
  verify->add_option("trajectory", v_csv, "Trajectory CSV")->required();
  verify->add_option("--robot", v_robot, "Robot id for point-robot scenarios");
  verify->add_option("--tol", v_tol, "Allowed barrier undershoot")->check(CLI::NonNegativeNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kUsage;
  }

  if (*plan) return run_seeds(plan_opt, run_plan, false, false, out, err);
  if (*track) return run_seeds(track_opt, run_track, false, true, out, err);
  if (*arm_cmd) return run_seeds(arm_opt, run_arm, true, false, out, err);
  return run_verify(v_scenario, v_csv, v_robot, v_tol, out, err);
}

}  // namespace cbfrrt::cli
