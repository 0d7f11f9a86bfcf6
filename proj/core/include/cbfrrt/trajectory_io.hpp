#pragma once

#include <string>
#include <vector>

#include "cbfrrt/arm.hpp"
#include "cbfrrt/planner.hpp"
#include "cbfrrt/types.hpp"

namespace cbfrrt {

/// Column names for a model:
///   planar-rd1    t,x1,x2,u1,u2
///   unicycle-rd2  t,x1,x2,theta,v,omega
///   arm-*         t,theta1..thetaN,u1..uN
std::vector<std::string> csv_columns(ModelKind model);

/// Header plus one row per sample, floats with 17 significant digits.
std::string trajectory_csv(const Trajectory& traj);
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

/// The model is recovered from the header. Throws std::runtime_error on
/// unknown headers or malformed rows.
Trajectory parse_trajectory_csv(const std::string& text);
Trajectory read_trajectory_csv(const std::string& path);

/// One row per vertex: vertex,parent,t,<state columns>. The root has parent -1.
std::string tree_csv(const planner::Tree& tree);

/// Active barrier values: t,i,j,h with i the obstacle and j the link (both 1-based).
std::string barrier_csv(const std::vector<arm::BarrierLogEntry>& log);

/// Writes `content` verbatim. Throws std::runtime_error on failure.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace cbfrrt
