#pragma once

#include <string>
#include <vector>

#include "cbfrrt/arm.hpp"
#include "cbfrrt/planner.hpp"
#include "cbfrrt/scenario.hpp"

namespace cbfrrt {

/// Standalone SVG of a scenario.
///
/// Point-robot models are drawn in the workspace: obstacles at t_display, tree
/// edges, references, tracked paths, start and goal markers. Arm models are
/// drawn in the plane of the first two joints: tree edges, vertices as stars,
/// and for the two-link arm the colliding configurations as black cells.
/// Geometry outside the frame is clipped. Output is deterministic.
std::string render_svg(const Scenario& scenario, const std::vector<const planner::Tree*>& trees,
                       const std::vector<const Trajectory*>& references,
                       const std::vector<const Trajectory*>& tracked, double t_display);

void render_svg(const Scenario& scenario, const std::vector<const planner::Tree*>& trees,
                const std::vector<const Trajectory*>& references,
                const std::vector<const Trajectory*>& tracked, double t_display,
                const std::string& path);

/// Line chart of h against t, one series per (obstacle, link) pair.
std::string render_barrier_chart(const std::vector<arm::BarrierLogEntry>& log);

}  // namespace cbfrrt
