#include "cbfrrt/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "cbfrrt/trajectory_io.hpp"

namespace cbfrrt {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

/// Maps model coordinates to SVG user units with y pointing up.
struct Frame {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  double scale = 0.05;

  double width() const { return (x1 - x0) / scale; }
  double height() const { return (y1 - y0) / scale; }
  double sx(double x) const { return (x - x0) / scale; }
  double sy(double y) const { return (y1 - y) / scale; }
  double len(double d) const { return d / scale; }
};

std::string polyline(const Frame& f, const Trajectory& traj, const std::string& color,
                     double width, std::size_t stride) {
  std::string pts;
  const std::size_t n = traj.samples.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i % stride != 0 && i + 1 != n) continue;
    const Vec& s = traj.samples[i].state;
    if (!pts.empty()) pts += ' ';
    pts += fmt(f.sx(s[0])) + ',' + fmt(f.sy(s[1]));
  }
  return "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + fmt(width) +
         "\" points=\"" + pts + "\"/>\n";
}

std::string marker(const Frame& f, const Vec& p, double r, const std::string& color,
                   const std::string& cls) {
  return "<circle class=\"" + cls + "\" cx=\"" + fmt(f.sx(p[0])) + "\" cy=\"" + fmt(f.sy(p[1])) +
         "\" r=\"" + fmt(r) + "\" fill=\"" + color + "\"/>\n";
}

std::string star(double cx, double cy, double r, const std::string& color) {
  std::string pts;
  for (int k = 0; k < 10; ++k) {
    const double a = kPi / 2.0 + k * kPi / 5.0;
    const double rr = k % 2 == 0 ? r : 0.4 * r;
    if (k) pts += ' ';
    pts += fmt(cx + rr * std::cos(a)) + ',' + fmt(cy - rr * std::sin(a));
  }
  return "<polygon class=\"vertex\" fill=\"" + color + "\" points=\"" + pts + "\"/>\n";
}

std::string open_svg(const Frame& f) {
  const double pad = 10.0;
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(f.width() + 2 * pad) +
         "\" height=\"" + fmt(f.height() + 2 * pad) + "\" viewBox=\"" + fmt(-pad) + ' ' +
         fmt(-pad) + ' ' + fmt(f.width() + 2 * pad) + ' ' + fmt(f.height() + 2 * pad) + "\">\n";
  out += "<defs><clipPath id=\"frame\"><rect x=\"0\" y=\"0\" width=\"" + fmt(f.width()) +
         "\" height=\"" + fmt(f.height()) + "\"/></clipPath></defs>\n";
  out += "<rect class=\"frame\" x=\"0\" y=\"0\" width=\"" + fmt(f.width()) + "\" height=\"" +
         fmt(f.height()) + "\" fill=\"white\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out += "<g clip-path=\"url(#frame)\">\n";
  return out;
}

void workspace_body(std::string& out, const Frame& f, const Scenario& s,
                    const std::vector<const planner::Tree*>& trees,
                    const std::vector<const Trajectory*>& references,
                    const std::vector<const Trajectory*>& tracked, double t_display) {
  const RenderSettings& r = s.render;
  for (const auto& o : s.obstacles) {
    const Vec2 c = obstacle_position_at(o, t_display);
    out += "<circle class=\"obstacle\" cx=\"" + fmt(f.sx(c.x())) + "\" cy=\"" + fmt(f.sy(c.y())) +
           "\" r=\"" + fmt(f.len(o.radius)) + "\" fill=\"" + r.obstacle_color + "\"/>\n";
  }
  for (const auto* tree : trees) {
    for (const auto& e : tree->edges()) out += polyline(f, e.path, r.tree_color, 0.5, 10);
  }
  for (const auto* t : references) out += polyline(f, *t, r.reference_color, 1.5, 1);
  for (const auto* t : tracked) out += polyline(f, *t, r.tracked_color, 1.0, 1);
  for (const auto& robot : s.robots) {
    out += "<circle class=\"goal-region\" cx=\"" + fmt(f.sx(robot.spec.goal.x())) + "\" cy=\"" +
           fmt(f.sy(robot.spec.goal.y())) + "\" r=\"" + fmt(f.len(robot.spec.goal_radius)) +
           "\" fill=\"none\" stroke=\"" + r.goal_color + "\" stroke-width=\"0.8\"/>\n";
    out += marker(f, robot.spec.start, 4.0, r.start_color, "start");
    out += marker(f, robot.spec.goal, 4.0, r.goal_color, "goal");
  }
}

void cspace_body(std::string& out, const Frame& f, const Scenario& s,
                 const std::vector<const planner::Tree*>& trees,
                 const std::vector<const Trajectory*>& references, double t_display) {
  const RenderSettings& r = s.render;
  if (s.model == ModelKind::kArmTwoLink && !s.spheres.empty()) {
    const auto chain = make_chain(s);
    const int cells = 120;
    const double cw = (f.x1 - f.x0) / cells;
    const double ch = (f.y1 - f.y0) / cells;
    for (int i = 0; i < cells; ++i) {
      for (int j = 0; j < cells; ++j) {
        const Vec theta = Vec2(f.x0 + (i + 0.5) * cw, f.y0 + (j + 0.5) * ch);
        bool hit = false;
        for (const auto& o : s.spheres) {
          for (int link = 1; link <= chain.link_count() && !hit; ++link) {
            hit = arm::link_clearance(chain, link, theta, o, t_display) < 0.0;
          }
        }
        if (!hit) continue;
        out += "<rect class=\"cspace-obstacle\" x=\"" + fmt(f.sx(f.x0 + i * cw)) + "\" y=\"" +
               fmt(f.sy(f.y0 + (j + 1) * ch)) + "\" width=\"" + fmt(f.len(cw)) + "\" height=\"" +
               fmt(f.len(ch)) + "\" fill=\"#000000\"/>\n";
      }
    }
  }
  for (const auto* tree : trees) {
    for (const auto& e : tree->edges()) out += polyline(f, e.path, r.cspace_tree_color, 0.5, 10);
    for (const auto& v : tree->vertices()) {
      out += star(f.sx(v.state[0]), f.sy(v.state[1]), 2.0, r.vertex_color);
    }
  }
  for (const auto* t : references) out += polyline(f, *t, r.reference_color, 1.5, 1);
  out += marker(f, s.arm.theta_init, 4.0, r.start_color, "start");
  out += marker(f, s.arm.theta_goal, 4.0, r.goal_color, "goal");
}

}  // namespace

std::string render_svg(const Scenario& s, const std::vector<const planner::Tree*>& trees,
                       const std::vector<const Trajectory*>& references,
                       const std::vector<const Trajectory*>& tracked, double t_display) {
  Frame f;
  f.scale = s.render.scale;
  if (s.is_arm()) {
    f.x0 = f.y0 = -s.arm.joint_limit;
    f.x1 = f.y1 = s.arm.joint_limit;
  } else {
    f.x0 = s.state_lower[0];
    f.y0 = s.state_lower[1];
    f.x1 = s.state_upper[0];
    f.y1 = s.state_upper[1];
  }
  std::string out = open_svg(f);
  if (s.is_arm()) {
    cspace_body(out, f, s, trees, references, t_display);
  } else {
    workspace_body(out, f, s, trees, references, tracked, t_display);
  }
  out += "</g>\n</svg>\n";
  return out;
}

void render_svg(const Scenario& scenario, const std::vector<const planner::Tree*>& trees,
                const std::vector<const Trajectory*>& references,
                const std::vector<const Trajectory*>& tracked, double t_display,
                const std::string& path) {
  write_text_file(path, render_svg(scenario, trees, references, tracked, t_display));
}

std::string render_barrier_chart(const std::vector<arm::BarrierLogEntry>& log) {
  const double w = 600.0, h = 300.0, pad = 40.0;
  double t0 = 0.0, t1 = 1.0, h0 = 0.0, h1 = 1.0;
  if (!log.empty()) {
    t0 = t1 = log.front().t;
    h0 = 0.0;
    h1 = log.front().h;
    for (const auto& e : log) {
      t0 = std::min(t0, e.t);
      t1 = std::max(t1, e.t);
      h0 = std::min(h0, e.h);
      h1 = std::max(h1, e.h);
    }
    if (t1 <= t0) t1 = t0 + 1.0;
    if (h1 <= h0) h1 = h0 + 1.0;
  }
  auto px = [&](double t) { return pad + (t - t0) / (t1 - t0) * w; };
  auto py = [&](double v) { return pad + (h1 - v) / (h1 - h0) * h; };

  std::map<std::pair<int, int>, std::string> series;
  for (const auto& e : log) {
    auto& pts = series[{e.obstacle, e.link}];
    if (!pts.empty()) pts += ' ';
    pts += fmt(px(e.t)) + ',' + fmt(py(e.h));
  }
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w + 2 * pad) + "\" height=\"" +
         fmt(h + 2 * pad) + "\">\n";
  out += "<rect x=\"" + fmt(pad) + "\" y=\"" + fmt(pad) + "\" width=\"" + fmt(w) + "\" height=\"" +
         fmt(h) + "\" fill=\"white\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + fmt(pad) + "\" y1=\"" + fmt(py(0.0)) + "\" x2=\"" + fmt(pad + w) +
         "\" y2=\"" + fmt(py(0.0)) + "\" stroke=\"#999999\" stroke-dasharray=\"4 2\"/>\n";
  out += "<text x=\"" + fmt(pad) + "\" y=\"" + fmt(pad + h + 16) + "\" font-size=\"11\">t = " +
         fmt(t0) + "</text>\n";
  out += "<text x=\"" + fmt(pad + w) + "\" y=\"" + fmt(pad + h + 16) +
         "\" font-size=\"11\" text-anchor=\"end\">t = " + fmt(t1) + "</text>\n";
  out += "<text x=\"4\" y=\"" + fmt(pad) + "\" font-size=\"11\">" + fmt(h1) + "</text>\n";
  out += "<text x=\"4\" y=\"" + fmt(pad + h) + "\" font-size=\"11\">" + fmt(h0) + "</text>\n";
  std::size_t k = 0;
  for (const auto& [key, pts] : series) {
    const char* color = palette[k % 8];
    out += "<polyline class=\"barrier\" fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.2\" points=\"" + pts + "\"/>\n";
    out += "<text x=\"" + fmt(pad + w - 60) + "\" y=\"" + fmt(pad + 14 + 14 * k) +
           "\" font-size=\"11\" fill=\"" + color + "\">h" + std::to_string(key.first + 1) +
           std::to_string(key.second) + "</text>\n";
    ++k;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace cbfrrt
