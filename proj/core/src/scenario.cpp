#include "cbfrrt/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace cbfrrt {

ScenarioError::ScenarioError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& text, int line, const std::string& key) {
  const std::string t = trim(text);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  if (t == "pi") return kPi;
  if (t == "-pi") return -kPi;
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (t.empty() || res.ec != std::errc() || res.ptr != last || std::isnan(v)) {
    throw ScenarioError(line, "'" + key + "': expected a number, got '" + t + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  int line = 0;
  std::map<std::string, Entry> entries;
};

/// Reads or writes the keys of one section. The same binding code drives
/// parsing and serialization, so the two cannot drift apart.
class Binder {
 public:
  virtual ~Binder() = default;
  virtual void real(const std::string& key, double& v, bool length = false) = 0;
  virtual void integer(const std::string& key, int& v) = 0;
  virtual void unsigned64(const std::string& key, std::uint64_t& v) = 0;
  virtual void vector(const std::string& key, Vec& v, int dim) = 0;
  virtual void text(const std::string& key, std::string& v) = 0;
  virtual void choice(const std::string& key, int& index, const std::vector<std::string>& names) = 0;
  virtual bool reading() const = 0;

  void vec2(const std::string& key, Vec2& v) {
    Vec tmp = v;
    vector(key, tmp, 2);
    v = tmp;
  }
  void vec3(const std::string& key, Vec3& v) {
    Vec tmp = v;
    vector(key, tmp, 3);
    v = tmp;
  }
};

class Reader : public Binder {
 public:
  Reader(const Section& section, double length_scale)
      : section_(section), length_scale_(length_scale) {}

  void real(const std::string& key, double& v, bool length) override {
    if (const Entry* e = take(key)) v = parse_number(e->value, e->line, key) * (length ? length_scale_ : 1.0);
  }
  void integer(const std::string& key, int& v) override {
    if (const Entry* e = take(key)) {
      const double d = parse_number(e->value, e->line, key);
      if (d != std::floor(d) || std::abs(d) > 2e9) {
        throw ScenarioError(e->line, "'" + key + "': expected an integer");
      }
      v = static_cast<int>(d);
    }
  }
  void unsigned64(const std::string& key, std::uint64_t& v) override {
    if (const Entry* e = take(key)) {
      const std::string t = trim(e->value);
      auto res = std::from_chars(t.data(), t.data() + t.size(), v);
      if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw ScenarioError(e->line, "'" + key + "': expected a non-negative integer");
      }
    }
  }
  void vector(const std::string& key, Vec& v, int dim) override {
    if (const Entry* e = take(key)) {
      const auto items = split_list(e->value);
      if (dim >= 0 && static_cast<int>(items.size()) != dim) {
        throw ScenarioError(e->line, "'" + key + "': expected " + std::to_string(dim) +
                                         " comma-separated values");
      }
      v.resize(static_cast<Eigen::Index>(items.size()));
      for (std::size_t i = 0; i < items.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = parse_number(items[i], e->line, key);
      }
    }
  }
  void text(const std::string& key, std::string& v) override {
    if (const Entry* e = take(key)) v = trim(e->value);
  }
  void choice(const std::string& key, int& index, const std::vector<std::string>& names) override {
    if (const Entry* e = take(key)) {
      const std::string t = trim(e->value);
      auto it = std::find(names.begin(), names.end(), t);
      if (it == names.end()) throw ScenarioError(e->line, "'" + key + "': unknown value '" + t + "'");
      index = static_cast<int>(it - names.begin());
    }
  }
  bool reading() const override { return true; }

  bool has(const std::string& key) const { return section_.entries.count(key) > 0; }

  void finish() const {
    for (const auto& [key, entry] : section_.entries) {
      if (!used_.count(key)) {
        throw ScenarioError(entry.line, "unknown key '" + key + "' in [" + section_.name + "]");
      }
    }
  }

 private:
  const Entry* take(const std::string& key) {
    auto it = section_.entries.find(key);
    if (it == section_.entries.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  const Section& section_;
  double length_scale_;
  std::set<std::string> used_;
};

class Writer : public Binder {
 public:
  explicit Writer(std::ostringstream& out) : out_(out) {}

  void real(const std::string& key, double& v, bool) override { line(key, format_number(v)); }
  void integer(const std::string& key, int& v) override { line(key, std::to_string(v)); }
  void unsigned64(const std::string& key, std::uint64_t& v) override { line(key, std::to_string(v)); }
  void vector(const std::string& key, Vec& v, int) override {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_number(v[i]);
    line(key, s);
  }
  void text(const std::string& key, std::string& v) override { line(key, v); }
  void choice(const std::string& key, int& index, const std::vector<std::string>& names) override {
    line(key, names.at(static_cast<std::size_t>(index)));
  }
  bool reading() const override { return false; }

 private:
  void line(const std::string& key, const std::string& value) { out_ << key << " = " << value << '\n'; }

  std::ostringstream& out_;
};

const std::vector<std::string> kModelNames = {"planar-rd1", "unicycle-rd2", "arm-two-link",
                                              "arm-baxter"};
const std::vector<std::string> kPartialNames = {"discard", "commit"};

void bind_top(Binder& b, Scenario& s) {
  b.text("name", s.name);
  int model = static_cast<int>(s.model);
  b.choice("model", model, kModelNames);
  s.model = static_cast<ModelKind>(model);
  b.unsigned64("seed", s.seed);
  b.integer("max_iters", s.max_iters);
}

void bind_workspace(Binder& b, Scenario& s) {
  b.vector("lower", s.state_lower, 2);
  b.vector("upper", s.state_upper, 2);
}

void bind_circle(Binder& b, CircleObstacle& o) {
  b.vec2("center", o.center0);
  b.real("radius", o.radius);
  b.vec2("velocity", o.velocity);
}

void bind_sphere(Binder& b, arm::SphereObstacle3D& o) {
  b.vec3("center", o.center);
  b.real("radius", o.radius);
  b.vec3("velocity", o.velocity);
}

void bind_robot(Binder& b, RobotEntry& r, bool unicycle) {
  b.vec2("start", r.spec.start);
  b.vec2("goal", r.spec.goal);
  b.real("radius", r.spec.radius);
  b.real("goal_radius", r.spec.goal_radius);
  b.integer("priority", r.spec.priority);
  if (unicycle) b.real("heading", r.heading);
}

void bind_steer(Binder& b, Scenario& s) {
  b.real("v_ref", s.steer.v_ref);
  b.integer("substeps", s.steer.substeps);
  b.real("horizon", s.steer.horizon);
  b.real("sigma2", s.steer.sigma2);
  b.real("eta_ss", s.steer.goal_bias_ratio);
  b.real("eta_vs", s.steer.vertex_bias_ratio);
  if (s.model == ModelKind::kUnicycleRd2) b.real("heading_gain", s.steer.heading_gain);
  b.vector("u_min", s.bounds.lower, -1);
  b.vector("u_max", s.bounds.upper, -1);
}

void bind_cbf(Binder& b, Scenario& s) {
  if (s.model == ModelKind::kUnicycleRd2) {
    b.real("k1", s.rd2.k1);
    b.real("k2", s.rd2.k2);
  } else {
    b.real("k", s.rd1.k);
  }
}

void bind_mpc(Binder& b, tracker::MpcConfig& m) {
  b.integer("horizon", m.horizon);
  b.vec2("q", m.q);
  b.real("r", m.r);
  b.vec2("terminal", m.terminal);
  b.real("dt", m.dt);
  b.real("heading_sigma2", m.heading_sigma2);
  b.real("lag_tolerance", m.lag_tolerance);
  b.integer("max_steps", m.max_steps);
}

void bind_arm(Binder& b, Scenario& s) {
  ArmSettings& a = s.arm;
  if (s.model == ModelKind::kArmTwoLink) {
    b.real("l1", a.l1, true);
    b.real("l2", a.l2, true);
  } else {
    arm::BaxterGeometry& g = a.baxter;
    b.real("mount_x", g.mount_x, true);
    b.real("mount_y", g.mount_y, true);
    b.real("mount_z", g.mount_z, true);
    b.real("l0", g.l0, true);
    b.real("l1", g.l1, true);
    b.real("l2", g.l2, true);
    b.real("l3", g.l3, true);
    b.real("l4", g.l4, true);
    b.real("l5", g.l5, true);
    b.real("l6", g.l6, true);
  }
  b.real("link_radius", a.link_radius, true);
  b.vector("theta_init", a.theta_init, -1);
  b.vector("theta_goal", a.theta_goal, -1);
  b.real("goal_radius", a.goal_radius);
  b.real("delta1", a.thresholds.delta1);
  b.real("delta2", a.thresholds.delta2);
  b.real("k", a.k);
  b.real("horizon", a.horizon);
  b.integer("substeps", a.substeps);
  b.real("joint_speed", a.joint_speed);
  b.real("sigma2", a.sigma2);
  b.real("eta_vs", a.eta_vs);
  b.real("eta_ss", a.eta_ss);
  b.real("guard_factor", a.guard_factor);
  int partial = a.partial == arm::PartialEdgePolicy::kDiscard ? 0 : 1;
  b.choice("partial", partial, kPartialNames);
  a.partial = partial == 0 ? arm::PartialEdgePolicy::kDiscard : arm::PartialEdgePolicy::kCommitIfLong;
  b.real("min_commit_fraction", a.min_commit_fraction);
  b.real("joint_limit", a.joint_limit);
  b.real("rate_limit", a.rate_limit);
}

void bind_render(Binder& b, RenderSettings& r) {
  b.text("obstacle_color", r.obstacle_color);
  b.text("tree_color", r.tree_color);
  b.text("cspace_tree_color", r.cspace_tree_color);
  b.text("vertex_color", r.vertex_color);
  b.text("reference_color", r.reference_color);
  b.text("tracked_color", r.tracked_color);
  b.text("start_color", r.start_color);
  b.text("goal_color", r.goal_color);
  b.real("scale", r.scale);
}

std::vector<Section> split_sections(const std::string& text) {
  std::vector<Section> sections(1);
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ScenarioError(line_no, "malformed section header");
      Section s;
      s.name = trim(line.substr(1, line.size() - 2));
      s.line = line_no;
      if (s.name.empty()) throw ScenarioError(line_no, "empty section name");
      if (!seen.insert(s.name).second) throw ScenarioError(line_no, "duplicate section [" + s.name + "]");
      sections.push_back(std::move(s));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ScenarioError(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ScenarioError(line_no, "missing key");
    Section& cur = sections.back();
    if (!cur.entries.emplace(key, Entry{trim(line.substr(eq + 1)), line_no}).second) {
      throw ScenarioError(line_no, "duplicate key '" + key + "'");
    }
  }
  return sections;
}

/// Parses "prefix.N" with N >= 1.
std::optional<int> indexed(const std::string& name, const std::string& prefix) {
  if (name.rfind(prefix + ".", 0) != 0) return std::nullopt;
  const std::string num = name.substr(prefix.size() + 1);
  int v = 0;
  auto res = std::from_chars(num.data(), num.data() + num.size(), v);
  if (num.empty() || res.ec != std::errc() || res.ptr != num.data() + num.size() || v < 1) {
    return std::nullopt;
  }
  return v;
}

}  // namespace

bool Scenario::is_arm() const {
  return model == ModelKind::kArmTwoLink || model == ModelKind::kArmBaxter;
}

Scenario default_scenario(ModelKind model) {
  Scenario s;
  s.model = model;
  switch (model) {
    case ModelKind::kPlanarRd1:
      s.state_lower = Vec2(-2.0, -2.0);
      s.state_upper = Vec2(8.0, 8.0);
      s.steer.v_ref = 0.5;
      s.steer.horizon = 2.0;
      s.steer.sigma2 = 0.2;
      s.bounds = ControlBounds::uniform(2, -5.0, 5.0);
      s.rd1.k = 1.0;
      s.mpc = tracker::MpcConfig{};
      s.mpc->dt = s.steer.dt();
      break;
    case ModelKind::kUnicycleRd2:
      s.state_lower = Vec2(-7.0, -4.0);
      s.state_upper = Vec2(12.0, 10.0);
      s.steer.v_ref = 1.5;
      s.steer.horizon = 1.0;
      s.steer.sigma2 = 0.1;
      s.bounds = ControlBounds::uniform(1, -3.0, 3.0);
      break;
    case ModelKind::kArmTwoLink:
      s.arm.link_radius = 0.3;
      s.arm.theta_init = Vec2(2.0, 2.1);
      s.arm.theta_goal = Vec2(1.35, -0.3);
      s.arm.eta_vs = 3.0;
      s.arm.eta_ss = 3.0;
      break;
    case ModelKind::kArmBaxter: {
      s.arm.link_radius = 0.5;
      Vec init(4), goal(4);
      init << 0.0, -kPi / 3.0, 0.0, 0.0;
      goal << -kPi / 3.0, 0.0, 0.0, kPi / 2.0;
      s.arm.theta_init = init;
      s.arm.theta_goal = goal;
      s.arm.eta_vs = 2.0;
      s.arm.eta_ss = 1.0;
      break;
    }
  }
  return s;
}

void Scenario::validate() const {
  if (max_iters < 1) throw ScenarioError(0, "max_iters must be positive");
  try {
    if (!(render.scale > 0.0)) throw std::invalid_argument("render scale must be positive");
    if (is_arm()) {
      if (!obstacles.empty() || !robots.empty()) {
        throw std::invalid_argument("arm scenarios take [obstacle.N] spheres and no robots");
      }
      for (const auto& o : spheres) o.validate();
      make_arm_problem(*this).validate();
      const int dof = model == ModelKind::kArmTwoLink ? 2 : 4;
      if (arm.theta_init.size() != dof || arm.theta_goal.size() != dof) {
        throw std::invalid_argument("theta_init and theta_goal need " + std::to_string(dof) +
                                    " entries");
      }
      return;
    }
    if (!spheres.empty()) throw std::invalid_argument("spheres belong to arm scenarios");
    if (robots.empty()) throw std::invalid_argument("at least one [robot.N] is required");
    std::set<int> priorities;
    for (const auto& r : robots) {
      if (!priorities.insert(r.spec.priority).second) {
        throw std::invalid_argument("robot priorities must be distinct");
      }
      make_point_problem(*this, r).validate();
    }
    if (model == ModelKind::kPlanarRd1 && robots.size() > 1 && !mpc) {
      throw std::invalid_argument("fleet scenarios need [mpc]");
    }
    if (mpc) {
      if (model != ModelKind::kPlanarRd1) throw std::invalid_argument("[mpc] applies to planar-rd1");
      make_fleet_inputs(*this).mpc.validate();
    }
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(0, e.what());
  }
}

Scenario parse_scenario(const std::string& text) {
  const auto sections = split_sections(text);

  // The model fixes defaults and key sets, so it is read first.
  ModelKind model = ModelKind::kPlanarRd1;
  if (auto it = sections[0].entries.find("model"); it != sections[0].entries.end()) {
    auto m = parse_model_kind(trim(it->second.value));
    if (!m) throw ScenarioError(it->second.line, "unknown model '" + it->second.value + "'");
    model = *m;
  } else {
    throw ScenarioError(0, "missing 'model'");
  }
  Scenario s = default_scenario(model);

  Reader top(sections[0], 1.0);
  bind_top(top, s);
  top.finish();

  std::map<int, std::pair<const Section*, int>> obstacle_sections, robot_sections;
  bool mpc_dt_set = false;
  for (std::size_t i = 1; i < sections.size(); ++i) {
    const Section& sec = sections[i];
    if (auto n = indexed(sec.name, "obstacle")) {
      obstacle_sections[*n] = {&sec, sec.line};
      continue;
    }
    if (auto n = indexed(sec.name, "robot")) {
      if (s.is_arm()) throw ScenarioError(sec.line, "arm scenarios have no robots");
      robot_sections[*n] = {&sec, sec.line};
      continue;
    }
    if (sec.name == "workspace") {
      if (s.is_arm()) throw ScenarioError(sec.line, "arm scenarios use [arm] joint_limit");
      Reader r(sec, 1.0);
      bind_workspace(r, s);
      r.finish();
    } else if (sec.name == "steer") {
      if (s.is_arm()) throw ScenarioError(sec.line, "arm scenarios configure steering in [arm]");
      Reader r(sec, 1.0);
      bind_steer(r, s);
      r.finish();
    } else if (sec.name == "cbf") {
      if (s.is_arm()) throw ScenarioError(sec.line, "arm scenarios set the gain in [arm]");
      Reader r(sec, 1.0);
      bind_cbf(r, s);
      r.finish();
    } else if (sec.name == "mpc") {
      if (model != ModelKind::kPlanarRd1) throw ScenarioError(sec.line, "[mpc] applies to planar-rd1");
      Reader r(sec, 1.0);
      mpc_dt_set = r.has("dt");
      bind_mpc(r, *s.mpc);
      r.finish();
    } else if (sec.name == "arm") {
      if (!s.is_arm()) throw ScenarioError(sec.line, "[arm] applies to arm models");
      double scale = 1.0;
      if (auto it = sec.entries.find("unit"); it != sec.entries.end()) {
        const std::string unit = trim(it->second.value);
        if (unit == "mm") {
          scale = 1e-3;
        } else if (unit != "m") {
          throw ScenarioError(it->second.line, "'unit': expected m or mm");
        }
      }
      Reader r(sec, scale);
      std::string unit;
      r.text("unit", unit);
      bind_arm(r, s);
      r.finish();
    } else if (sec.name == "render") {
      Reader r(sec, 1.0);
      bind_render(r, s.render);
      r.finish();
    } else {
      throw ScenarioError(sec.line, "unknown section [" + sec.name + "]");
    }
  }
  if (s.mpc && !mpc_dt_set) s.mpc->dt = s.steer.dt();

  int expected = 1;
  for (const auto& [n, entry] : obstacle_sections) {
    if (n != expected++) throw ScenarioError(entry.second, "obstacle sections must be numbered 1..n");
    Reader r(*entry.first, 1.0);
    if (s.is_arm()) {
      arm::SphereObstacle3D o;
      bind_sphere(r, o);
      s.spheres.push_back(o);
    } else {
      CircleObstacle o;
      bind_circle(r, o);
      s.obstacles.push_back(o);
    }
    r.finish();
  }
  expected = 1;
  for (const auto& [n, entry] : robot_sections) {
    if (n != expected++) throw ScenarioError(entry.second, "robot sections must be numbered 1..n");
    Reader r(*entry.first, 1.0);
    RobotEntry robot;
    robot.spec.id = n;
    robot.spec.priority = n;
    if (model == ModelKind::kUnicycleRd2) {
      robot.spec.radius = 0.0;
      robot.spec.goal_radius = 0.5;
    }
    bind_robot(r, robot, model == ModelKind::kUnicycleRd2);
    r.finish();
    s.robots.push_back(robot);
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scenario '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize(const Scenario& scenario) {
  Scenario s = scenario;
  std::ostringstream out;
  Writer w(out);
  bind_top(w, s);
  if (!s.is_arm()) {
    out << "\n[workspace]\n";
    bind_workspace(w, s);
    out << "\n[steer]\n";
    bind_steer(w, s);
    out << "\n[cbf]\n";
    bind_cbf(w, s);
    if (s.mpc) {
      out << "\n[mpc]\n";
      bind_mpc(w, *s.mpc);
    }
  } else {
    out << "\n[arm]\nunit = m\n";
    bind_arm(w, s);
  }
  out << "\n[render]\n";
  bind_render(w, s.render);
  for (std::size_t i = 0; i < s.obstacles.size(); ++i) {
    out << "\n[obstacle." << i + 1 << "]\n";
    bind_circle(w, s.obstacles[i]);
  }
  for (std::size_t i = 0; i < s.spheres.size(); ++i) {
    out << "\n[obstacle." << i + 1 << "]\n";
    bind_sphere(w, s.spheres[i]);
  }
  for (std::size_t i = 0; i < s.robots.size(); ++i) {
    out << "\n[robot." << i + 1 << "]\n";
    bind_robot(w, s.robots[i], s.model == ModelKind::kUnicycleRd2);
  }
  return out.str();
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << serialize(scenario);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

bool operator==(const Scenario& a, const Scenario& b) {
  // Every persisted field is emitted by serialize(), and the number format is
  // round-trip exact, so textual equality is field-wise equality.
  if (a.robots.size() != b.robots.size()) return false;
  for (std::size_t i = 0; i < a.robots.size(); ++i) {
    if (a.robots[i].spec.id != b.robots[i].spec.id) return false;
  }
  return serialize(a) == serialize(b);
}

arm::KinematicChain make_chain(const Scenario& s) {
  if (s.model == ModelKind::kArmTwoLink) return arm::two_link_chain(s.arm.l1, s.arm.l2, s.arm.link_radius);
  if (s.model == ModelKind::kArmBaxter) return arm::baxter_left_arm(s.arm.baxter, s.arm.link_radius);
  throw std::invalid_argument("not an arm scenario");
}

arm::ArmProblem make_arm_problem(const Scenario& s) {
  arm::ArmProblem p;
  p.model = s.model;
  p.chain = make_chain(s);
  const int dof = p.chain.dof;
  p.obstacles = s.spheres;
  p.thresholds = s.arm.thresholds;
  p.guard_factor = s.arm.guard_factor;
  p.k = s.arm.k;
  p.bounds = ControlBounds::uniform(dof, -s.arm.rate_limit, s.arm.rate_limit);
  p.workspace.state_lower = Vec::Constant(dof, -s.arm.joint_limit);
  p.workspace.state_upper = Vec::Constant(dof, s.arm.joint_limit);
  p.workspace.goal_center = s.arm.theta_goal;
  p.workspace.goal_radius = s.arm.goal_radius;
  p.substeps = s.arm.substeps;
  p.horizon = s.arm.horizon;
  p.joint_speed = s.arm.joint_speed;
  p.sigma2 = s.arm.sigma2;
  p.eta_vs = s.arm.eta_vs;
  p.eta_ss = s.arm.eta_ss;
  p.partial_policy = s.arm.partial;
  p.min_commit_fraction = s.arm.min_commit_fraction;
  return p;
}

planner::PointRobotProblem make_point_problem(const Scenario& s, const RobotEntry& robot) {
  planner::PointRobotProblem p;
  p.model = s.model;
  p.workspace.state_lower = s.state_lower;
  p.workspace.state_upper = s.state_upper;
  p.workspace.goal_center = robot.spec.goal;
  p.workspace.goal_radius = robot.spec.goal_radius;
  p.obstacles.assign(s.obstacles.begin(), s.obstacles.end());
  p.inflation = robot.spec.radius;
  p.steer = s.steer;
  p.rd1 = s.rd1;
  p.rd2 = s.rd2;
  p.bounds = s.bounds;
  return p;
}

tracker::FleetInputs make_fleet_inputs(const Scenario& s) {
  if (s.model != ModelKind::kPlanarRd1 || !s.mpc) {
    throw std::invalid_argument("fleet tracking needs a planar-rd1 scenario with [mpc]");
  }
  tracker::FleetInputs in;
  for (const auto& r : s.robots) in.fleet.push_back(r.spec);
  in.workspace.state_lower = s.state_lower;
  in.workspace.state_upper = s.state_upper;
  in.workspace.goal_center = Vec2::Zero();
  in.obstacles = s.obstacles;
  in.steer = s.steer;
  in.rd1 = s.rd1;
  in.bounds = s.bounds;
  in.mpc = *s.mpc;
  in.max_iters = s.max_iters;
  return in;
}

Vec start_state(const Scenario& s, const RobotEntry& robot) {
  if (s.model == ModelKind::kUnicycleRd2) {
    return Vec3(robot.spec.start.x(), robot.spec.start.y(), robot.heading);
  }
  return robot.spec.start;
}

bool RunReport::all_reached() const {
  return std::all_of(robots.begin(), robots.end(),
                     [](const RobotReport& r) { return r.outcome == "reached"; });
}

std::string format_report(const RunReport& r, bool include_wall_clock) {
  std::ostringstream out;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
  };
  out << "[report]\n";
  out << "command = " << r.command << '\n';
  out << "scenario = " << r.scenario << '\n';
  out << "model = " << r.model << '\n';
  out << "seed = " << r.seed << '\n';
  out << "all_reached = " << (r.all_reached() ? "true" : "false") << '\n';
  out << "min_barrier = " << num(r.min_barrier) << '\n';
  if (r.min_robot_distance) out << "min_robot_distance = " << num(*r.min_robot_distance) << '\n';
  if (include_wall_clock) out << "wall_clock_s = " << num(r.wall_clock) << '\n';
  for (const auto& robot : r.robots) {
    out << "robot." << robot.id << " = " << robot.outcome << " iterations=" << robot.iterations
        << " tree=" << robot.tree_size << " min_barrier=" << num(robot.min_barrier)
        << " duration=" << num(robot.path_time) << '\n';
  }
  return out.str();
}

}  // namespace cbfrrt
