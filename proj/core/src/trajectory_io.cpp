#include "cbfrrt/trajectory_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cbfrrt {
namespace {

int dof_of(ModelKind model) { return model == ModelKind::kArmBaxter ? 4 : 2; }

std::string join(const std::vector<std::string>& cols) {
  std::string s;
  for (std::size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + cols[i];
  return s;
}

void put(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::vector<std::string> csv_columns(ModelKind model) {
  switch (model) {
    case ModelKind::kPlanarRd1:
      return {"t", "x1", "x2", "u1", "u2"};
    case ModelKind::kUnicycleRd2:
      return {"t", "x1", "x2", "theta", "v", "omega"};
    case ModelKind::kArmTwoLink:
    case ModelKind::kArmBaxter: {
      std::vector<std::string> cols{"t"};
      const int n = dof_of(model);
      for (int i = 1; i <= n; ++i) cols.push_back("theta" + std::to_string(i));
      for (int i = 1; i <= n; ++i) cols.push_back("u" + std::to_string(i));
      return cols;
    }
  }
  return {};
}

std::string trajectory_csv(const Trajectory& traj) {
  const auto cols = csv_columns(traj.model);
  std::string out = join(cols) + '\n';
  for (const auto& s : traj.samples) {
    if (1 + s.state.size() + s.control.size() != static_cast<Eigen::Index>(cols.size())) {
      throw std::invalid_argument("sample dimensions do not match the model columns");
    }
    put(out, s.t);
    for (Eigen::Index i = 0; i < s.state.size(); ++i) {
      out += ',';
      put(out, s.state[i]);
    }
    for (Eigen::Index i = 0; i < s.control.size(); ++i) {
      out += ',';
      put(out, s.control[i]);
    }
    out += '\n';
  }
  return out;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  write_text_file(path, trajectory_csv(traj));
}

Trajectory parse_trajectory_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trajectory file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  Trajectory traj;
  bool known = false;
  for (auto kind : {ModelKind::kPlanarRd1, ModelKind::kUnicycleRd2, ModelKind::kArmTwoLink,
                    ModelKind::kArmBaxter}) {
    if (join(csv_columns(kind)) == line) {
      traj.model = kind;
      known = true;
    }
  }
  if (!known) throw std::runtime_error("unrecognized trajectory header '" + line + "'");
  const std::size_t ncols = csv_columns(traj.model).size();
  const Eigen::Index nstate =
      traj.model == ModelKind::kUnicycleRd2 ? 3 : (traj.model == ModelKind::kPlanarRd1 ? 2 : dof_of(traj.model));
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> values;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      double v = 0.0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) throw std::runtime_error("row " + std::to_string(row) + ": bad number");
      values.push_back(v);
      p = res.ptr;
      if (p == end) break;
      if (*p != ',') throw std::runtime_error("row " + std::to_string(row) + ": expected ','");
      ++p;
    }
    if (values.size() != ncols) {
      throw std::runtime_error("row " + std::to_string(row) + ": expected " + std::to_string(ncols) +
                               " fields");
    }
    TrajectorySample s;
    s.t = values[0];
    s.state = Eigen::Map<const Vec>(values.data() + 1, nstate);
    s.control = Eigen::Map<const Vec>(values.data() + 1 + nstate,
                                      static_cast<Eigen::Index>(ncols) - 1 - nstate);
    traj.samples.push_back(std::move(s));
  }
  return traj;
}

Trajectory read_trajectory_csv(const std::string& path) { return parse_trajectory_csv(slurp(path)); }

std::string tree_csv(const planner::Tree& tree) {
  auto cols = csv_columns(tree.model());
  std::string out = "vertex,parent,t";
  const Eigen::Index nstate = tree.size() ? tree.vertex(0).state.size() : 0;
  for (Eigen::Index i = 0; i < nstate; ++i) out += "," + cols[static_cast<std::size_t>(1 + i)];
  out += '\n';
  for (std::size_t v = 0; v < tree.size(); ++v) {
    const auto& vx = tree.vertex(v);
    out += std::to_string(v) + ',' +
           (vx.parent ? std::to_string(*vx.parent) : std::string("-1")) + ',';
    put(out, vx.time);
    for (Eigen::Index i = 0; i < vx.state.size(); ++i) {
      out += ',';
      put(out, vx.state[i]);
    }
    out += '\n';
  }
  return out;
}

std::string barrier_csv(const std::vector<arm::BarrierLogEntry>& log) {
  std::string out = "t,i,j,h\n";
  for (const auto& e : log) {
    put(out, e.t);
    out += ',' + std::to_string(e.obstacle + 1) + ',' + std::to_string(e.link) + ',';
    put(out, e.h);
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace cbfrrt
