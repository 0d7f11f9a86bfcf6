#include "cbfrrt/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cbfrrt {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kPlanarRd1:
      return "planar-rd1";
    case ModelKind::kUnicycleRd2:
      return "unicycle-rd2";
    case ModelKind::kArmTwoLink:
      return "arm-two-link";
    case ModelKind::kArmBaxter:
      return "arm-baxter";
  }
  return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view text) {
  for (auto kind : {ModelKind::kPlanarRd1, ModelKind::kUnicycleRd2, ModelKind::kArmTwoLink,
                    ModelKind::kArmBaxter}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

double wrap_angle(double angle) {
  double wrapped = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

Vec PlanarState::to_vector() const { return Vec2(x1, x2); }

PlanarState PlanarState::from_vector(const Vec& v) {
  if (v.size() != 2) throw std::invalid_argument("PlanarState needs 2 coordinates");
  return {v[0], v[1]};
}

Vec UnicycleState::to_vector() const { return Vec3(x1, x2, theta); }

UnicycleState UnicycleState::from_vector(const Vec& v) {
  if (v.size() != 3) throw std::invalid_argument("UnicycleState needs 3 coordinates");
  return {v[0], v[1], wrap_angle(v[2])};
}

ControlBounds ControlBounds::uniform(int dim, double lo, double hi) {
  ControlBounds b{Vec::Constant(dim, lo), Vec::Constant(dim, hi)};
  b.validate();
  return b;
}

ControlBounds ControlBounds::unbounded(int dim) {
  const double inf = std::numeric_limits<double>::infinity();
  return {Vec::Constant(dim, -inf), Vec::Constant(dim, inf)};
}

bool ControlBounds::contains(const Vec& u, double tol) const {
  if (u.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (u[i] < lower[i] - tol || u[i] > upper[i] + tol) return false;
  }
  return true;
}

void ControlBounds::validate() const {
  if (lower.size() != upper.size()) throw std::invalid_argument("control bounds size mismatch");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (std::isnan(lower[i]) || std::isnan(upper[i]) || lower[i] > upper[i]) {
      throw std::invalid_argument("control bounds: lower must not exceed upper");
    }
  }
}

void CircleObstacle::validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("obstacle radius must be positive");
  }
  if (!center0.allFinite() || !velocity.allFinite()) {
    throw std::invalid_argument("obstacle center and velocity must be finite");
  }
}

Vec2 obstacle_position_at(const CircleObstacle& obs, double t) {
  return obs.center0 + obs.velocity * t;
}

void Workspace::validate() const {
  if (state_lower.size() != state_upper.size() || state_lower.size() == 0) {
    throw std::invalid_argument("workspace box must have matching nonempty bounds");
  }
  for (Eigen::Index i = 0; i < state_lower.size(); ++i) {
    if (!(state_lower[i] < state_upper[i])) {
      throw std::invalid_argument("workspace lower bound must be below upper bound");
    }
  }
  if (!(goal_radius > 0.0)) throw std::invalid_argument("goal radius must be positive");
  if (goal_center.size() != state_lower.size()) {
    throw std::invalid_argument("goal dimension must match the workspace box");
  }
  // Closest box point to the goal center must lie within the goal ball.
  Vec closest = goal_center.cwiseMax(state_lower).cwiseMin(state_upper);
  if ((closest - goal_center).norm() > goal_radius) {
    throw std::invalid_argument("goal region does not intersect the workspace box");
  }
}

bool Workspace::in_box(const Vec& point) const {
  const Eigen::Index n = state_lower.size();
  if (point.size() < n) return false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (point[i] < state_lower[i] || point[i] > state_upper[i]) return false;
  }
  return true;
}

namespace {

// Index of the segment [t_i, t_{i+1}) containing t, assuming start <= t < end.
std::size_t segment_index(const std::vector<TrajectorySample>& s, double t) {
  auto it = std::upper_bound(s.begin(), s.end(), t,
                             [](double value, const TrajectorySample& x) { return value < x.t; });
  return static_cast<std::size_t>(std::distance(s.begin(), it)) - 1;
}

}  // namespace

Vec Trajectory::state_at(double t) const {
  if (samples.empty()) throw std::logic_error("state_at on empty trajectory");
  if (t <= samples.front().t) return samples.front().state;
  if (t >= samples.back().t) return samples.back().state;
  const std::size_t i = segment_index(samples, t);
  const auto& a = samples[i];
  const auto& b = samples[i + 1];
  const double s = (t - a.t) / (b.t - a.t);
  return a.state + s * (b.state - a.state);
}

Vec Trajectory::rate_at(double t) const {
  if (samples.empty()) throw std::logic_error("rate_at on empty trajectory");
  const Eigen::Index dim = samples.front().state.size();
  if (samples.size() < 2 || t < samples.front().t || t >= samples.back().t) {
    return Vec::Zero(dim);
  }
  const std::size_t i = segment_index(samples, t);
  const auto& a = samples[i];
  const auto& b = samples[i + 1];
  return (b.state - a.state) / (b.t - a.t);
}

bool Trajectory::well_formed() const {
  if (samples.empty()) return true;
  const Eigen::Index dim = samples.front().state.size();
  const Eigen::Index cdim = samples.front().control.size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].state.size() != dim || samples[i].control.size() != cdim) return false;
    if (i > 0 && !(samples[i].t > samples[i - 1].t)) return false;
  }
  return true;
}

DiscSnapshot snapshot(const CircleObstacle& obs, double t) {
  return {obstacle_position_at(obs, t), obs.velocity, obs.radius};
}

DiscSnapshot snapshot(const TrajectoryDisc& obs, double t) {
  const Vec state = obs.path->state_at(t);
  const Vec rate = obs.path->rate_at(t);
  return {state.head<2>(), rate.head<2>(), obs.radius};
}

DiscSnapshot snapshot(const DiscObstacle& obs, double t) {
  return std::visit([t](const auto& o) { return snapshot(o, t); }, obs);
}

RandomSource::RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

RandomSource RandomSource::derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return RandomSource((static_cast<std::uint64_t>(words[0]) << 32) | words[1]);
}

double RandomSource::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

double RandomSource::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

std::size_t RandomSource::uniform_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index over empty range");
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

double RandomSource::standard_normal() {
  return std::normal_distribution<double>(0.0, 1.0)(engine_);
}

double normal_sample(RandomSource& rng, double mean, double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("normal_sample: variance must be positive");
  return mean + std::sqrt(variance) * rng.standard_normal();
}

}  // namespace cbfrrt
