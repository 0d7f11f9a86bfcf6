#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace cbfrrt {

using Vec = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;

/// Dynamics family a state vector or trajectory belongs to.
enum class ModelKind {
  kPlanarRd1,    // x' = v (cos th, sin th), barrier of relative degree 1
  kUnicycleRd2,  // unicycle with fixed speed, barrier of relative degree 2
  kArmTwoLink,
  kArmBaxter,
};

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view text);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

struct PlanarState {
  double x1 = 0.0;
  double x2 = 0.0;

  Vec2 position() const { return {x1, x2}; }
  Vec to_vector() const;
  static PlanarState from_vector(const Vec& v);
};

struct UnicycleState {
  double x1 = 0.0;
  double x2 = 0.0;
  double theta = 0.0;  // heading, kept in (-pi, pi]

  Vec2 position() const { return {x1, x2}; }
  Vec to_vector() const;
  static UnicycleState from_vector(const Vec& v);
};

struct JointState {
  Vec theta;

  int dof() const { return static_cast<int>(theta.size()); }
};

/// Elementwise box on a control vector. Infinite entries are allowed and mean "unbounded".
struct ControlBounds {
  Vec lower;
  Vec upper;

  static ControlBounds uniform(int dim, double lo, double hi);
  static ControlBounds unbounded(int dim);

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Vec& u, double tol = 0.0) const;
  void validate() const;
};

/// Disc obstacle moving with constant velocity.
struct CircleObstacle {
  Vec2 center0 = Vec2::Zero();
  double radius = 1.0;
  Vec2 velocity = Vec2::Zero();

  void validate() const;
};

Vec2 obstacle_position_at(const CircleObstacle& obs, double t);

/// State box plus a closed ball goal region.
struct Workspace {
  Vec state_lower;
  Vec state_upper;
  Vec goal_center;
  double goal_radius = 0.1;

  void validate() const;
  /// True iff the leading coordinates of `point` lie inside the box.
  bool in_box(const Vec& point) const;
};

struct TrajectorySample {
  double t = 0.0;
  Vec state;
  Vec control;
};

struct Trajectory {
  ModelKind model = ModelKind::kPlanarRd1;
  std::vector<TrajectorySample> samples;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
  double start_time() const { return samples.front().t; }
  double end_time() const { return samples.back().t; }

  /// Linear interpolation of the state; holds the end samples outside [start, end].
  Vec state_at(double t) const;
  /// Slope of the segment containing t; zero outside [start, end).
  Vec rate_at(double t) const;

  /// Checks strictly increasing times and uniform dimensions.
  bool well_formed() const;
};

/// Instantaneous view of a disc obstacle: where it is and how it moves.
struct DiscSnapshot {
  Vec2 center = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  double radius = 0.0;
};

/// Another robot's committed trajectory viewed as a moving disc.
struct TrajectoryDisc {
  std::shared_ptr<const Trajectory> path;
  double radius = 0.0;
};

using DiscObstacle = std::variant<CircleObstacle, TrajectoryDisc>;

DiscSnapshot snapshot(const CircleObstacle& obs, double t);
DiscSnapshot snapshot(const TrajectoryDisc& obs, double t);
DiscSnapshot snapshot(const DiscObstacle& obs, double t);

/// Seeded random stream. Single owner; copy it to fork an identical stream.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed);

  /// Independent stream derived from (seed, a, b), e.g. per robot and per phase.
  static RandomSource derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

  std::uint64_t seed() const { return seed_; }

  double uniform();                          // [0, 1)
  double uniform(double lo, double hi);      // [lo, hi)
  std::size_t uniform_index(std::size_t n);  // {0, ..., n-1}
  double standard_normal();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Draw from N(mean, variance). Throws std::invalid_argument for variance <= 0.
double normal_sample(RandomSource& rng, double mean, double variance);

}  // namespace cbfrrt
