#include "cbfrrt/cbf.hpp"

#include <cmath>
#include <stdexcept>

namespace cbfrrt::cbf {

void Rd1Params::validate() const {
  if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("cbf: k must be positive");
}

void Rd2Params::validate() const {
  if (!(k1 > 0.0) || !(k2 > 0.0) || !std::isfinite(k1) || !std::isfinite(k2)) {
    throw std::invalid_argument("cbf: k1 and k2 must be positive");
  }
  if (k2 * k2 - 4.0 * k1 < 0.0) {
    throw std::invalid_argument("cbf: s^2 + k2 s + k1 must have real roots");
  }
}

double Rd2Params::fast_rate() const { return 0.5 * (k2 + std::sqrt(k2 * k2 - 4.0 * k1)); }

double barrier_value(const Vec2& pos, const DiscSnapshot& obs, double inflation) {
  const double reach = obs.radius + inflation;
  return (pos - obs.center).squaredNorm() - reach * reach;
}

double barrier_value(const Vec2& pos, const CircleObstacle& obs, double t, double inflation) {
  return barrier_value(pos, snapshot(obs, t), inflation);
}

qp::LinearRow rd1_velocity_row(const Vec2& pos, const DiscSnapshot& obs, const Rd1Params& params,
                               double inflation) {
  const Vec2 d = pos - obs.center;
  const double h = barrier_value(pos, obs, inflation);
  const double motion = -2.0 * d.dot(obs.velocity);
  return {2.0 * d, -params.k * h - motion};
}

qp::LinearRow rd1_row(const Vec2& pos, double theta, const DiscSnapshot& obs,
                      const Rd1Params& params, double inflation) {
  auto row = rd1_velocity_row(pos, obs, params, inflation);
  const Vec2 heading(std::cos(theta), std::sin(theta));
  Vec a(1);
  a[0] = row.a.dot(heading);
  return {a, row.b};
}

qp::LinearRow rd1_row(const Vec2& pos, double theta, const CircleObstacle& obs, double t,
                      const Rd1Params& params, double inflation) {
  return rd1_row(pos, theta, snapshot(obs, t), params, inflation);
}

double rd2_barrier_rate(const UnicycleState& state, double v, const DiscSnapshot& obs) {
  const Vec2 d = state.position() - obs.center;
  const Vec2 w = v * Vec2(std::cos(state.theta), std::sin(state.theta)) - obs.velocity;
  return 2.0 * d.dot(w);
}

qp::LinearRow rd2_row(const UnicycleState& state, double v, const DiscSnapshot& obs,
                      const Rd2Params& params, double inflation) {
  const Vec2 d = state.position() - obs.center;
  const Vec2 e(std::cos(state.theta), std::sin(state.theta));
  const Vec2 e_perp(-e.y(), e.x());
  const Vec2 w = v * e - obs.velocity;
  const double h = barrier_value(state.position(), obs, inflation);
  const double h_dot = 2.0 * d.dot(w);
  const double drift = 2.0 * w.squaredNorm();
  Vec a(1);
  a[0] = 2.0 * v * d.dot(e_perp);
  return {a, -(drift + params.k2 * h_dot + params.k1 * h)};
}

qp::LinearRow rd2_row(const UnicycleState& state, double v, const CircleObstacle& obs, double t,
                      const Rd2Params& params, double inflation) {
  return rd2_row(state, v, snapshot(obs, t), params, inflation);
}

}  // namespace cbfrrt::cbf
