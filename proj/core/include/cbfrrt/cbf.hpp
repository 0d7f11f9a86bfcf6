#pragma once

#include "cbfrrt/qp.hpp"
#include "cbfrrt/types.hpp"

namespace cbfrrt::cbf {

/// Gain of the first-order condition  h' + k h >= 0.
struct Rd1Params {
  double k = 1.0;

  void validate() const;
};

/// Gains of the second-order condition  h'' + k2 h' + k1 h >= 0.
struct Rd2Params {
  double k1 = 2.0;
  double k2 = 4.0;

  /// Requires k1, k2 > 0 and real (hence negative) roots of s^2 + k2 s + k1.
  void validate() const;
  /// Magnitude of the faster root of s^2 + k2 s + k1.
  double fast_rate() const;
};

/// h = |pos - c|^2 - (r + inflation)^2. Positive outside the inflated disc.
double barrier_value(const Vec2& pos, const DiscSnapshot& obs, double inflation);
double barrier_value(const Vec2& pos, const CircleObstacle& obs, double t, double inflation);

/// Row over the scalar speed v of  x' = v (cos theta, sin theta):
/// a v >= b  <=>  h' + k h >= 0, including the obstacle-motion term.
qp::LinearRow rd1_row(const Vec2& pos, double theta, const DiscSnapshot& obs,
                      const Rd1Params& params, double inflation);
qp::LinearRow rd1_row(const Vec2& pos, double theta, const CircleObstacle& obs, double t,
                      const Rd1Params& params, double inflation);

/// Row over the planar velocity u = (u1, u2) of  x' = u.
qp::LinearRow rd1_velocity_row(const Vec2& pos, const DiscSnapshot& obs, const Rd1Params& params,
                               double inflation);

/// h' along the unicycle with speed v (no angular term appears at first order).
double rd2_barrier_rate(const UnicycleState& state, double v, const DiscSnapshot& obs);

/// Row over the angular rate omega of the unicycle with fixed speed v:
/// a omega >= b  <=>  h'' + k2 h' + k1 h >= 0.
///
/// With d = p - c, e = (cos th, sin th), e_perp = (-sin th, cos th), w = v e - v_obs:
///   h'  = 2 d.w
///   h'' = 2 |w|^2 + 2 v (d.e_perp) omega      (obstacle velocity is constant)
qp::LinearRow rd2_row(const UnicycleState& state, double v, const DiscSnapshot& obs,
                      const Rd2Params& params, double inflation);
qp::LinearRow rd2_row(const UnicycleState& state, double v, const CircleObstacle& obs, double t,
                      const Rd2Params& params, double inflation);

}  // namespace cbfrrt::cbf
