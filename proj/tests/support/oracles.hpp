#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance runner. Nothing here calls into the solver under test.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "cbfrrt/cbf.hpp"
#include "cbfrrt/qp.hpp"
#include "cbfrrt/types.hpp"

namespace oracle {

using cbfrrt::Vec;

/// Brute-force minimizer of |u - u_ref|^2, n <= 2. One coordinate runs over
/// the lattice lower + step * Z inside its bounds; on each grid line the other
/// coordinate is clamped into its exact feasible interval. For n = 2 both
/// orientations are scanned and the cheaper candidate wins.
inline std::optional<Vec> grid_qp(const cbfrrt::qp::QpProblem& p, double step) {
  const auto n = p.u_ref.size();
  std::optional<Vec> best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < (n == 1 ? 1 : 2); ++axis) {
    const int other = 1 - axis;
    const double lo = p.bounds.lower[axis], hi = p.bounds.upper[axis];
    const long lines = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= lines; ++i) {
      const double g = lo + i * step;
      if (n == 1) {
        bool ok = true;
        for (const auto& r : p.rows) ok = ok && r.a[0] * g >= r.b;
        const double c = (g - p.u_ref[0]) * (g - p.u_ref[0]);
        if (ok && c < best_cost) {
          best_cost = c;
          best = Vec::Constant(1, g);
        }
        continue;
      }
      double f_lo = p.bounds.lower[other], f_hi = p.bounds.upper[other];
      bool ok = true;
      for (const auto& r : p.rows) {
        const double rest = r.b - r.a[axis] * g;
        if (r.a[other] > 0) {
          f_lo = std::max(f_lo, rest / r.a[other]);
        } else if (r.a[other] < 0) {
          f_hi = std::min(f_hi, rest / r.a[other]);
        } else if (rest > 0) {
          ok = false;
        }
      }
      if (!ok || f_lo > f_hi) continue;
      Vec u(2);
      u[axis] = g;
      u[other] = std::clamp(p.u_ref[other], f_lo, f_hi);
      const double c = (u - p.u_ref).squaredNorm();
      if (c < best_cost) {
        best_cost = c;
        best = u;
      }
    }
  }
  return best;
}

/// Two-sample Kolmogorov-Smirnov distance.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

/// Squared distance to a moving disc minus the squared radius sum.
inline double h_disc(const cbfrrt::Vec2& p, const cbfrrt::Vec2& c0, const cbfrrt::Vec2& v, double t,
                     double radius) {
  return (p - (c0 + v * t)).squaredNorm() - radius * radius;
}

/// Unicycle position after time s at constant (v, omega).
inline cbfrrt::Vec2 unicycle_position(const cbfrrt::Vec3& x, double v, double omega, double s) {
  if (std::abs(omega) < 1e-12) {
    return {x[0] + v * s * std::cos(x[2]), x[1] + v * s * std::sin(x[2])};
  }
  const double th = x[2] + omega * s;
  return {x[0] + v / omega * (std::sin(th) - std::sin(x[2])),
          x[1] - v / omega * (std::cos(th) - std::cos(x[2]))};
}

}  // namespace oracle
