#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "cbfrrt/types.hpp"

namespace cbfrrt::qp {

/// Largest decision dimension accepted by the enumerating solver.
inline constexpr int kMaxDim = 8;

inline constexpr double kFeasibilityTol = 1e-9;
inline constexpr double kKktTol = 1e-7;

/// One inequality a . u >= b.
struct LinearRow {
  Vec a;
  double b = 0.0;
};

/// min ||u - u_ref||^2  s.t.  rows, lower <= u <= upper.
struct QpProblem {
  Vec u_ref;
  std::vector<LinearRow> rows;
  ControlBounds bounds;
};

/// min 1/2 u'Hu + g'u  s.t.  rows, lower <= u <= upper, with H positive definite.
struct WeightedQp {
  Eigen::MatrixXd hessian;
  Vec gradient;
  std::vector<LinearRow> rows;
  ControlBounds bounds;
};

/// Constraint indices in `active_set`: [0, rows) are rows, then `rows + i` is
/// lower bound i and `rows + n + i` is upper bound i.
struct QpSolution {
  std::optional<Vec> u_opt;
  std::vector<int> active_set;

  bool feasible() const { return u_opt.has_value(); }
};

/// Euclidean projection of u_ref onto the constraint polytope, by enumeration
/// of candidate active sets. Returns an empty u_opt when the polytope is empty.
/// Throws std::invalid_argument on dimension mismatch.
QpSolution solve(const QpProblem& problem);

/// Same contract for a positive definite Hessian, reduced to the projection
/// form through a Cholesky change of variables.
QpSolution solve(const WeightedQp& problem);

/// KKT certificate: primal feasibility, stationarity with nonnegative
/// multipliers supported on the active set, and complementary slackness.
bool verify(const QpProblem& problem, const QpSolution& solution);
bool verify(const WeightedQp& problem, const QpSolution& solution);

}  // namespace cbfrrt::qp
