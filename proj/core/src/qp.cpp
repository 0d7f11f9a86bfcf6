#include "cbfrrt/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

namespace cbfrrt::qp {
namespace {

using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

struct Constraint {
  Vec a;
  double b;
  int index;  // index in the caller's numbering (see QpSolution)
};

void check_dimensions(Eigen::Index n, const std::vector<LinearRow>& rows,
                      const ControlBounds& bounds) {
  if (n < 1) throw std::invalid_argument("qp: decision dimension must be at least 1");
  if (n > kMaxDim) throw std::invalid_argument("qp: decision dimension exceeds kMaxDim");
  if (bounds.lower.size() != n || bounds.upper.size() != n) {
    throw std::invalid_argument("qp: bounds dimension mismatch");
  }
  bounds.validate();
  for (const auto& row : rows) {
    if (row.a.size() != n) throw std::invalid_argument("qp: constraint row dimension mismatch");
  }
}

double tol_for(double b, double base) { return base * std::max(1.0, std::abs(b)); }

// Minimum of a . u over the box; -inf when unbounded in a relevant direction.
double box_min(const Vec& a, const ControlBounds& box) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] > 0.0) {
      total += a[i] * box.lower[i];
    } else if (a[i] < 0.0) {
      total += a[i] * box.upper[i];
    }
  }
  return std::isnan(total) ? -std::numeric_limits<double>::infinity() : total;
}

// Rows implied by the box are dropped; they cannot change the feasible set.
// Returns false when some row is violated by every point of the box.
bool gather_rows(const std::vector<LinearRow>& rows, const ControlBounds& box,
                 std::vector<Constraint>& out) {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const double lo = box_min(row.a, box);
    if (lo >= row.b) continue;
    // Largest value over the box decides emptiness of the row alone.
    const double hi = -box_min(-row.a, box);
    if (hi < row.b - tol_for(row.b, kFeasibilityTol)) return false;
    out.push_back({row.a, row.b, static_cast<int>(r)});
  }
  return true;
}

void gather_bounds(const ControlBounds& box, int row_count, std::vector<Constraint>& out) {
  const auto n = box.lower.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isfinite(box.lower[i])) {
      out.push_back({Vec::Unit(n, i), box.lower[i], row_count + static_cast<int>(i)});
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isfinite(box.upper[i])) {
      out.push_back({-Vec::Unit(n, i), -box.upper[i],
                     row_count + static_cast<int>(n + i)});
    }
  }
}

bool satisfies_all(const std::vector<Constraint>& cons, const Vec& u) {
  for (const auto& c : cons) {
    if (c.a.dot(u) < c.b - tol_for(c.b, kFeasibilityTol)) return false;
  }
  return true;
}

bool next_combination(std::vector<int>& idx, int m) {
  const int k = static_cast<int>(idx.size());
  int i = k - 1;
  while (i >= 0 && idx[i] == m - k + i) --i;
  if (i < 0) return false;
  ++idx[i];
  for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  return true;
}

// Projection of r onto {a . u >= b for all cons}. Subsets are tried in
// increasing size; the first KKT point is the unique minimizer.
std::optional<std::pair<Vec, std::vector<int>>> project(const Vec& r,
                                                        const std::vector<Constraint>& cons) {
  if (satisfies_all(cons, r)) return std::make_pair(r, std::vector<int>{});
  const int n = static_cast<int>(r.size());
  const int m = static_cast<int>(cons.size());
  SmallMat a_sub;
  SmallVec rhs;
  for (int size = 1; size <= std::min(n, m); ++size) {
    std::vector<int> idx(size);
    for (int i = 0; i < size; ++i) idx[i] = i;
    a_sub.resize(size, n);
    rhs.resize(size);
    do {
      for (int i = 0; i < size; ++i) {
        const auto& c = cons[idx[i]];
        a_sub.row(i) = c.a.transpose();
        rhs[i] = c.b - c.a.dot(r);
      }
      const SmallMat gram = a_sub * a_sub.transpose();
      Eigen::FullPivLU<SmallMat> lu(gram);
      if (lu.rank() < size) continue;
      const SmallVec lambda = lu.solve(rhs);
      if ((lambda.array() < -1e-10 * std::max(1.0, lambda.cwiseAbs().maxCoeff())).any()) continue;
      Vec u = r + a_sub.transpose() * lambda;
      if (!satisfies_all(cons, u)) continue;
      std::vector<int> active;
      for (int i = 0; i < size; ++i) active.push_back(cons[idx[i]].index);
      std::sort(active.begin(), active.end());
      return std::make_pair(std::move(u), std::move(active));
    } while (next_combination(idx, m));
  }
  return std::nullopt;
}

Vec clamp_to(const Vec& u, const ControlBounds& box) {
  return u.cwiseMax(box.lower).cwiseMin(box.upper);
}

}  // namespace

QpSolution solve(const QpProblem& problem) {
  const auto n = problem.u_ref.size();
  check_dimensions(n, problem.rows, problem.bounds);

  std::vector<Constraint> cons;
  if (!gather_rows(problem.rows, problem.bounds, cons)) return {};
  gather_bounds(problem.bounds, static_cast<int>(problem.rows.size()), cons);

  auto result = project(problem.u_ref, cons);
  if (!result) return {};
  QpSolution out;
  out.u_opt = result->second.empty() ? result->first : clamp_to(result->first, problem.bounds);
  out.active_set = std::move(result->second);
  return out;
}

QpSolution solve(const WeightedQp& problem) {
  const auto n = problem.gradient.size();
  check_dimensions(n, problem.rows, problem.bounds);
  if (problem.hessian.rows() != n || problem.hessian.cols() != n) {
    throw std::invalid_argument("qp: Hessian dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(problem.hessian);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("qp: Hessian must be positive definite");
  }
  const Eigen::MatrixXd lower = llt.matrixL();
  const auto tri = lower.triangularView<Eigen::Lower>();

  std::vector<Constraint> cons;
  if (!gather_rows(problem.rows, problem.bounds, cons)) return {};
  gather_bounds(problem.bounds, static_cast<int>(problem.rows.size()), cons);
  // w = L'u turns the objective into 1/2 ||w - w_ref||^2 and a . u into (L^-1 a) . w.
  for (auto& c : cons) c.a = tri.solve(c.a);
  const Vec w_ref = -tri.solve(problem.gradient);

  auto result = project(w_ref, cons);
  if (!result) return {};
  const Vec u = tri.transpose().solve(result->first);
  QpSolution out;
  out.u_opt = clamp_to(u, problem.bounds);
  out.active_set = std::move(result->second);
  return out;
}

bool verify(const WeightedQp& problem, const QpSolution& solution) {
  if (!solution.u_opt) return false;
  const Vec& u = *solution.u_opt;
  const auto n = problem.gradient.size();
  if (u.size() != n) return false;
  const int row_count = static_cast<int>(problem.rows.size());

  // Primal feasibility.
  for (const auto& row : problem.rows) {
    if (row.a.dot(u) < row.b - tol_for(row.b, kKktTol)) return false;
  }
  if (!problem.bounds.contains(u, kKktTol)) return false;

  // Active constraints must be tight (complementary slackness).
  Eigen::MatrixXd active_t(n, static_cast<Eigen::Index>(solution.active_set.size()));
  for (std::size_t k = 0; k < solution.active_set.size(); ++k) {
    const int idx = solution.active_set[k];
    Vec a;
    double b;
    if (idx >= 0 && idx < row_count) {
      a = problem.rows[idx].a;
      b = problem.rows[idx].b;
    } else if (idx >= row_count && idx < row_count + n) {
      const auto i = idx - row_count;
      a = Vec::Unit(n, i);
      b = problem.bounds.lower[i];
    } else if (idx >= row_count + n && idx < row_count + 2 * n) {
      const auto i = idx - row_count - n;
      a = -Vec::Unit(n, i);
      b = -problem.bounds.upper[i];
    } else {
      return false;
    }
    if (!std::isfinite(b) || std::abs(a.dot(u) - b) > tol_for(b, kKktTol)) return false;
    active_t.col(static_cast<Eigen::Index>(k)) = a;
  }

  // Stationarity: H u + g = A_S' lambda with lambda >= 0.
  const Vec grad = problem.hessian * u + problem.gradient;
  const double scale =
      std::max({1.0, (problem.hessian * u).norm(), problem.gradient.norm()});
  if (solution.active_set.empty()) return grad.norm() <= kKktTol * scale;
  const Vec lambda = active_t.colPivHouseholderQr().solve(grad);
  if ((lambda.array() < -kKktTol * scale).any()) return false;
  return (active_t * lambda - grad).norm() <= kKktTol * scale;
}

bool verify(const QpProblem& problem, const QpSolution& solution) {
  const auto n = problem.u_ref.size();
  WeightedQp weighted{Eigen::MatrixXd::Identity(n, n), -problem.u_ref, problem.rows,
                      problem.bounds};
  return verify(weighted, solution);
}

}  // namespace cbfrrt::qp
