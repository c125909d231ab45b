#include "simopt/lmo.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace simopt {

namespace {

void check_finite(std::span<const double> g) {
  for (double v : g)
    require(!std::isnan(v), ErrorKind::invalid_gradient, "gradient contains NaN");
}

}  // namespace

bool SimplexSlackSet::contains(std::span<const double> w, double tol) const {
  if (w.size() != dimension) return false;
  double total = 0.0;
  for (double v : w) {
    if (v < -tol) return false;
    total += v;
  }
  return total <= 1.0 + tol;
}

void PolytopeSet::validate() const {
  require(a.rows() == c.size(), ErrorKind::dimension, "technology matrix rows differ from C length");
  for (double v : a.values())
    require(v > 0.0, ErrorKind::invalid_constraint, "technology matrix entries must be positive");
  for (double v : c) require(v > 0.0, ErrorKind::invalid_constraint, "capacities must be positive");
}

bool PolytopeSet::contains(std::span<const double> s, double tol) const {
  if (s.size() != a.cols()) return false;
  for (double v : s)
    if (v < -tol) return false;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) lhs += a(i, j) * s[j];
    if (lhs > c[i] + tol * std::max(1.0, std::abs(c[i]))) return false;
  }
  return true;
}

void SingleBudgetSet::validate() const {
  for (double v : c) require(v > 0.0, ErrorKind::invalid_constraint, "budget weights must be positive");
  require(budget > 0.0, ErrorKind::invalid_constraint, "budget must be positive");
}

bool SingleBudgetSet::contains(std::span<const double> s, double tol) const {
  if (s.size() != c.size()) return false;
  double lhs = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s[j] < -tol) return false;
    lhs += c[j] * s[j];
  }
  return lhs <= budget + tol * std::max(1.0, budget);
}

PolytopeSet SingleBudgetSet::as_polytope() const {
  return {DenseMatrix(1, c.size(), c), DenseVector{budget}};
}

DenseVector lmo_simplex_slack(std::span<const double> g) {
  check_finite(g);
  DenseVector s(g.size(), 0.0);
  std::size_t best = g.size();
  double best_val = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (g[j] < best_val) {
      best_val = g[j];
      best = j;
    }
  }
  if (best < g.size()) s[best] = 1.0;
  return s;
}

DenseVector lmo_single_budget(std::span<const double> g, std::span<const double> c, double budget) {
  check_finite(g);
  require(g.size() == c.size(), ErrorKind::dimension, "gradient and budget weights differ in length");
  for (double v : c) require(v > 0.0, ErrorKind::invalid_constraint, "budget weights must be positive");
  require(budget > 0.0, ErrorKind::invalid_constraint, "budget must be positive");

  DenseVector s(g.size(), 0.0);
  std::size_t best = g.size();
  double best_val = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double val = g[j] * (budget / c[j]);
    if (val < best_val) {
      best_val = val;
      best = j;
    }
  }
  if (best < g.size()) s[best] = budget / c[best];
  return s;
}

// ---------------------------------------------------------------------------
// Dense tableau simplex

namespace {

constexpr double kPivotTol = 1e-12;

class Tableau {
 public:
  // Constraint rows 0..m-1, objective row m; last column is the right-hand side.
  Tableau(std::size_t m, std::size_t vars) : t_(m + 1, vars + 1), basis_(m), m_(m), vars_(vars) {}

  double& at(std::size_t i, std::size_t j) { return t_(i, j); }
  double rhs(std::size_t i) const { return t_(i, vars_); }
  double& rhs(std::size_t i) { return t_(i, vars_); }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t r, std::size_t col) {
    const double p = t_(r, col);
    for (std::size_t j = 0; j <= vars_; ++j) t_(r, j) /= p;
    t_(r, col) = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= vars_; ++j) t_(i, j) -= f * t_(r, j);
      t_(i, col) = 0.0;
    }
    basis_[r] = col;
  }

  // Loads the cost vector into the objective row as reduced costs w.r.t. the
  // current basis.
  void set_objective(std::span<const double> cost) {
    for (std::size_t j = 0; j <= vars_; ++j) t_(m_, j) = j < cost.size() ? cost[j] : 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = t_(m_, basis_[i]);
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= vars_; ++j) t_(m_, j) -= cb * t_(i, j);
    }
  }

  // Bland's rule over columns [0, allowed). Returns false if unbounded.
  bool optimize(std::size_t allowed, std::size_t& pivots, std::size_t max_pivots) {
    for (;;) {
      std::size_t enter = allowed;
      for (std::size_t j = 0; j < allowed; ++j) {
        if (t_(m_, j) < -kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter == allowed) return true;

      std::size_t leave = m_;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = t_(i, enter);
        if (a <= kPivotTol) continue;
        const double ratio = rhs(i) / a;
        if (ratio < best_ratio - kPivotTol ||
            (leave != m_ && std::abs(ratio - best_ratio) <= kPivotTol &&
             basis_[i] < basis_[leave])) {
          best_ratio = ratio;
          leave = i;
        }
      }
      if (leave == m_) return false;
      if (++pivots > max_pivots)
        throw Error(ErrorKind::solver_stall,
                    "simplex exceeded " + std::to_string(max_pivots) + " pivots");
      pivot(leave, enter);
    }
  }

  double objective_value() const { return -t_(m_, vars_); }

 private:
  DenseMatrix t_;
  std::vector<std::size_t> basis_;
  std::size_t m_;
  std::size_t vars_;
};

}  // namespace

LpResult solve_lp(std::span<const double> cost, const DenseMatrix& a, std::span<const double> b,
                  std::size_t max_pivots) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  require(cost.size() == n, ErrorKind::dimension, "cost length differs from column count");
  require(b.size() == m, ErrorKind::dimension, "rhs length differs from row count");
  if (max_pivots == 0) max_pivots = 10 * (n + m);

  std::size_t artificials = 0;
  for (double v : b) artificials += v < 0.0 ? 1 : 0;

  // Columns: x (n) | slacks (m) | artificials.
  const std::size_t vars = n + m + artificials;
  Tableau tab(m, vars);
  std::size_t next_art = n + m;
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) tab.at(i, j) = sign * a(i, j);
    tab.at(i, n + i) = sign;
    tab.rhs(i) = sign * b[i];
    if (b[i] < 0.0) {
      tab.at(i, next_art) = 1.0;
      tab.basis()[i] = next_art++;
    } else {
      tab.basis()[i] = n + i;
    }
  }

  std::size_t pivots = 0;
  if (artificials > 0) {
    DenseVector phase_one(vars, 0.0);
    for (std::size_t j = n + m; j < vars; ++j) phase_one[j] = 1.0;
    tab.set_objective(phase_one);
    tab.optimize(vars, pivots, max_pivots);
    require(tab.objective_value() <= 1e-9 * (1.0 + std::abs(tab.objective_value())),
            ErrorKind::invalid_constraint, "linear program is infeasible");
    // Drive zero-level artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis()[i] < n + m) continue;
      for (std::size_t j = 0; j < n + m; ++j) {
        if (std::abs(tab.at(i, j)) > kPivotTol) {
          tab.pivot(i, j);
          break;
        }
      }
    }
  }

  tab.set_objective(cost);
  // Artificial columns are excluded from entering in phase two.
  if (!tab.optimize(n + m, pivots, max_pivots))
    throw Error(ErrorKind::invalid_constraint, "linear program is unbounded");

  LpResult result;
  result.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (tab.basis()[i] < n) result.x[tab.basis()[i]] = std::max(0.0, tab.rhs(i));
  result.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) result.objective += cost[j] * result.x[j];
  result.pivots = pivots;
  return result;
}

DenseVector lmo_general(std::span<const double> g, const PolytopeSet& set) {
  check_finite(g);
  require(g.size() == set.a.cols(), ErrorKind::dimension,
          "gradient length differs from technology matrix columns");
  set.validate();
  return solve_lp(g, set.a, set.c).x;
}

}  // namespace simopt
