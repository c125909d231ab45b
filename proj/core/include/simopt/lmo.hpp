#pragma once

// Linear minimization oracles: argmin_{s in X} s^T g for the feasible sets of
// the portfolio and newsvendor problems. Ties are broken by lowest index.

#include <cstddef>
#include <span>

#include "simopt/backend.hpp"

namespace simopt {

/// {w : w^T 1 <= 1, w >= 0}
struct SimplexSlackSet {
  std::size_t dimension = 0;

  bool contains(std::span<const double> w, double tol) const;
};

/// {s : A s <= C, s >= 0} with strictly positive A and C.
struct PolytopeSet {
  DenseMatrix a;
  DenseVector c;

  void validate() const;
  bool contains(std::span<const double> s, double tol) const;
};

/// {s : c^T s <= budget, s >= 0}, the single-resource case of PolytopeSet.
struct SingleBudgetSet {
  DenseVector c;
  double budget = 0.0;

  void validate() const;
  bool contains(std::span<const double> s, double tol) const;
  PolytopeSet as_polytope() const;
};

DenseVector lmo_simplex_slack(std::span<const double> g);

DenseVector lmo_single_budget(std::span<const double> g, std::span<const double> c, double budget);

/// Dense two-phase tableau simplex with Bland's rule. Intended for small
/// multi-resource instances.
DenseVector lmo_general(std::span<const double> g, const PolytopeSet& set);

struct LpResult {
  DenseVector x;
  double objective = 0.0;
  std::size_t pivots = 0;
};

/// min c^T x  s.t.  A x <= b, x >= 0  (b may have negative entries, in which
/// case phase one drives artificial variables out). Throws solver_stall when
/// the pivot cap is exceeded and configuration errors for infeasible or
/// unbounded programs.
LpResult solve_lp(std::span<const double> cost, const DenseMatrix& a, std::span<const double> b,
                  std::size_t max_pivots = 0);

}  // namespace simopt
