#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace frontier {

enum class Sense { Minimize, Maximize };
enum class Relation { LessEqual, Equal, GreaterEqual };
enum class LpStatus { Optimal, Infeasible, Unbounded };

// Dense LP instance:
//
//   min/max  c'x
//   s.t.     A x  {<=, =, >=}  b   (per-row relation)
//            lower <= x <= upper   (lower defaults to 0, upper to +inf)
//
// Free variables are expressed with lower = -inf.
struct LinearProgram {
  Sense sense = Sense::Minimize;
  Eigen::VectorXd objective;        // c, length nv
  Eigen::MatrixXd constraints;      // A, nc x nv
  std::vector<Relation> relations;  // length nc
  Eigen::VectorXd rhs;              // b, length nc
  Eigen::VectorXd lower;            // length nv
  Eigen::VectorXd upper;            // length nv

  static LinearProgram make(Sense sense, Eigen::Index num_vars, Eigen::Index num_constraints);

  Eigen::Index num_vars() const { return objective.size(); }
  Eigen::Index num_constraints() const { return rhs.size(); }

  // Throws DimensionMismatch on inconsistent sizes or non-finite entries
  // (infinities are legal only in the bound vectors).
  void validate() const;

  // Plain-text dump of the instance, for bug reports.
  std::string debug_dump() const;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;       // in the instance's own sense
  Eigen::VectorXd primal;       // length nv (empty unless Optimal)
  Eigen::VectorXd duals;        // length nc, shadow prices d(obj*)/d(b_i)
  Eigen::VectorXd reduced_costs;  // length nv, c - A'y (bound multipliers)
  int iterations = 0;
};

// Two-phase revised simplex over a dense basis inverse. Dantzig pricing with
// a Bland's-rule fallback once the iteration count suggests cycling, so
// termination is guaranteed. Deterministic for identical input.
LpSolution solve(const LinearProgram& lp);

// Maximum feasibility violation of x over all rows and bounds, each row
// scaled to unit max-norm. Used by the solver's self-check and by tests.
double feasibility_residual(const LinearProgram& lp, const Eigen::VectorXd& x);

// |primal objective - dual objective|, where the dual objective is
// b'y plus the bound terms contributed by the reduced costs.
double duality_gap(const LinearProgram& lp, const LpSolution& sol);

}  // namespace frontier
