#include "frontier/lp.hpp"

#include "frontier/errors.hpp"
#include "frontier/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace frontier {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOptTol = 1e-9;   // reduced-cost threshold
constexpr double kPivTol = 1e-9;   // ratio-test eligibility
constexpr double kTieTol = 1e-12;  // ratio ties
constexpr int kRefactorEvery = 64;

enum class ColKind { Structural, SlackSurplus, Artificial };

struct Column {
  ColKind kind;
  // Structural: original variable index and +1/-1 for split free variables.
  int var = -1;
  double part = 1.0;
  // SlackSurplus / Artificial: owning row.
  int row = -1;
};

// Internal minimize-orientation standard form: min c'x, A x = b, x >= 0,
// b >= 0. Rows are the original constraints followed by one row per finite
// upper bound; negated rows are tracked so duals can be mapped back.
class SimplexSolver {
 public:
  explicit SimplexSolver(const LinearProgram& lp) : lp_(lp) { build(); }

  LpSolution run() {
    LpSolution out;

    // Phase 1: minimize the artificial sum from the all-logical basis.
    if (!have_artificials_) {
      phase_one_feasible_ = true;
    } else {
      Eigen::VectorXd c1 = Eigen::VectorXd::Zero(ncols());
      for (int j = 0; j < ncols(); ++j)
        if (cols_[j].kind == ColKind::Artificial) c1[j] = 1.0;
      iterate(c1, /*allow_artificial=*/true);
      const double art_sum = objective_of(c1);
      const double feas_scale = std::max(1.0, b_.lpNorm<Eigen::Infinity>());
      phase_one_feasible_ = art_sum <= 1e-9 * feas_scale;
      if (!phase_one_feasible_) {
        out.status = LpStatus::Infeasible;
        out.iterations = iterations_;
        return out;
      }
      purge_artificials();
    }

    // Phase 2 on the true costs.
    const bool bounded = iterate(c_, /*allow_artificial=*/false);
    out.iterations = iterations_;
    if (!bounded) {
      out.status = LpStatus::Unbounded;
      return out;
    }

    refactorize();
    out.status = LpStatus::Optimal;
    extract(out);
    return out;
  }

 private:
  int nrows() const { return static_cast<int>(b_.size()); }
  int ncols() const { return static_cast<int>(cols_.size()); }

  void build() {
    const auto nv = lp_.num_vars();
    const auto nc = lp_.num_constraints();

    // Structural columns: shift finite lower bounds to zero, split free
    // variables into positive and negative parts.
    std::vector<Eigen::VectorXd> acols;
    std::vector<double> costs;
    shift_ = Eigen::VectorXd::Zero(nv);
    for (Eigen::Index j = 0; j < nv; ++j) {
      const Eigen::VectorXd aj = lp_.constraints.col(j);
      if (std::isfinite(lp_.lower[j])) {
        shift_[j] = lp_.lower[j];
        cols_.push_back({ColKind::Structural, static_cast<int>(j), 1.0, -1});
        acols.push_back(aj);
        costs.push_back(lp_.objective[j]);
      } else {
        cols_.push_back({ColKind::Structural, static_cast<int>(j), 1.0, -1});
        acols.push_back(aj);
        costs.push_back(lp_.objective[j]);
        cols_.push_back({ColKind::Structural, static_cast<int>(j), -1.0, -1});
        acols.push_back(-aj);
        costs.push_back(-lp_.objective[j]);
      }
    }
    const int nstruct = static_cast<int>(cols_.size());

    // Row list: originals, then one <= row per finite upper bound.
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> rhs;
    std::vector<Relation> rels;
    for (Eigen::Index i = 0; i < nc; ++i) {
      Eigen::VectorXd r(nstruct);
      for (int j = 0; j < nstruct; ++j) r[j] = acols[j][i];
      double bi = lp_.rhs[i];
      for (Eigen::Index j = 0; j < nv; ++j)
        if (shift_[j] != 0.0) bi -= lp_.constraints(i, j) * shift_[j];
      rows.push_back(std::move(r));
      rhs.push_back(bi);
      rels.push_back(lp_.relations[i]);
      row_origin_.push_back(static_cast<int>(i));
    }
    for (Eigen::Index j = 0; j < nv; ++j) {
      if (!std::isfinite(lp_.upper[j])) continue;
      Eigen::VectorXd r = Eigen::VectorXd::Zero(nstruct);
      for (int k = 0; k < nstruct; ++k)
        if (cols_[k].var == j) r[k] = cols_[k].part;
      rows.push_back(std::move(r));
      rhs.push_back(lp_.upper[j] - (std::isfinite(lp_.lower[j]) ? lp_.lower[j] : 0.0));
      rels.push_back(Relation::LessEqual);
      row_origin_.push_back(-1);
    }

    const int m = static_cast<int>(rows.size());
    row_sign_.assign(m, 1.0);
    for (int i = 0; i < m; ++i) {
      if (rhs[i] < 0.0) {
        rows[i] = -rows[i];
        rhs[i] = -rhs[i];
        row_sign_[i] = -1.0;
        if (rels[i] == Relation::LessEqual) rels[i] = Relation::GreaterEqual;
        else if (rels[i] == Relation::GreaterEqual) rels[i] = Relation::LessEqual;
      }
    }

    // Logical columns and the starting basis.
    basis_.assign(m, -1);
    std::vector<std::pair<int, double>> logical;  // (row, coefficient)
    for (int i = 0; i < m; ++i) {
      if (rels[i] == Relation::LessEqual) {
        cols_.push_back({ColKind::SlackSurplus, -1, 1.0, i});
        logical.push_back({i, 1.0});
        basis_[i] = static_cast<int>(cols_.size()) - 1;
      } else if (rels[i] == Relation::GreaterEqual) {
        cols_.push_back({ColKind::SlackSurplus, -1, 1.0, i});
        logical.push_back({i, -1.0});
      }
    }
    for (int i = 0; i < m; ++i) {
      if (basis_[i] == -1) {
        cols_.push_back({ColKind::Artificial, -1, 1.0, i});
        logical.push_back({i, 1.0});
        basis_[i] = static_cast<int>(cols_.size()) - 1;
        have_artificials_ = true;
      }
    }

    A_.setZero(m, ncols());
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < nstruct; ++j) A_(i, j) = rows[i][j];
    {
      int lj = nstruct;
      for (auto [row, coef] : logical) A_(row, lj++) = coef;
    }
    b_ = Eigen::Map<Eigen::VectorXd>(rhs.data(), m);

    c_ = Eigen::VectorXd::Zero(ncols());
    const double sense = lp_.sense == Sense::Minimize ? 1.0 : -1.0;
    for (int j = 0; j < nstruct; ++j) c_[j] = sense * costs[j];

    binv_ = Eigen::MatrixXd::Identity(m, m);
    xb_ = b_;
    in_basis_.assign(ncols(), 0);
    for (int bi : basis_) in_basis_[bi] = 1;
    dropped_col_.assign(ncols(), 0);
  }

  double objective_of(const Eigen::VectorXd& c) const {
    double v = 0.0;
    for (int i = 0; i < nrows(); ++i) v += c[basis_[i]] * xb_[i];
    return v;
  }

  void refactorize() {
    const int m = nrows();
    Eigen::MatrixXd B(m, m);
    for (int i = 0; i < m; ++i) B.col(i) = A_.col(basis_[i]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible())
      throw NumericalBreakdown("simplex basis became singular at refactorization");
    binv_ = lu.inverse();
    xb_ = binv_ * b_;
    for (int i = 0; i < m; ++i)
      if (xb_[i] < 0.0 && xb_[i] > -1e-7) xb_[i] = 0.0;
  }

  // Price-and-pivot loop for the given costs. Returns false on unbounded.
  bool iterate(const Eigen::VectorXd& c, bool allow_artificial) {
    const int m = nrows();
    const int dantzig_cap = 500 + 50 * (ncols() + m);
    const int hard_cap = 200000 + 2000 * (ncols() + m);
    bool bland = false;
    int since_refactor = 0;

    while (true) {
      if (iterations_ > hard_cap)
        throw NumericalBreakdown("simplex iteration limit exceeded");
      if (!bland && iterations_ > dantzig_cap) bland = true;

      Eigen::VectorXd cb(m);
      for (int i = 0; i < m; ++i) cb[i] = c[basis_[i]];
      const Eigen::VectorXd y = binv_.transpose() * cb;

      int entering = -1;
      double best = -kOptTol;
      for (int j = 0; j < ncols(); ++j) {
        if (in_basis_[j] || dropped_col_[j]) continue;
        if (!allow_artificial && cols_[j].kind == ColKind::Artificial) continue;
        const double dj = c[j] - y.dot(A_.col(j));
        if (bland) {
          if (dj < -kOptTol) { entering = j; break; }
        } else if (dj < best) {
          best = dj;
          entering = j;
        }
      }
      if (entering < 0) return true;  // optimal for these costs

      Eigen::VectorXd w = binv_ * A_.col(entering);

      int leave = -1;
      double min_ratio = kInf;
      for (int i = 0; i < m; ++i) {
        if (w[i] <= kPivTol) continue;
        const double ratio = std::max(xb_[i], 0.0) / w[i];
        if (ratio < min_ratio - kTieTol) {
          min_ratio = ratio;
          leave = i;
        } else if (ratio <= min_ratio + kTieTol) {
          if (bland) {
            if (basis_[i] < basis_[leave]) leave = i;
          } else if (std::abs(w[i]) > std::abs(w[leave]) ||
                     (std::abs(w[i]) == std::abs(w[leave]) && basis_[i] < basis_[leave])) {
            leave = i;
          }
        }
      }
      if (leave < 0) return false;  // unbounded direction

      pivot(entering, leave, w);
      ++iterations_;
      if (++since_refactor >= kRefactorEvery) {
        refactorize();
        since_refactor = 0;
      }
    }
  }

  void pivot(int entering, int leave, const Eigen::VectorXd& w) {
    const int m = nrows();
    const double piv = w[leave];
    if (std::abs(piv) < 1e-11) throw NumericalBreakdown("pivot element vanished");

    binv_.row(leave) /= piv;
    const double xl = std::max(xb_[leave], 0.0) / piv;
    for (int i = 0; i < m; ++i) {
      if (i == leave) continue;
      if (w[i] != 0.0) {
        binv_.row(i) -= w[i] * binv_.row(leave);
        xb_[i] -= w[i] * xl;
        if (xb_[i] < 0.0 && xb_[i] > -1e-9) xb_[i] = 0.0;
      }
    }
    xb_[leave] = xl;
    in_basis_[basis_[leave]] = 0;
    in_basis_[entering] = 1;
    basis_[leave] = entering;
  }

  // After a feasible phase 1, drive remaining artificials out of the basis;
  // rows whose artificial cannot be replaced are redundant and are dropped.
  void purge_artificials() {
    const int m = nrows();
    std::vector<int> drop_rows;
    for (int i = 0; i < m; ++i) {
      if (cols_[basis_[i]].kind != ColKind::Artificial) continue;
      const Eigen::VectorXd brow = binv_.row(i);
      int pivot_col = -1;
      for (int j = 0; j < ncols(); ++j) {
        if (in_basis_[j] || dropped_col_[j]) continue;
        if (cols_[j].kind == ColKind::Artificial) continue;
        if (std::abs(brow.dot(A_.col(j))) > 1e-9) { pivot_col = j; break; }
      }
      if (pivot_col >= 0) {
        Eigen::VectorXd w = binv_ * A_.col(pivot_col);
        pivot(pivot_col, i, w);
      } else {
        drop_rows.push_back(i);
      }
    }
    if (!drop_rows.empty()) drop_redundant_rows(drop_rows);
    for (int j = 0; j < ncols(); ++j)
      if (cols_[j].kind == ColKind::Artificial && !in_basis_[j]) dropped_col_[j] = 1;
  }

  void drop_redundant_rows(const std::vector<int>& rows) {
    const int m = nrows();
    std::vector<char> gone(m, 0);
    for (int r : rows) {
      gone[r] = 1;
      dropped_col_[basis_[r]] = 1;
      in_basis_[basis_[r]] = 0;
    }
    std::vector<int> keep;
    for (int i = 0; i < m; ++i)
      if (!gone[i]) keep.push_back(i);
    const int mk = static_cast<int>(keep.size());

    Eigen::MatrixXd a2(mk, ncols());
    Eigen::VectorXd b2(mk);
    std::vector<int> basis2(mk), origin2(mk);
    std::vector<double> sign2(mk);
    for (int i = 0; i < mk; ++i) {
      a2.row(i) = A_.row(keep[i]);
      b2[i] = b_[keep[i]];
      basis2[i] = basis_[keep[i]];
      origin2[i] = row_origin_[keep[i]];
      sign2[i] = row_sign_[keep[i]];
    }
    A_ = std::move(a2);
    b_ = std::move(b2);
    basis_ = std::move(basis2);
    row_origin_ = std::move(origin2);
    row_sign_.assign(sign2.begin(), sign2.end());
    refactorize();
  }

  void extract(LpSolution& out) const {
    const auto nc = lp_.num_constraints();
    const int m = nrows();

    Eigen::VectorXd t = Eigen::VectorXd::Zero(ncols());
    for (int i = 0; i < m; ++i) t[basis_[i]] = std::max(xb_[i], 0.0);

    out.primal = shift_;
    for (int j = 0; j < ncols(); ++j)
      if (cols_[j].kind == ColKind::Structural)
        out.primal[cols_[j].var] += cols_[j].part * t[j];

    out.objective = lp_.objective.dot(out.primal);

    Eigen::VectorXd cb(m);
    for (int i = 0; i < m; ++i) cb[i] = c_[basis_[i]];
    const Eigen::VectorXd y = binv_.transpose() * cb;
    const double sense = lp_.sense == Sense::Minimize ? 1.0 : -1.0;
    out.duals = Eigen::VectorXd::Zero(nc);
    for (int i = 0; i < m; ++i)
      if (row_origin_[i] >= 0) out.duals[row_origin_[i]] = sense * row_sign_[i] * y[i];

    out.reduced_costs = lp_.objective - lp_.constraints.transpose() * out.duals;
  }

  const LinearProgram& lp_;
  std::vector<Column> cols_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_, c_;
  Eigen::VectorXd shift_;
  std::vector<int> basis_;
  std::vector<char> in_basis_;
  std::vector<char> dropped_col_;
  std::vector<int> row_origin_;
  std::vector<double> row_sign_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  bool have_artificials_ = false;
  bool phase_one_feasible_ = false;
  int iterations_ = 0;
};

}  // namespace

LinearProgram LinearProgram::make(Sense sense, Eigen::Index num_vars, Eigen::Index num_constraints) {
  LinearProgram lp;
  lp.sense = sense;
  lp.objective = Eigen::VectorXd::Zero(num_vars);
  lp.constraints = Eigen::MatrixXd::Zero(num_constraints, num_vars);
  lp.relations.assign(num_constraints, Relation::LessEqual);
  lp.rhs = Eigen::VectorXd::Zero(num_constraints);
  lp.lower = Eigen::VectorXd::Zero(num_vars);
  lp.upper = Eigen::VectorXd::Constant(num_vars, kInf);
  return lp;
}

void LinearProgram::validate() const {
  const auto nv = num_vars();
  const auto nc = num_constraints();
  if (nv <= 0) throw DimensionMismatch("linear program has no variables");
  if (constraints.rows() != nc || constraints.cols() != nv)
    throw DimensionMismatch("constraint matrix is " + std::to_string(constraints.rows()) + "x" +
                            std::to_string(constraints.cols()) + ", expected " + std::to_string(nc) +
                            "x" + std::to_string(nv));
  if (static_cast<Eigen::Index>(relations.size()) != nc)
    throw DimensionMismatch("relation list length does not match constraint count");
  if (lower.size() != nv || upper.size() != nv)
    throw DimensionMismatch("bound vector length does not match variable count");
  if (!objective.allFinite() || !constraints.allFinite() || !rhs.allFinite())
    throw DimensionMismatch("objective, constraint, and rhs entries must be finite");
  for (Eigen::Index j = 0; j < nv; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] == kInf || upper[j] == -kInf)
      throw DimensionMismatch("invalid bounds on variable " + std::to_string(j));
  }
}

std::string LinearProgram::debug_dump() const {
  std::ostringstream os;
  os << (sense == Sense::Minimize ? "min" : "max");
  for (Eigen::Index j = 0; j < num_vars(); ++j) os << ' ' << stats::format_double(objective[j]);
  os << '\n';
  for (Eigen::Index i = 0; i < num_constraints(); ++i) {
    for (Eigen::Index j = 0; j < num_vars(); ++j) os << stats::format_double(constraints(i, j)) << ' ';
    os << (relations[i] == Relation::LessEqual ? "<=" : relations[i] == Relation::Equal ? "=" : ">=");
    os << ' ' << stats::format_double(rhs[i]) << '\n';
  }
  os << "bounds";
  for (Eigen::Index j = 0; j < num_vars(); ++j)
    os << " [" << stats::format_double(lower[j]) << ", " << stats::format_double(upper[j]) << "]";
  os << '\n';
  return os.str();
}

LpSolution solve(const LinearProgram& lp) {
  lp.validate();
  SimplexSolver solver(lp);
  LpSolution sol = solver.run();
  if (sol.status == LpStatus::Optimal) {
    if (feasibility_residual(lp, sol.primal) > 1e-8)
      throw NumericalBreakdown("optimal basis fails the feasibility check");
    if (duality_gap(lp, sol) > 1e-8 * std::max(1.0, std::abs(sol.objective)))
      throw NumericalBreakdown("optimal basis fails the duality check");
  }
  return sol;
}

double feasibility_residual(const LinearProgram& lp, const Eigen::VectorXd& x) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < lp.num_constraints(); ++i) {
    double scale = std::max(1.0, std::abs(lp.rhs[i]));
    for (Eigen::Index j = 0; j < lp.num_vars(); ++j)
      scale = std::max(scale, std::abs(lp.constraints(i, j)));
    const double lhs = lp.constraints.row(i).dot(x);
    double viol = 0.0;
    switch (lp.relations[i]) {
      case Relation::LessEqual: viol = lhs - lp.rhs[i]; break;
      case Relation::GreaterEqual: viol = lp.rhs[i] - lhs; break;
      case Relation::Equal: viol = std::abs(lhs - lp.rhs[i]); break;
    }
    worst = std::max(worst, viol / scale);
  }
  for (Eigen::Index j = 0; j < lp.num_vars(); ++j) {
    if (std::isfinite(lp.lower[j]))
      worst = std::max(worst, (lp.lower[j] - x[j]) / std::max(1.0, std::abs(lp.lower[j])));
    if (std::isfinite(lp.upper[j]))
      worst = std::max(worst, (x[j] - lp.upper[j]) / std::max(1.0, std::abs(lp.upper[j])));
  }
  return worst;
}

double duality_gap(const LinearProgram& lp, const LpSolution& sol) {
  const double sense = lp.sense == Sense::Minimize ? 1.0 : -1.0;
  double dual_obj = sense * lp.rhs.dot(sol.duals);
  for (Eigen::Index j = 0; j < lp.num_vars(); ++j) {
    const double dj = sense * sol.reduced_costs[j];
    if (std::abs(dj) < 1e-12) continue;
    const double bound = dj > 0.0 ? lp.lower[j] : lp.upper[j];
    if (std::isfinite(bound)) {
      dual_obj += bound * dj;
    } else if (std::abs(dj) > 1e-7) {
      // A nonzero multiplier against an infinite bound means the basis is
      // not dual feasible; report an unbounded gap instead of hiding it.
      return kInf;
    }
  }
  return std::abs(sense * sol.objective - dual_obj);
}

}  // namespace frontier
