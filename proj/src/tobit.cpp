#include "frontier/tobit.hpp"

#include "frontier/errors.hpp"
#include "frontier/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace frontier {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Censoring { None, Lower, Upper };

void check_inputs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TobitSpec& spec) {
  if (X.rows() != y.size())
    throw DimensionMismatch("design has " + std::to_string(X.rows()) + " rows, response has " +
                            std::to_string(y.size()));
  if (!std::isfinite(spec.lower))
    throw ValidationError("lower censoring bound must be finite");
  if (spec.upper && *spec.upper <= spec.lower)
    throw ValidationError("upper censoring bound must exceed the lower bound");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] < spec.lower)
      throw ValidationError("response " + std::to_string(i) + " lies below the censoring bound");
    if (spec.upper && y[i] > *spec.upper)
      throw ValidationError("response " + std::to_string(i) + " lies above the censoring bound");
  }
}

Censoring classify(double yi, const TobitSpec& spec) {
  if (yi <= spec.lower) return Censoring::Lower;
  if (spec.upper && yi >= *spec.upper) return Censoring::Upper;
  return Censoring::None;
}

// Columns to keep, deciding rank by an in-order Cholesky of the Gram matrix:
// a column whose residual variance after projecting on the previous kept
// columns falls below rel_tol of its own scale is collinear and loses.
// `order` is the processing order (the intercept goes first so a constant
// covariate is the one reported dropped).
std::vector<bool> rank_keep_mask(const Eigen::MatrixXd& D, const std::vector<int>& order,
                                 double rel_tol = 1e-10) {
  const Eigen::Index p = D.cols();
  const Eigen::MatrixXd S = D.transpose() * D;
  std::vector<bool> keep(p, false);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(p, p);  // rows in processing order
  std::vector<int> kept_order;
  for (int j : order) {
    double d = S(j, j);
    Eigen::VectorXd l(kept_order.size());
    for (std::size_t t = 0; t < kept_order.size(); ++t) {
      double sum = S(kept_order[t], j);
      for (std::size_t u = 0; u < t; ++u) sum -= L(t, u) * l(u);
      l(t) = sum / L(t, t);
      d -= l(t) * l(t);
    }
    if (d <= rel_tol * std::max(S(j, j), 1e-300)) continue;  // collinear: drop
    const auto t = static_cast<Eigen::Index>(kept_order.size());
    for (Eigen::Index u = 0; u < t; ++u) L(t, u) = l(u);
    L(t, t) = std::sqrt(d);
    kept_order.push_back(j);
    keep[static_cast<std::size_t>(j)] = true;
  }
  return keep;
}

struct OlsenOptimum {
  Eigen::VectorXd gamma;
  double h = 1.0;
  double logL = 0.0;
  Eigen::MatrixXd hessian;  // at the optimum
  bool converged = false;
  int iterations = 0;
};

// Newton ascent with step halving. The likelihood is concave in these
// coordinates, so any ascent step from a feasible start converges to the
// global optimum when one exists.
OlsenOptimum maximize_olsen(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const TobitSpec& spec, const Eigen::VectorXd& gamma0, double h0) {
  const Eigen::Index p = X.cols();
  OlsenOptimum opt;
  opt.gamma = gamma0;
  opt.h = h0;

  Eigen::VectorXd grad(p + 1);
  Eigen::MatrixXd hess(p + 1, p + 1);
  double f = olsen_loglik(opt.gamma, opt.h, X, y, spec, &grad, &hess);

  for (int it = 0; it < spec.max_iterations; ++it) {
    opt.iterations = it;
    if (grad.cwiseAbs().maxCoeff() < spec.grad_tol) {
      opt.converged = true;
      break;
    }

    // Solve (-H) step = grad; -H is PSD by concavity, ridge against
    // boundary-flatness cases.
    Eigen::MatrixXd info = -hess;
    Eigen::VectorXd step;
    for (double ridge = 0.0;; ridge = std::max(1e-10, ridge * 100)) {
      Eigen::LLT<Eigen::MatrixXd> llt(
          ridge == 0.0 ? info : Eigen::MatrixXd(info + ridge * Eigen::MatrixXd::Identity(
                                                             p + 1, p + 1)));
      if (llt.info() == Eigen::Success) {
        step = llt.solve(grad);
        break;
      }
      if (ridge > 1e6) throw NumericalBreakdown("observed information is not invertible");
    }

    double t = 1.0;
    while (opt.h + t * step(p) <= 0.0) t *= 0.5;  // keep 1/sigma positive
    const double slope = grad.dot(step);
    double f_new = f;
    Eigen::VectorXd gamma_new;
    double h_new = opt.h;
    while (true) {
      gamma_new = opt.gamma + t * step.head(p);
      h_new = opt.h + t * step(p);
      f_new = olsen_loglik(gamma_new, h_new, X, y, spec);
      if (std::isfinite(f_new) && f_new >= f + 1e-4 * t * slope) break;
      t *= 0.5;
      if (t < 1e-14) break;  // stalled; fall through with the best point kept
    }
    if (!(f_new > f) && t < 1e-14) {
      // No ascent possible along the Newton direction: either converged to
      // machine precision or the step tolerance has been reached.
      break;
    }
    const double step_norm = (t * step).cwiseAbs().maxCoeff();
    opt.gamma = gamma_new;
    opt.h = h_new;
    f = olsen_loglik(opt.gamma, opt.h, X, y, spec, &grad, &hess);
    if (step_norm < spec.step_tol) {
      opt.converged = grad.cwiseAbs().maxCoeff() < spec.grad_tol;
      break;
    }
  }
  if (!opt.converged && grad.cwiseAbs().maxCoeff() < spec.grad_tol) opt.converged = true;

  opt.logL = f;
  opt.hessian = hess;
  return opt;
}

OlsenOptimum fit_design(const Eigen::MatrixXd& D, const Eigen::VectorXd& y,
                        const TobitSpec& spec) {
  const Eigen::Index n = D.rows(), p = D.cols();

  // Least-squares start: beta from the normal equations over all
  // observations, sigma from the residual mean square.
  Eigen::VectorXd beta0 = (D.transpose() * D).ldlt().solve(D.transpose() * y);
  const double rss = (y - D * beta0).squaredNorm();
  double sigma0 = std::sqrt(std::max(rss / static_cast<double>(n), 1e-12));
  const double y_scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  sigma0 = std::max(sigma0, 1e-6 * y_scale);

  return maximize_olsen(D, y, spec, beta0 / sigma0, 1.0 / sigma0);
}

}  // namespace

double olsen_loglik(const Eigen::VectorXd& gamma, double h, const Eigen::MatrixXd& X,
                    const Eigen::VectorXd& y, const TobitSpec& spec, Eigen::VectorXd* grad,
                    Eigen::MatrixXd* hess) {
  if (gamma.size() != X.cols())
    throw DimensionMismatch("gamma length does not match design width");
  if (h <= 0.0) throw NonPositiveSigma("h = 1/sigma must be positive");

  const Eigen::Index p = X.cols();
  double ll = 0.0;
  if (grad) grad->setZero(p + 1);
  if (hess) hess->setZero(p + 1, p + 1);

  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double xg = X.row(i).dot(gamma);
    switch (classify(y[i], spec)) {
      case Censoring::None: {
        const double z = h * y[i] - xg;
        ll += std::log(h) + stats::norm_logpdf(z);
        if (grad) {
          grad->head(p) += z * X.row(i).transpose();
          (*grad)(p) += -z * y[i] + 1.0 / h;
        }
        if (hess) {
          hess->topLeftCorner(p, p) -= X.row(i).transpose() * X.row(i);
          hess->block(0, p, p, 1) += y[i] * X.row(i).transpose();
          hess->block(p, 0, 1, p) += y[i] * X.row(i);
          (*hess)(p, p) += -y[i] * y[i] - 1.0 / (h * h);
        }
        break;
      }
      case Censoring::Lower: {
        const double c = h * spec.lower - xg;
        ll += stats::norm_logcdf(c);
        const double m = stats::mills_ratio(c);
        const double mp = -(c * m + m * m);  // d mills/dc, always negative
        if (grad) {
          grad->head(p) -= m * X.row(i).transpose();
          (*grad)(p) += m * spec.lower;
        }
        if (hess) {
          hess->topLeftCorner(p, p) += mp * X.row(i).transpose() * X.row(i);
          hess->block(0, p, p, 1) -= mp * spec.lower * X.row(i).transpose();
          hess->block(p, 0, 1, p) -= mp * spec.lower * X.row(i);
          (*hess)(p, p) += mp * spec.lower * spec.lower;
        }
        break;
      }
      case Censoring::Upper: {
        const double u = *spec.upper;
        const double d = xg - h * u;
        ll += stats::norm_logcdf(d);
        const double m = stats::mills_ratio(d);
        const double mp = -(d * m + m * m);
        if (grad) {
          grad->head(p) += m * X.row(i).transpose();
          (*grad)(p) -= m * u;
        }
        if (hess) {
          hess->topLeftCorner(p, p) += mp * X.row(i).transpose() * X.row(i);
          hess->block(0, p, p, 1) -= mp * u * X.row(i).transpose();
          hess->block(p, 0, 1, p) -= mp * u * X.row(i);
          (*hess)(p, p) += mp * u * u;
        }
        break;
      }
    }
  }
  return ll;
}

double log_likelihood(const Eigen::VectorXd& beta, double sigma, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& y, const TobitSpec& spec) {
  if (sigma <= 0.0) throw NonPositiveSigma("sigma must be positive");
  if (beta.size() != X.cols())
    throw DimensionMismatch("beta length does not match design width");
  check_inputs(X, y, spec);
  return olsen_loglik(beta / sigma, 1.0 / sigma, X, y, spec);
}

void log_likelihood_gradient(const Eigen::VectorXd& beta, double sigma,
                             const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const TobitSpec& spec, Eigen::VectorXd& grad_beta,
                             double& grad_sigma) {
  if (sigma <= 0.0) throw NonPositiveSigma("sigma must be positive");
  if (beta.size() != X.cols())
    throw DimensionMismatch("beta length does not match design width");
  check_inputs(X, y, spec);

  const Eigen::Index p = X.cols();
  grad_beta.setZero(p);
  grad_sigma = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double mu = X.row(i).dot(beta);
    switch (classify(y[i], spec)) {
      case Censoring::None: {
        const double e = (y[i] - mu) / sigma;
        grad_beta += e / sigma * X.row(i).transpose();
        grad_sigma += (e * e - 1.0) / sigma;
        break;
      }
      case Censoring::Lower: {
        const double c = (spec.lower - mu) / sigma;
        const double m = stats::mills_ratio(c);
        grad_beta -= m / sigma * X.row(i).transpose();
        grad_sigma -= m * c / sigma;
        break;
      }
      case Censoring::Upper: {
        const double d = (mu - *spec.upper) / sigma;
        const double m = stats::mills_ratio(d);
        grad_beta += m / sigma * X.row(i).transpose();
        grad_sigma -= m * d / sigma;
        break;
      }
    }
  }
}

TobitFit fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TobitSpec& spec,
             std::vector<std::string> names) {
  check_inputs(X, y, spec);
  const Eigen::Index n = X.rows(), k = X.cols();

  if (names.empty())
    for (Eigen::Index j = 0; j < k; ++j) names.push_back("x" + std::to_string(j + 1));
  if (static_cast<Eigen::Index>(names.size()) != k)
    throw DimensionMismatch("name list does not match design width");

  TobitFit out;
  out.requested = names;
  out.n = static_cast<std::size_t>(n);
  for (Eigen::Index i = 0; i < n; ++i)
    classify(y[i], spec) == Censoring::None ? ++out.n_uncensored : ++out.n_censored;
  if (out.n_uncensored == 0)
    throw AllCensored("every observation sits at a censoring bound");

  // Full design: covariates in caller order, intercept appended last; rank
  // processing starts at the intercept so constant covariates lose to it.
  const Eigen::Index P = k + (spec.include_intercept ? 1 : 0);
  Eigen::MatrixXd D(n, P);
  if (k > 0) D.leftCols(k) = X;
  if (spec.include_intercept) D.col(k).setOnes();

  std::vector<int> order;
  if (spec.include_intercept) order.push_back(static_cast<int>(k));
  for (Eigen::Index j = 0; j < k; ++j) order.push_back(static_cast<int>(j));
  const std::vector<bool> keep = rank_keep_mask(D, order);

  std::vector<Eigen::Index> kept_cols;
  for (Eigen::Index j = 0; j < P; ++j) {
    if (keep[static_cast<std::size_t>(j)]) {
      kept_cols.push_back(j);
    } else if (j < k) {
      out.dropped.push_back({names[static_cast<std::size_t>(j)],
                             "collinear with preceding columns"});
    } else {
      out.dropped.push_back({"_cons", "collinear with preceding columns"});
    }
  }
  const Eigen::Index q = static_cast<Eigen::Index>(kept_cols.size());
  if (q == 0) throw TooFewObservations("no identifiable columns in the design");
  if (n <= q)
    throw TooFewObservations("need more observations (" + std::to_string(n) +
                             ") than parameters (" + std::to_string(q) + ")");

  Eigen::MatrixXd Dk(n, q);
  for (Eigen::Index t = 0; t < q; ++t) Dk.col(t) = D.col(kept_cols[static_cast<std::size_t>(t)]);
  for (Eigen::Index t = 0; t < q; ++t) {
    const Eigen::Index j = kept_cols[static_cast<std::size_t>(t)];
    out.names.push_back(j < k ? names[static_cast<std::size_t>(j)] : "_cons");
  }

  const OlsenOptimum opt = fit_design(Dk, y, spec);
  out.converged = opt.converged;
  out.iterations = opt.iterations;
  out.logL = opt.logL;
  out.sigma = 1.0 / opt.h;
  out.beta = opt.gamma / opt.h;

  // Delta method: covariance of (gamma, h) from the inverse observed
  // information, mapped through beta = gamma/h, sigma = 1/h.
  const Eigen::MatrixXd info = -opt.hessian;
  const Eigen::MatrixXd cov_olsen =
      info.ldlt().solve(Eigen::MatrixXd::Identity(q + 1, q + 1));
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(q + 1, q + 1);
  for (Eigen::Index t = 0; t < q; ++t) {
    J(t, t) = 1.0 / opt.h;
    J(t, q) = -opt.gamma(t) / (opt.h * opt.h);
  }
  J(q, q) = -1.0 / (opt.h * opt.h);
  const Eigen::MatrixXd cov = J * cov_olsen * J.transpose();

  out.se_beta.resize(q);
  for (Eigen::Index t = 0; t < q; ++t)
    out.se_beta(t) = std::sqrt(std::max(cov(t, t), 0.0));
  out.se_sigma = std::sqrt(std::max(cov(q, q), 0.0));

  out.t_stats.resize(q);
  out.p_values.resize(q);
  for (Eigen::Index t = 0; t < q; ++t) {
    out.t_stats(t) = out.beta(t) / out.se_beta(t);
    out.p_values(t) = 2.0 * stats::norm_cdf(-std::abs(out.t_stats(t)));
  }

  // Null model: intercept only, same censoring.
  const bool has_intercept = spec.include_intercept && keep[static_cast<std::size_t>(k)];
  out.df = static_cast<int>(q) - (has_intercept ? 1 : 0);
  if (has_intercept && q == 1) {
    out.logL0 = out.logL;  // the fit IS the null model
  } else {
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n, 1);
    out.logL0 = fit_design(ones, y, spec).logL;
  }

  out.lr_chi2 = 2.0 * (out.logL - out.logL0);
  if (out.lr_chi2 < 0.0 && out.lr_chi2 > -1e-8) out.lr_chi2 = 0.0;
  out.prob_chi2 = out.df == 0 ? (out.lr_chi2 <= 0.0 ? 1.0 : 0.0)
                              : stats::chi2_sf(out.lr_chi2, out.df);
  out.pseudo_r2 = out.logL0 != 0.0 ? 1.0 - out.logL / out.logL0 : kNaN;
  return out;
}

std::vector<TobitRow> inference_table(const TobitFit& fit) {
  if (!fit.converged)
    throw NotConverged("inference table requested for a fit that did not converge");

  std::vector<TobitRow> rows;
  auto fitted_index = [&](const std::string& name) -> Eigen::Index {
    for (std::size_t t = 0; t < fit.names.size(); ++t)
      if (fit.names[t] == name) return static_cast<Eigen::Index>(t);
    return -1;
  };
  auto is_dropped = [&](const std::string& name) {
    return std::any_of(fit.dropped.begin(), fit.dropped.end(),
                       [&](const DroppedVariable& d) { return d.name == name; });
  };

  auto push = [&](const std::string& name) {
    TobitRow row;
    row.name = name;
    if (is_dropped(name)) {
      row.dropped = true;
      row.coef = row.se = row.t = kNaN;
      row.p = kNaN;
    } else {
      const Eigen::Index t = fitted_index(name);
      row.coef = fit.beta(t);
      row.se = fit.se_beta(t);
      row.t = row.coef / row.se;  // same division fit stores in t_stats
      row.p = 2.0 * stats::norm_cdf(-std::abs(row.t));
    }
    rows.push_back(row);
  };

  for (const auto& name : fit.requested) push(name);
  if (fitted_index("_cons") >= 0 || is_dropped("_cons")) push("_cons");
  return rows;
}

double fit_statistics_consistency(double logL, double lr_chi2) {
  if (lr_chi2 < 0.0)
    throw ValidationError("likelihood-ratio statistic must be nonnegative");
  const double logL0 = logL - lr_chi2 / 2.0;
  if (logL0 == 0.0)
    throw ValidationError("null log-likelihood of zero leaves pseudo-R2 undefined");
  return 1.0 - logL / logL0;
}

}  // namespace frontier
