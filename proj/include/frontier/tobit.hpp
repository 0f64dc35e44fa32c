#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace frontier {

// Censored-regression setup. The response is observed exactly on
// (lower, upper) and censored at the bounds; upper is optional and off by
// default, which gives the standard left-censored model.
struct TobitSpec {
  double lower = 0.0;
  std::optional<double> upper;
  bool include_intercept = true;
  int max_iterations = 200;
  double grad_tol = 1e-8;   // infinity norm of the score
  double step_tol = 1e-12;  // parameter step below which iteration stalls
};

struct DroppedVariable {
  std::string name;
  std::string reason;
};

struct TobitFit {
  std::vector<std::string> names;     // kept design columns; "_cons" last
  std::vector<std::string> requested; // covariates as passed, original order
  Eigen::VectorXd beta;               // aligned with names
  double sigma = 0.0;
  Eigen::VectorXd se_beta;
  double se_sigma = 0.0;
  Eigen::VectorXd t_stats;            // beta ./ se_beta
  Eigen::VectorXd p_values;           // two-sided, standard normal reference
  double logL = 0.0;
  double logL0 = 0.0;                 // intercept-only refit
  double lr_chi2 = 0.0;               // 2 (logL - logL0)
  int df = 0;                         // slope parameters tested
  double prob_chi2 = 1.0;
  double pseudo_r2 = 0.0;             // McFadden, 1 - logL/logL0
  std::size_t n = 0;
  std::size_t n_censored = 0;
  std::size_t n_uncensored = 0;
  bool converged = false;
  int iterations = 0;
  std::vector<DroppedVariable> dropped;
};

// Censored-Gaussian log-likelihood with X used exactly as passed (no
// intercept is added here). Requires sigma > 0 and lower <= y_i <= upper.
double log_likelihood(const Eigen::VectorXd& beta, double sigma, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& y, const TobitSpec& spec);

// Analytic score of log_likelihood in the same (beta, sigma) coordinates;
// verified against central finite differences in the test suite.
void log_likelihood_gradient(const Eigen::VectorXd& beta, double sigma,
                             const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const TobitSpec& spec, Eigen::VectorXd& grad_beta,
                             double& grad_sigma);

// Log-likelihood in the Olsen coordinates (gamma = beta/sigma, h = 1/sigma),
// where the censored-Gaussian likelihood is globally concave, with optional
// gradient and Hessian in (gamma..., h). Exposed so tests can verify
// concavity directly.
double olsen_loglik(const Eigen::VectorXd& gamma, double h, const Eigen::MatrixXd& X,
                    const Eigen::VectorXd& y, const TobitSpec& spec,
                    Eigen::VectorXd* grad = nullptr, Eigen::MatrixXd* hess = nullptr);

// Maximum-likelihood fit: Newton ascent with step halving in the Olsen
// coordinates, initialized from least squares. Standard errors come from the
// inverse observed information mapped back to (beta, sigma) by the delta
// method. Collinear columns are dropped (later-listed column loses) and
// recorded, never silently absorbed. Returns with converged=false rather
// than throwing when the iteration cap is hit.
TobitFit fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TobitSpec& spec,
             std::vector<std::string> names = {});

struct TobitRow {
  std::string name;
  double coef = 0.0;
  double se = 0.0;
  double t = 0.0;
  double p = 1.0;
  bool dropped = false;  // collinear column: coef/se/t/p are meaningless
};

// Coefficient table in the original covariate order with dropped columns
// flagged in place and the intercept last. Requires fit.converged.
std::vector<TobitRow> inference_table(const TobitFit& fit);

// Recovers McFadden's pseudo-R2 from a reported likelihood and LR statistic:
// with logL0 = logL - lr_chi2/2, returns 1 - logL/logL0.
double fit_statistics_consistency(double logL, double lr_chi2);

}  // namespace frontier
