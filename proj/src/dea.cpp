#include "frontier/dea.hpp"

#include "frontier/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace frontier {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_dea_shape(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  if (X.cols() == 0 || Y.cols() == 0)
    throw SchemaMismatch("DEA needs at least one input and one output column");
}

LinearProgram phase1_lp(std::size_t k, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                        const DeaModel& model) {
  const Eigen::Index n = X.rows(), m = X.cols(), s = Y.cols();
  const bool vrs = model.rts == ReturnsToScale::VRS;
  const Eigen::Index nc = m + s + (vrs ? 1 : 0);

  // Variable 0 is the radial factor, then lambda_1..lambda_n.
  LinearProgram lp = LinearProgram::make(
      model.orientation == Orientation::Input ? Sense::Minimize : Sense::Maximize, n + 1, nc);
  lp.objective(0) = 1.0;
  lp.lower(0) = -kInf;  // factor is pinned by the constraints, not by bounds

  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) lp.constraints(i, 1 + j) = X(j, i);
    lp.relations[i] = Relation::LessEqual;
    if (model.orientation == Orientation::Input) {
      lp.constraints(i, 0) = -X(static_cast<Eigen::Index>(k), i);
      lp.rhs(i) = 0.0;
    } else {
      lp.rhs(i) = X(static_cast<Eigen::Index>(k), i);
    }
  }
  for (Eigen::Index r = 0; r < s; ++r) {
    for (Eigen::Index j = 0; j < n; ++j) lp.constraints(m + r, 1 + j) = Y(j, r);
    lp.relations[m + r] = Relation::GreaterEqual;
    if (model.orientation == Orientation::Input) {
      lp.rhs(m + r) = Y(static_cast<Eigen::Index>(k), r);
    } else {
      lp.constraints(m + r, 0) = -Y(static_cast<Eigen::Index>(k), r);
      lp.rhs(m + r) = 0.0;
    }
  }
  if (vrs) {
    for (Eigen::Index j = 0; j < n; ++j) lp.constraints(m + s, 1 + j) = 1.0;
    lp.relations[m + s] = Relation::Equal;
    lp.rhs(m + s) = 1.0;
  }
  return lp;
}

// Slack-maximization stage: the radial factor is pinned at its optimum and
// total slack is maximized, separating weakly efficient units from
// Pareto-efficient ones. Variables (lambda_1..n, s-_1..m, s+_1..s).
LinearProgram phase2_lp(std::size_t k, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                        const DeaModel& model, double factor) {
  const Eigen::Index n = X.rows(), m = X.cols(), s = Y.cols();
  const bool vrs = model.rts == ReturnsToScale::VRS;
  const double in_scale = model.orientation == Orientation::Input ? factor : 1.0;
  const double out_scale = model.orientation == Orientation::Output ? factor : 1.0;

  LinearProgram lp =
      LinearProgram::make(Sense::Maximize, n + m + s, m + s + (vrs ? 1 : 0));
  for (Eigen::Index t = 0; t < m + s; ++t) lp.objective(n + t) = 1.0;

  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) lp.constraints(i, j) = X(j, i);
    lp.constraints(i, n + i) = 1.0;
    lp.relations[i] = Relation::Equal;
    lp.rhs(i) = in_scale * X(static_cast<Eigen::Index>(k), i);
  }
  for (Eigen::Index r = 0; r < s; ++r) {
    for (Eigen::Index j = 0; j < n; ++j) lp.constraints(m + r, j) = Y(j, r);
    lp.constraints(m + r, n + m + r) = -1.0;
    lp.relations[m + r] = Relation::Equal;
    lp.rhs(m + r) = out_scale * Y(static_cast<Eigen::Index>(k), r);
  }
  if (vrs) {
    for (Eigen::Index j = 0; j < n; ++j) lp.constraints(m + s, j) = 1.0;
    lp.relations[m + s] = Relation::Equal;
    lp.rhs(m + s) = 1.0;
  }
  return lp;
}

MultiplierWeights weights_from_duals(const Eigen::VectorXd& duals, Eigen::Index m,
                                     Eigen::Index s, const DeaModel& model) {
  MultiplierWeights w;
  w.u.resize(s);
  w.v.resize(m);
  const double flip = model.orientation == Orientation::Input ? -1.0 : 1.0;
  for (Eigen::Index i = 0; i < m; ++i) w.v(i) = flip * duals(i);
  for (Eigen::Index r = 0; r < s; ++r) w.u(r) = -flip * duals(m + r);
  // Roundoff can leave weights a hair below zero; genuine violations would
  // break the duality identity and are caught there.
  for (Eigen::Index i = 0; i < m; ++i)
    if (w.v(i) < 0.0 && w.v(i) > -1e-9) w.v(i) = 0.0;
  for (Eigen::Index r = 0; r < s; ++r)
    if (w.u(r) < 0.0 && w.u(r) > -1e-9) w.u(r) = 0.0;
  w.u0 = model.rts == ReturnsToScale::VRS ? duals(m + s) : 0.0;
  return w;
}

DeaResult solve_impl(std::size_t k, const std::vector<std::string>& names,
                     const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                     const DeaModel& model) {
  const Eigen::Index n = X.rows(), m = X.cols(), s = Y.cols();
  const Eigen::Index ki = static_cast<Eigen::Index>(k);

  const LinearProgram lp1 = phase1_lp(k, X, Y, model);
  const LpSolution sol1 = solve(lp1);
  if (sol1.status != LpStatus::Optimal)
    throw InfeasibleModel("envelopment model did not solve to optimality; the dataset "
                          "violates positivity assumptions or is corrupted");

  DeaResult res;
  res.dmu = names[k];
  res.radial_factor = sol1.primal(0);
  res.theta = model.orientation == Orientation::Input ? res.radial_factor
                                                      : 1.0 / res.radial_factor;
  res.radially_efficient = model.orientation == Orientation::Input
                               ? res.radial_factor >= 1.0 - kThetaTol
                               : res.radial_factor <= 1.0 + kThetaTol;
  res.weights = weights_from_duals(sol1.duals, m, s, model);

  if (model.slack_phase) {
    const LpSolution sol2 = solve(phase2_lp(k, X, Y, model, res.radial_factor));
    if (sol2.status != LpStatus::Optimal)
      throw InfeasibleModel("slack stage did not solve to optimality at the radial optimum");
    res.lambdas = sol2.primal.head(n);
    res.input_slacks = sol2.primal.segment(n, m);
    res.output_slacks = sol2.primal.tail(s);
  } else {
    res.lambdas = sol1.primal.tail(n);
    // Residual slacks of the radial solution, clamped against roundoff.
    const double in_scale = model.orientation == Orientation::Input ? res.radial_factor : 1.0;
    const double out_scale = model.orientation == Orientation::Output ? res.radial_factor : 1.0;
    res.input_slacks =
        (in_scale * X.row(ki).transpose() - X.transpose() * res.lambdas).cwiseMax(0.0);
    res.output_slacks =
        (Y.transpose() * res.lambdas - out_scale * Y.row(ki).transpose()).cwiseMax(0.0);
  }

  const double unit_scale = std::max({1.0, X.row(ki).maxCoeff(), Y.row(ki).maxCoeff()});
  const double max_slack =
      std::max(res.input_slacks.size() ? res.input_slacks.maxCoeff() : 0.0,
               res.output_slacks.size() ? res.output_slacks.maxCoeff() : 0.0);
  res.pareto_efficient = res.radially_efficient && max_slack <= kLambdaTol * unit_scale;

  if (res.pareto_efficient) {
    // A Pareto-efficient unit sits on the frontier itself; present it as its
    // own reference point even when alternate optima would express it as a
    // combination of neighbours.
    res.lambdas = Eigen::VectorXd::Zero(n);
    res.lambdas(ki) = 1.0;
    res.input_slacks = Eigen::VectorXd::Zero(m);
    res.output_slacks = Eigen::VectorXd::Zero(s);
    res.peers = {{names[k], 1.0}};
  } else {
    for (Eigen::Index j = 0; j < n; ++j)
      if (res.lambdas(j) > kLambdaTol)
        res.peers.emplace_back(names[static_cast<std::size_t>(j)], res.lambdas(j));
  }
  return res;
}

}  // namespace

std::string rts_name(ReturnsToScale rts) {
  return rts == ReturnsToScale::CRS ? "crs" : "vrs";
}

std::string orientation_name(Orientation o) {
  return o == Orientation::Input ? "input" : "output";
}

LinearProgram build_envelopment_lp(std::size_t k, const Dataset& ds, const DeaModel& model) {
  if (k >= ds.n()) throw DimensionMismatch("DMU index out of range");
  const Eigen::MatrixXd X = ds.input_matrix();
  const Eigen::MatrixXd Y = ds.output_matrix();
  require_dea_shape(X, Y);
  return phase1_lp(k, X, Y, model);
}

DeaResult solve_dmu(std::size_t k, const Dataset& ds, const DeaModel& model) {
  if (k >= ds.n()) throw DimensionMismatch("DMU index out of range");
  const Eigen::MatrixXd X = ds.input_matrix();
  const Eigen::MatrixXd Y = ds.output_matrix();
  require_dea_shape(X, Y);
  return solve_impl(k, ds.dmu_names(), X, Y, model);
}

DeaRun run_all(const Dataset& ds, const DeaModel& model, unsigned threads) {
  const Eigen::MatrixXd X = ds.input_matrix();
  const Eigen::MatrixXd Y = ds.output_matrix();
  require_dea_shape(X, Y);
  const std::size_t n = ds.n();
  const auto& names = ds.dmu_names();

  DeaRun run;
  run.model = model;
  run.results.resize(n);

  unsigned nthreads = threads == 0 ? std::thread::hardware_concurrency() : threads;
  nthreads = std::max(1u, std::min<unsigned>(nthreads, static_cast<unsigned>(n)));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::size_t error_k = 0;
  std::mutex error_mutex;

  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t k = next.fetch_add(1);
      if (k >= n) return;
      try {
        run.results[k] = solve_impl(k, names, X, Y, model);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) {
          error = std::current_exception();
          error_k = k;
        }
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (error) {
    const std::string ctx = "DMU '" + names[error_k] + "': ";
    try {
      std::rethrow_exception(error);
    } catch (const InfeasibleModel& e) {
      throw InfeasibleModel(ctx + e.what());
    } catch (const NumericalError& e) {
      throw NumericalBreakdown(ctx + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(ctx + e.what());
    }
  }

  run.peer_counts.assign(n, 0);
  double total_theta = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const DeaResult& r = run.results[k];
    total_theta += r.theta;
    if (r.radially_efficient) ++run.efficient_count;
    for (Eigen::Index j = 0; j < r.lambdas.size(); ++j)
      if (static_cast<std::size_t>(j) != k && r.lambdas(j) > kLambdaTol)
        ++run.peer_counts[static_cast<std::size_t>(j)];
  }
  run.mean_theta = total_theta / static_cast<double>(n);
  run.efficient_share = static_cast<double>(run.efficient_count) / static_cast<double>(n);
  return run;
}

std::vector<double> scale_efficiency(const DeaRun& crs, const DeaRun& vrs) {
  if (crs.model.rts != ReturnsToScale::CRS || vrs.model.rts != ReturnsToScale::VRS)
    throw DatasetMismatch("scale efficiency needs a CRS run and a VRS run, in that order");
  if (crs.model.orientation != vrs.model.orientation)
    throw DatasetMismatch("scale efficiency runs must share an orientation");
  if (crs.results.size() != vrs.results.size())
    throw DatasetMismatch("scale efficiency runs cover different numbers of DMUs");
  std::vector<double> se(crs.results.size());
  for (std::size_t k = 0; k < se.size(); ++k) {
    if (crs.results[k].dmu != vrs.results[k].dmu)
      throw DatasetMismatch("scale efficiency runs cover different DMUs: '" +
                            crs.results[k].dmu + "' vs '" + vrs.results[k].dmu + "'");
    se[k] = crs.results[k].theta / vrs.results[k].theta;
  }
  return se;
}

}  // namespace frontier
