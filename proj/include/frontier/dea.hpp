#pragma once

#include "frontier/dataset.hpp"
#include "frontier/lp.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace frontier {

enum class ReturnsToScale { CRS, VRS };
enum class Orientation { Input, Output };

std::string rts_name(ReturnsToScale rts);
std::string orientation_name(Orientation o);

struct DeaModel {
  ReturnsToScale rts = ReturnsToScale::VRS;
  Orientation orientation = Orientation::Input;
  bool slack_phase = true;
};

// Weights of the ratio-form model, recovered from the envelopment LP's dual
// vector. Input orientation: u'y_k + u0 = theta and v'x_k = 1. Output
// orientation: v'x_k + u0 = phi and u'y_k = 1. u0 is 0 under CRS.
struct MultiplierWeights {
  Eigen::VectorXd u;  // output weights, length s, >= 0
  Eigen::VectorXd v;  // input weights, length m, >= 0
  double u0 = 0.0;
};

struct DeaResult {
  std::string dmu;
  // Radial score on (0, 1] for both orientations; under output orientation
  // this is 1/phi. radial_factor keeps the raw LP optimum: the contraction
  // theta under input orientation, the expansion phi under output.
  double theta = 1.0;
  double radial_factor = 1.0;
  Eigen::VectorXd lambdas;        // intensity weights, length n
  std::vector<std::pair<std::string, double>> peers;  // lambda > lambda_tol
  Eigen::VectorXd input_slacks;   // length m, >= 0
  Eigen::VectorXd output_slacks;  // length s, >= 0
  bool radially_efficient = false;
  bool pareto_efficient = false;  // radial and every slack at zero
  MultiplierWeights weights;
};

struct DeaRun {
  DeaModel model;
  std::vector<DeaResult> results;         // dataset row order
  std::vector<int> peer_counts;           // references by OTHER DMUs
  double mean_theta = 0.0;
  std::size_t efficient_count = 0;        // radial criterion
  double efficient_share = 0.0;
};

// Classification tolerances, shared with the report layer.
inline constexpr double kLambdaTol = 1e-6;   // peer membership
inline constexpr double kThetaTol = 1e-6;    // efficiency flag

// Phase-1 envelopment LP for DMU k. Input orientation: variables
// (theta, lambda_1..lambda_n), minimize theta subject to
//   sum_j lambda_j x_ij <= theta x_ik   (each input i)
//   sum_j lambda_j y_rj >= y_rk         (each output r)
//   sum_j lambda_j = 1                  (VRS only)
// Output orientation mirrors with maximize phi.
LinearProgram build_envelopment_lp(std::size_t k, const Dataset& ds, const DeaModel& model);

// Solves phase 1 for the radial factor, then (if slack_phase) re-solves with
// the factor pinned while maximizing total slack, so weakly efficient units
// are separated from Pareto-efficient ones.
DeaResult solve_dmu(std::size_t k, const Dataset& ds, const DeaModel& model);

// Scores every DMU. Per-DMU solves are independent; with threads > 1 they run
// concurrently and are assembled in dataset row order, so output is identical
// for any thread count. threads == 0 picks hardware concurrency.
DeaRun run_all(const Dataset& ds, const DeaModel& model, unsigned threads = 1);

// SE_j = theta_CRS,j / theta_VRS,j. Both runs must cover the same DMUs in the
// same order under the same orientation.
std::vector<double> scale_efficiency(const DeaRun& crs, const DeaRun& vrs);

}  // namespace frontier
