#include <doctest.h>

#include "frontier/dea.hpp"
#include "frontier/errors.hpp"
#include "testutil.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace frontier;

namespace {

Dataset matrix_dataset(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  const std::size_t n = static_cast<std::size_t>(X.rows());
  std::vector<std::string> names(n);
  for (std::size_t i = 0; i < n; ++i) names[i] = "d" + std::to_string(i);
  std::vector<Column> cols;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    Column c{"x" + std::to_string(j), VariableRole::Input, {}, {}};
    for (Eigen::Index i = 0; i < X.rows(); ++i) c.values.push_back(X(i, j));
    cols.push_back(std::move(c));
  }
  for (Eigen::Index j = 0; j < Y.cols(); ++j) {
    Column c{"y" + std::to_string(j), VariableRole::Output, {}, {}};
    for (Eigen::Index i = 0; i < Y.rows(); ++i) c.values.push_back(Y(i, j));
    cols.push_back(std::move(c));
  }
  return Dataset(names, cols);
}

Dataset random_dataset(std::mt19937_64& rng, int max_n = 10, int max_m = 3, int max_s = 3) {
  const int n = testutil::uniform_int(rng, 2, max_n);
  const int m = testutil::uniform_int(rng, 1, max_m);
  const int s = testutil::uniform_int(rng, 1, max_s);
  Eigen::MatrixXd X(n, m), Y(n, s);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) X(i, j) = testutil::uniform(rng, 0.5, 10.0);
    for (int j = 0; j < s; ++j) Y(i, j) = testutil::uniform(rng, 0.5, 10.0);
  }
  return matrix_dataset(X, Y);
}

bool same_result(const DeaResult& a, const DeaResult& b) {
  return a.dmu == b.dmu && a.theta == b.theta && a.radial_factor == b.radial_factor &&
         a.lambdas == b.lambdas && a.peers == b.peers &&
         a.input_slacks == b.input_slacks && a.output_slacks == b.output_slacks &&
         a.radially_efficient == b.radially_efficient &&
         a.pareto_efficient == b.pareto_efficient;
}

}  // namespace

TEST_SUITE("dea") {

TEST_CASE("envelopment dimensions: VRS adds the convexity row") {
  Eigen::MatrixXd X(2, 1), Y(2, 1);
  X << 2, 4;
  Y << 2, 2;
  Dataset ds = matrix_dataset(X, Y);

  DeaModel vrs{ReturnsToScale::VRS, Orientation::Input, true};
  LinearProgram lp = build_envelopment_lp(0, ds, vrs);
  CHECK(lp.num_vars() == 3);
  CHECK(lp.num_constraints() == 3);

  DeaModel crs{ReturnsToScale::CRS, Orientation::Input, true};
  LinearProgram lp2 = build_envelopment_lp(0, ds, crs);
  CHECK(lp2.num_vars() == 3);
  CHECK(lp2.num_constraints() == 2);
}

TEST_CASE("single DMU is its own frontier") {
  Eigen::MatrixXd X(1, 2), Y(1, 1);
  X << 3, 4;
  Y << 2;
  Dataset ds = matrix_dataset(X, Y);
  for (auto rts : {ReturnsToScale::CRS, ReturnsToScale::VRS}) {
    DeaResult r = solve_dmu(0, ds, DeaModel{rts, Orientation::Input, true});
    CHECK(r.theta == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.radially_efficient);
    CHECK(r.pareto_efficient);
    REQUIRE(r.peers.size() == 1);
    CHECK(r.peers[0].first == "d0");
    CHECK(r.peers[0].second == 1.0);
    CHECK(r.input_slacks.maxCoeff() == 0.0);
    CHECK(r.output_slacks.maxCoeff() == 0.0);
  }
}

TEST_CASE("CRS hand instance: dominated unit contracts to the frontier") {
  // A produces y=2 from x=2; B produces y=2 from x=4, so B's inputs shrink
  // by half onto A.
  Eigen::MatrixXd X(2, 1), Y(2, 1);
  X << 2, 4;
  Y << 2, 2;
  Dataset ds = matrix_dataset(X, Y);
  DeaModel model{ReturnsToScale::CRS, Orientation::Input, true};

  DeaResult a = solve_dmu(0, ds, model);
  CHECK(a.theta == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(a.pareto_efficient);

  DeaResult b = solve_dmu(1, ds, model);
  CHECK(b.theta == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(!b.radially_efficient);
  REQUIRE(b.peers.size() == 1);
  CHECK(b.peers[0].first == "d0");
  CHECK(b.peers[0].second == doctest::Approx(1.0).epsilon(1e-9));

  DeaRun run = run_all(ds, model);
  CHECK(run.peer_counts[0] == 1);
  CHECK(run.peer_counts[1] == 0);
  CHECK(run.mean_theta == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(run.efficient_count == 1);
  CHECK(run.efficient_share == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("VRS hand instance: convex hull peer") {
  // B reaches C's output level 4 using input 3, so C contracts to 3/6.
  Eigen::MatrixXd X(3, 1), Y(3, 1);
  X << 2, 3, 6;
  Y << 1, 4, 4;
  Dataset ds = matrix_dataset(X, Y);
  DeaModel model{ReturnsToScale::VRS, Orientation::Input, true};

  DeaResult c = solve_dmu(2, ds, model);
  CHECK(c.theta == doctest::Approx(0.5).epsilon(1e-9));
  REQUIRE(c.peers.size() == 1);
  CHECK(c.peers[0].first == "d1");
  CHECK(c.peers[0].second == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(c.lambdas.sum() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("identical DMUs are all efficient") {
  Eigen::MatrixXd X(3, 2), Y(3, 1);
  X << 2, 3, 2, 3, 2, 3;
  Y << 5, 5, 5;
  Dataset ds = matrix_dataset(X, Y);
  for (auto rts : {ReturnsToScale::CRS, ReturnsToScale::VRS}) {
    DeaRun run = run_all(ds, DeaModel{rts, Orientation::Input, true});
    CHECK(run.efficient_share == 1.0);
    for (const auto& r : run.results) CHECK(r.theta == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("dea requires at least one input and one output") {
  std::vector<Column> cols;
  cols.push_back({"x0", VariableRole::Input, {1.0, 2.0}, {}});
  Dataset no_output({"a", "b"}, cols);
  CHECK_THROWS_AS(run_all(no_output, DeaModel{}), SchemaMismatch);
  CHECK_THROWS_AS(solve_dmu(0, no_output, DeaModel{}), SchemaMismatch);
}

TEST_CASE("dmu index bounds checked") {
  Eigen::MatrixXd X(2, 1), Y(2, 1);
  X << 1, 2;
  Y << 1, 2;
  Dataset ds = matrix_dataset(X, Y);
  CHECK_THROWS_AS(solve_dmu(2, ds, DeaModel{}), DimensionMismatch);
  CHECK_THROWS_AS(build_envelopment_lp(5, ds, DeaModel{}), DimensionMismatch);
}

TEST_CASE("property: scores lie in (0,1], weights and slacks nonnegative") {
  std::mt19937_64 rng(0xdea0001ULL);
  for (int rep = 0; rep < 25; ++rep) {
    Dataset ds = random_dataset(rng);
    for (auto rts : {ReturnsToScale::CRS, ReturnsToScale::VRS}) {
      for (auto orient : {Orientation::Input, Orientation::Output}) {
        DeaRun run = run_all(ds, DeaModel{rts, orient, true});
        for (const auto& r : run.results) {
          CHECK(r.theta > 0.0);
          CHECK(r.theta <= 1.0 + 1e-9);
          CHECK(r.lambdas.minCoeff() >= -1e-9);
          CHECK(r.input_slacks.minCoeff() >= -1e-9);
          CHECK(r.output_slacks.minCoeff() >= -1e-9);
          CHECK(r.weights.u.minCoeff() >= -1e-9);
          CHECK(r.weights.v.minCoeff() >= -1e-9);
        }
      }
    }
  }
}

TEST_CASE("property: envelopment and multiplier objectives agree") {
  std::mt19937_64 rng(0xdea0002ULL);
  for (int rep = 0; rep < 30; ++rep) {
    Dataset ds = random_dataset(rng);
    const Eigen::MatrixXd X = ds.input_matrix();
    const Eigen::MatrixXd Y = ds.output_matrix();
    for (auto rts : {ReturnsToScale::CRS, ReturnsToScale::VRS}) {
      DeaRun run = run_all(ds, DeaModel{rts, Orientation::Input, true});
      for (std::size_t k = 0; k < ds.n(); ++k) {
        const DeaResult& r = run.results[k];
        const Eigen::Index ki = static_cast<Eigen::Index>(k);
        const double multiplier_obj =
            r.weights.u.dot(Y.row(ki).transpose()) + r.weights.u0;
        CHECK(std::abs(multiplier_obj - r.radial_factor) <= 1e-7);
        // Ratio-form normalization for the evaluated unit.
        CHECK(std::abs(r.weights.v.dot(X.row(ki).transpose()) - 1.0) <= 1e-7);
      }
    }
  }
}

TEST_CASE("property: output orientation duality") {
  std::mt19937_64 rng(0xdea0003ULL);
  for (int rep = 0; rep < 15; ++rep) {
    Dataset ds = random_dataset(rng);
    const Eigen::MatrixXd X = ds.input_matrix();
    const Eigen::MatrixXd Y = ds.output_matrix();
    for (auto rts : {ReturnsToScale::CRS, ReturnsToScale::VRS}) {
      DeaRun run = run_all(ds, DeaModel{rts, Orientation::Output, true});
      for (std::size_t k = 0; k < ds.n(); ++k) {
        const DeaResult& r = run.results[k];
        const Eigen::Index ki = static_cast<Eigen::Index>(k);
        CHECK(std::abs(r.weights.v.dot(X.row(ki).transpose()) + r.weights.u0 -
                       r.radial_factor) <= 1e-7);
        CHECK(std::abs(r.weights.u.dot(Y.row(ki).transpose()) - 1.0) <= 1e-7);
      }
    }
  }
}

TEST_CASE("property: units invariance") {
  std::mt19937_64 rng(0xdea0004ULL);
  for (int rep = 0; rep < 12; ++rep) {
    Dataset ds = random_dataset(rng, 8, 3, 3);
    Eigen::MatrixXd X = ds.input_matrix();
    Eigen::MatrixXd Y = ds.output_matrix();

    const int xcol = testutil::uniform_int(rng, 0, static_cast<int>(X.cols()) - 1);
    const int ycol = testutil::uniform_int(rng, 0, static_cast<int>(Y.cols()) - 1);
    Eigen::MatrixXd X2 = X;
    Eigen::MatrixXd Y2 = Y;
    X2.col(xcol) *= 3.7;
    Y2.col(ycol) *= 0.021;
    Dataset scaled = matrix_dataset(X2, Y2);

    for (auto rts : {ReturnsToScale::CRS, ReturnsToScale::VRS}) {
      for (auto orient : {Orientation::Input, Orientation::Output}) {
        DeaRun base = run_all(ds, DeaModel{rts, orient, true});
        DeaRun after = run_all(scaled, DeaModel{rts, orient, true});
        for (std::size_t k = 0; k < ds.n(); ++k)
          CHECK(std::abs(base.results[k].theta - after.results[k].theta) <= 1e-9);
      }
    }
  }
}

TEST_CASE("property: VRS scores dominate CRS scores") {
  std::mt19937_64 rng(0xdea0005ULL);
  for (int rep = 0; rep < 20; ++rep) {
    Dataset ds = random_dataset(rng);
    for (auto orient : {Orientation::Input, Orientation::Output}) {
      DeaRun crs = run_all(ds, DeaModel{ReturnsToScale::CRS, orient, true});
      DeaRun vrs = run_all(ds, DeaModel{ReturnsToScale::VRS, orient, true});
      for (std::size_t k = 0; k < ds.n(); ++k)
        CHECK(vrs.results[k].theta >= crs.results[k].theta - 1e-9);
    }
  }
}

TEST_CASE("property: adding a DMU never lifts an existing score") {
  std::mt19937_64 rng(0xdea0006ULL);
  for (int rep = 0; rep < 12; ++rep) {
    const int n = testutil::uniform_int(rng, 2, 8);
    const int m = testutil::uniform_int(rng, 1, 3);
    const int s = testutil::uniform_int(rng, 1, 3);
    Eigen::MatrixXd X(n + 1, m), Y(n + 1, s);
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j < m; ++j) X(i, j) = testutil::uniform(rng, 0.5, 10.0);
      for (int j = 0; j < s; ++j) Y(i, j) = testutil::uniform(rng, 0.5, 10.0);
    }
    Dataset smaller = matrix_dataset(X.topRows(n), Y.topRows(n));
    Dataset larger = matrix_dataset(X, Y);
    for (auto rts : {ReturnsToScale::CRS, ReturnsToScale::VRS}) {
      DeaRun before = run_all(smaller, DeaModel{rts, Orientation::Input, true});
      DeaRun after = run_all(larger, DeaModel{rts, Orientation::Input, true});
      for (int k = 0; k < n; ++k)
        CHECK(after.results[k].theta <= before.results[k].theta + 1e-9);
    }
  }
}

TEST_CASE("property: every run has an efficient DMU and VRS intensities sum to one") {
  std::mt19937_64 rng(0xdea0007ULL);
  for (int rep = 0; rep < 20; ++rep) {
    Dataset ds = random_dataset(rng);
    for (auto rts : {ReturnsToScale::CRS, ReturnsToScale::VRS}) {
      DeaRun run = run_all(ds, DeaModel{rts, Orientation::Input, true});
      CHECK(run.efficient_count >= 1);
      if (rts == ReturnsToScale::VRS)
        for (const auto& r : run.results)
          CHECK(r.lambdas.sum() == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("property: composite dominates scaled unit up to slacks") {
  std::mt19937_64 rng(0xdea0008ULL);
  for (int rep = 0; rep < 15; ++rep) {
    Dataset ds = random_dataset(rng);
    const Eigen::MatrixXd X = ds.input_matrix();
    const Eigen::MatrixXd Y = ds.output_matrix();
    for (auto rts : {ReturnsToScale::CRS, ReturnsToScale::VRS}) {
      DeaRun run = run_all(ds, DeaModel{rts, Orientation::Input, true});
      for (std::size_t k = 0; k < ds.n(); ++k) {
        const DeaResult& r = run.results[k];
        const Eigen::Index ki = static_cast<Eigen::Index>(k);
        const Eigen::VectorXd in_residual = r.radial_factor * X.row(ki).transpose() -
                                            X.transpose() * r.lambdas - r.input_slacks;
        const Eigen::VectorXd out_residual =
            Y.transpose() * r.lambdas - r.output_slacks - Y.row(ki).transpose();
        CHECK(in_residual.cwiseAbs().maxCoeff() <= 1e-8);
        CHECK(out_residual.cwiseAbs().maxCoeff() <= 1e-8);
      }
    }
  }
}

TEST_CASE("property: pareto-efficient units reference only themselves") {
  std::mt19937_64 rng(0xdea0009ULL);
  for (int rep = 0; rep < 15; ++rep) {
    Dataset ds = random_dataset(rng);
    DeaRun run = run_all(ds, DeaModel{ReturnsToScale::VRS, Orientation::Input, true});
    for (std::size_t k = 0; k < ds.n(); ++k) {
      const DeaResult& r = run.results[k];
      if (!r.pareto_efficient) continue;
      REQUIRE(r.peers.size() == 1);
      CHECK(r.peers[0].first == r.dmu);
      CHECK(r.peers[0].second == 1.0);
    }
  }
}

TEST_CASE("scale efficiency") {
  Eigen::MatrixXd X(3, 1), Y(3, 1);
  X << 2, 3, 6;
  Y << 1, 4, 4;
  Dataset ds = matrix_dataset(X, Y);
  DeaRun crs = run_all(ds, DeaModel{ReturnsToScale::CRS, Orientation::Input, true});
  DeaRun vrs = run_all(ds, DeaModel{ReturnsToScale::VRS, Orientation::Input, true});
  std::vector<double> se = scale_efficiency(crs, vrs);
  REQUIRE(se.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(se[k] ==
          doctest::Approx(crs.results[k].theta / vrs.results[k].theta).epsilon(1e-12));
    CHECK(se[k] <= 1.0 + 1e-9);
    CHECK(se[k] > 0.0);
  }

  // B is the most productive scale: efficient under both models.
  CHECK(crs.results[1].theta == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(se[1] == doctest::Approx(1.0).epsilon(1e-9));

  CHECK_THROWS_AS(scale_efficiency(vrs, crs), DatasetMismatch);
  DeaRun out = run_all(ds, DeaModel{ReturnsToScale::CRS, Orientation::Output, true});
  CHECK_THROWS_AS(scale_efficiency(out, vrs), DatasetMismatch);
}

TEST_CASE("property: scale efficiency never exceeds one") {
  std::mt19937_64 rng(0xdea000aULL);
  for (int rep = 0; rep < 15; ++rep) {
    Dataset ds = random_dataset(rng);
    DeaRun crs = run_all(ds, DeaModel{ReturnsToScale::CRS, Orientation::Input, true});
    DeaRun vrs = run_all(ds, DeaModel{ReturnsToScale::VRS, Orientation::Input, true});
    for (double se : scale_efficiency(crs, vrs)) {
      CHECK(se <= 1.0 + 1e-9);
      CHECK(se > 0.0);
    }
  }
}

TEST_CASE("run_all is deterministic and thread-count invariant") {
  std::mt19937_64 rng(0xdea000bULL);
  Dataset ds = random_dataset(rng, 10, 3, 3);
  const DeaModel model{ReturnsToScale::VRS, Orientation::Input, true};
  DeaRun a = run_all(ds, model, 1);
  DeaRun b = run_all(ds, model, 1);
  DeaRun c = run_all(ds, model, 4);
  REQUIRE(a.results.size() == b.results.size());
  REQUIRE(a.results.size() == c.results.size());
  for (std::size_t k = 0; k < a.results.size(); ++k) {
    CHECK(same_result(a.results[k], b.results[k]));
    CHECK(same_result(a.results[k], c.results[k]));
  }
  CHECK(a.peer_counts == c.peer_counts);
  CHECK(a.mean_theta == c.mean_theta);
}

TEST_CASE("slack phase separates weak efficiency") {
  // d1 matches d0's output with the same first input but more of the second:
  // radially efficient (no proportional contraction reaches d0), yet slack
  // remains on input 2.
  Eigen::MatrixXd X(2, 2), Y(2, 1);
  X << 2, 2, 2, 5;
  Y << 3, 3;
  Dataset ds = matrix_dataset(X, Y);
  DeaModel model{ReturnsToScale::VRS, Orientation::Input, true};
  DeaResult r1 = solve_dmu(1, ds, model);
  CHECK(r1.radially_efficient);
  CHECK(!r1.pareto_efficient);
  CHECK(r1.input_slacks(1) == doctest::Approx(3.0).epsilon(1e-7));

  DeaResult r0 = solve_dmu(0, ds, model);
  CHECK(r0.pareto_efficient);
}

}  // TEST_SUITE
