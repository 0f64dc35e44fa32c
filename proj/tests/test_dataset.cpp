#include <doctest.h>

#include "frontier/dataset.hpp"
#include "frontier/errors.hpp"
#include "testutil.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace frontier;

namespace {

const char* kSmallCsv =
    "country,HBP,NMN\n"
    "alpha,10,0.5\n"
    "beta,20,0.8\n"
    "gamma,15,0.6\n";

Schema small_schema() {
  return Schema{{"country", VariableRole::Identifier},
                {"HBP", VariableRole::Input},
                {"NMN", VariableRole::Output}};
}

bool same_values(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) != std::isnan(b[i])) return false;
    if (!std::isnan(a[i]) && a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("minimal well-formed csv parses") {
  Dataset ds = parse_csv_text(kSmallCsv, small_schema());
  CHECK(ds.n() == 3);
  CHECK(ds.dmu_names() == std::vector<std::string>{"alpha", "beta", "gamma"});
  CHECK(ds.input_names() == std::vector<std::string>{"HBP"});
  CHECK(ds.output_names() == std::vector<std::string>{"NMN"});
  CHECK(ds.input_matrix()(1, 0) == 20.0);
  CHECK(ds.output_matrix()(2, 0) == 0.6);
}

TEST_CASE("non-numeric cell names row and column") {
  const char* text =
      "country,HBP,NMN\n"
      "alpha,abc,0.5\n";
  try {
    parse_csv_text(text, small_schema());
    FAIL("expected NonNumericCell");
  } catch (const NonNumericCell& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 1") != std::string::npos);
    CHECK(msg.find("HBP") != std::string::npos);
    CHECK(msg.find("abc") != std::string::npos);
  }
}

TEST_CASE("zero input rejected") {
  const char* text =
      "country,HBP,NMN\n"
      "alpha,0.0,0.5\n";
  CHECK_THROWS_AS(parse_csv_text(text, small_schema()), NonPositiveInputOutput);
}

TEST_CASE("negative and non-finite inputs rejected") {
  CHECK_THROWS_AS(parse_csv_text("country,HBP,NMN\nalpha,-3,0.5\n", small_schema()),
                  NonPositiveInputOutput);
  CHECK_THROWS_AS(parse_csv_text("country,HBP,NMN\nalpha,inf,0.5\n", small_schema()),
                  NonPositiveInputOutput);
  // magnitude beyond double range cannot be represented: rejected at parse
  CHECK_THROWS_AS(parse_csv_text("country,HBP,NMN\nalpha,1e999,0.5\n", small_schema()),
                  NonNumericCell);
}

TEST_CASE("schema column absent from header") {
  CHECK_THROWS_AS(parse_csv_text("country,HBP\nalpha,10\n", small_schema()), SchemaMismatch);
}

TEST_CASE("duplicate dmu names rejected") {
  const char* text =
      "country,HBP,NMN\n"
      "alpha,10,0.5\n"
      "alpha,20,0.8\n";
  CHECK_THROWS_AS(parse_csv_text(text, small_schema()), DuplicateDmuName);
}

TEST_CASE("empty body rejected") {
  CHECK_THROWS_AS(parse_csv_text("country,HBP,NMN\n", small_schema()), EmptyDataset);
}

TEST_CASE("missing input values listed as a whole-file error") {
  const char* text =
      "country,HBP,NMN\n"
      "alpha,,0.5\n"
      "beta,20,0.8\n"
      "gamma,NA,0.6\n";
  try {
    parse_csv_text(text, small_schema());
    FAIL("expected MissingInputOutput");
  } catch (const MissingInputOutput& e) {
    const std::string msg = e.what();
    CHECK(msg.find("alpha") != std::string::npos);
    CHECK(msg.find("gamma") != std::string::npos);
  }
}

TEST_CASE("missing explanatory values pass through as NaN") {
  Schema schema = small_schema();
  schema["CHE"] = VariableRole::Explanatory;
  const char* text =
      "country,HBP,NMN,CHE\n"
      "alpha,10,0.5,7.5\n"
      "beta,20,0.8,N/A\n";
  Dataset ds = parse_csv_text(text, schema);
  const Column& che = ds.column("CHE");
  CHECK(che.values[0] == 7.5);
  CHECK(std::isnan(che.values[1]));
}

TEST_CASE("columns not named in schema are ignored") {
  const char* text =
      "country,HBP,ignored,NMN\n"
      "alpha,10,whatever,0.5\n";
  Dataset ds = parse_csv_text(text, small_schema());
  CHECK(!ds.has_column("ignored"));
  CHECK(ds.columns().size() == 3);
}

TEST_CASE("group column carries labels") {
  Schema schema = small_schema();
  schema["inc"] = VariableRole::Group;
  const char* text =
      "country,HBP,NMN,inc\n"
      "alpha,10,0.5,LI\n"
      "beta,20,0.8,LMI\n";
  Dataset ds = parse_csv_text(text, schema);
  REQUIRE(ds.group_column() != nullptr);
  CHECK(ds.group_column()->labels == std::vector<std::string>{"LI", "LMI"});
}

TEST_CASE("describe basics") {
  std::vector<Column> cols;
  cols.push_back({"a", VariableRole::Input, {1.0, 2.0, 3.0}, {}});
  cols.push_back({"b", VariableRole::Output, {5.0, 5.0, 5.0}, {}});
  cols.push_back({"c", VariableRole::Explanatory, {2.0, 4.0, 9.0}, {}});
  Dataset ds({"x", "y", "z"}, cols);
  DescriptiveStats st = describe(ds);
  REQUIRE(st.columns.size() == 3);

  CHECK(st.columns[0].mean == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(st.columns[0].min == 1.0);
  CHECK(st.columns[0].max == 3.0);
  CHECK(st.columns[0].count == 3);

  CHECK(st.columns[1].sd == 0.0);

  // sample sd of [2,4,9]: sqrt(((2-5)^2+(4-5)^2+(9-5)^2)/2) = sqrt(13)
  CHECK(st.columns[2].mean == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(st.columns[2].sd == doctest::Approx(std::sqrt(13.0)).epsilon(1e-15));
}

TEST_CASE("describe skips missing values in count and moments") {
  std::vector<Column> cols;
  cols.push_back({"a", VariableRole::Input, {1.0, 2.0}, {}});
  cols.push_back({"z", VariableRole::Explanatory,
                  {4.0, std::numeric_limits<double>::quiet_NaN()}, {}});
  Dataset ds({"x", "y"}, cols);
  DescriptiveStats st = describe(ds);
  const ColumnStats& z = st.columns[1];
  CHECK(z.count == 1);
  CHECK(z.mean == 4.0);
  CHECK(z.min == 4.0);
  CHECK(z.max == 4.0);
}

TEST_CASE("describe invariant: min <= mean <= max") {
  std::mt19937_64 rng(0xda7a5e7ULL);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 1 + static_cast<std::size_t>(testutil::uniform_int(rng, 0, 11));
    std::vector<double> vals(n);
    for (auto& v : vals) v = testutil::uniform(rng, 0.1, 50.0);
    std::vector<std::string> names(n);
    for (std::size_t i = 0; i < n; ++i) names[i] = "d" + std::to_string(i);
    Dataset ds(names, {{"a", VariableRole::Input, vals, {}}});
    const ColumnStats& cs = describe(ds).columns[0];
    CHECK(cs.min <= cs.mean + 1e-12);
    CHECK(cs.mean <= cs.max + 1e-12);
    CHECK(cs.count == n);
  }
}

TEST_CASE("group summary basics") {
  std::vector<Column> cols;
  cols.push_back({"a", VariableRole::Input, {1.0, 1.0, 1.0}, {}});
  cols.push_back({"g", VariableRole::Group, {}, {"A", "A", "B"}});
  Dataset ds({"x", "y", "z"}, cols);
  const std::vector<double> scores{1.0, 0.6, 0.9};
  auto rows = group_summary(ds, scores);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].label == "A");
  CHECK(rows[0].count == 2);
  CHECK(rows[0].mean_score == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(rows[0].members == std::vector<std::string>{"x", "y"});
  CHECK(rows[1].label == "B");
  CHECK(rows[1].count == 1);
  CHECK(rows[1].mean_score == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("group summary single group") {
  std::vector<Column> cols;
  cols.push_back({"a", VariableRole::Input, {1.0, 2.0}, {}});
  cols.push_back({"g", VariableRole::Group, {}, {"g", "g"}});
  Dataset ds({"x", "y"}, cols);
  auto rows = group_summary(ds, std::vector<double>{0.5, 0.7});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].count == 2);
  CHECK(rows[0].mean_score == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("group summary errors") {
  Dataset no_group({"x"}, {{"a", VariableRole::Input, {1.0}, {}}});
  CHECK_THROWS_AS(group_summary(no_group, std::vector<double>{0.5}), NoGroupColumn);

  Dataset with_group({"x"}, {{"g", VariableRole::Group, {}, {"A"}}});
  CHECK_THROWS_AS(group_summary(with_group, std::vector<double>{0.5, 0.6}), LengthMismatch);
}

TEST_CASE("three income-style groups over 46 units partition 22/18/6") {
  const std::size_t n = 46;
  std::vector<std::string> names(n), labels(n);
  std::vector<double> vals(n, 1.0), scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    names[i] = "c" + std::to_string(i);
    labels[i] = i < 22 ? "LI" : (i < 40 ? "LMI" : "HUMI");
    scores[i] = 0.5 + 0.01 * static_cast<double>(i);
  }
  Dataset ds(names, {{"a", VariableRole::Input, vals, {}},
                     {"g", VariableRole::Group, {}, labels}});
  auto rows = group_summary(ds, scores);
  REQUIRE(rows.size() == 3);
  // sorted by label: HUMI, LI, LMI
  CHECK(rows[0].label == "HUMI");
  CHECK(rows[0].count == 6);
  CHECK(rows[1].label == "LI");
  CHECK(rows[1].count == 22);
  CHECK(rows[2].label == "LMI");
  CHECK(rows[2].count == 18);
}

TEST_CASE("property: group means recombine to the score total") {
  std::mt19937_64 rng(0x6e0b5ULL);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 2 + static_cast<std::size_t>(testutil::uniform_int(rng, 0, 30));
    std::vector<std::string> names(n), labels(n);
    std::vector<double> vals(n), scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      names[i] = "d" + std::to_string(i);
      labels[i] = std::string(1, static_cast<char>('A' + testutil::uniform_int(rng, 0, 3)));
      vals[i] = testutil::uniform(rng, 0.5, 9.0);
      scores[i] = testutil::uniform(rng, 0.0, 1.0);
    }
    Dataset ds(names, {{"a", VariableRole::Input, vals, {}},
                       {"g", VariableRole::Group, {}, labels}});
    auto rows = group_summary(ds, scores);
    double recombined = 0.0;
    std::size_t members = 0;
    for (const auto& r : rows) {
      recombined += static_cast<double>(r.count) * r.mean_score;
      members += r.count;
    }
    const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
    CHECK(members == n);
    CHECK(recombined == doctest::Approx(total).epsilon(1e-12));
  }
}

TEST_CASE("property: csv round-trip preserves every value") {
  std::mt19937_64 rng(0x20b1dULL);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 1 + static_cast<std::size_t>(testutil::uniform_int(rng, 0, 14));
    std::vector<std::string> names(n), labels(n);
    std::vector<double> in(n), out(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
      names[i] = "dmu_" + std::to_string(i);
      labels[i] = testutil::uniform01(rng) < 0.5 ? "low" : "high";
      in[i] = testutil::uniform(rng, 1e-3, 1e4);
      out[i] = testutil::uniform(rng, 1e-3, 1e4);
      z[i] = testutil::uniform01(rng) < 0.2 ? std::numeric_limits<double>::quiet_NaN()
                                            : testutil::uniform(rng, -50.0, 50.0);
    }
    std::vector<Column> cols;
    cols.push_back({"id", VariableRole::Identifier, {}, {}});
    cols.push_back({"x1", VariableRole::Input, in, {}});
    cols.push_back({"y1", VariableRole::Output, out, {}});
    cols.push_back({"z1", VariableRole::Explanatory, z, {}});
    cols.push_back({"grp", VariableRole::Group, {}, labels});
    Dataset ds(names, cols);

    Schema schema{{"id", VariableRole::Identifier},
                  {"x1", VariableRole::Input},
                  {"y1", VariableRole::Output},
                  {"z1", VariableRole::Explanatory},
                  {"grp", VariableRole::Group}};
    Dataset back = parse_csv_text(ds.to_csv(), schema);

    REQUIRE(back.n() == ds.n());
    CHECK(back.dmu_names() == ds.dmu_names());
    CHECK(same_values(back.column("x1").values, in));
    CHECK(same_values(back.column("y1").values, out));
    CHECK(same_values(back.column("z1").values, z));
    CHECK(back.column("grp").labels == labels);
  }
}

TEST_CASE("property: describe is permutation invariant") {
  std::mt19937_64 rng(0x9e24aULL);
  const std::size_t n = 12;
  std::vector<std::string> names(n);
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i) {
    names[i] = "d" + std::to_string(i);
    vals[i] = testutil::uniform(rng, 0.5, 20.0);
  }
  Dataset ds(names, {{"a", VariableRole::Input, vals, {}}});
  const ColumnStats base = describe(ds).columns[0];

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  for (int rep = 0; rep < 5; ++rep) {
    // Fisher-Yates with the deterministic generator.
    for (std::size_t i = n - 1; i > 0; --i) {
      const std::size_t j =
          static_cast<std::size_t>(testutil::uniform_int(rng, 0, static_cast<int>(i)));
      std::swap(perm[i], perm[j]);
    }
    std::vector<std::string> pnames(n);
    std::vector<double> pvals(n);
    for (std::size_t i = 0; i < n; ++i) {
      pnames[i] = names[perm[i]];
      pvals[i] = vals[perm[i]];
    }
    const ColumnStats shuffled =
        describe(Dataset(pnames, {{"a", VariableRole::Input, pvals, {}}})).columns[0];
    CHECK(shuffled.mean == doctest::Approx(base.mean).epsilon(1e-14));
    CHECK(shuffled.sd == doctest::Approx(base.sd).epsilon(1e-14));
    CHECK(shuffled.min == base.min);
    CHECK(shuffled.max == base.max);
    CHECK(shuffled.count == base.count);
  }
}

TEST_CASE("schema json parsing") {
  Schema s = schema_from_json(
      R"({"country":"identifier","HBP":"input","NMN":"output","CHE":"explanatory","inc":"group"})");
  CHECK(s.at("country") == VariableRole::Identifier);
  CHECK(s.at("HBP") == VariableRole::Input);
  CHECK(s.at("NMN") == VariableRole::Output);
  CHECK(s.at("CHE") == VariableRole::Explanatory);
  CHECK(s.at("inc") == VariableRole::Group);

  CHECK_THROWS_AS(schema_from_json("not json"), SchemaMismatch);
  CHECK_THROWS_AS(schema_from_json(R"(["a"])"), SchemaMismatch);
  CHECK_THROWS_AS(schema_from_json(R"({"a":"banana"})"), SchemaMismatch);
  CHECK_THROWS_AS(schema_from_json(R"({"a":3})"), SchemaMismatch);
}

TEST_CASE("json exports carry stable keys") {
  std::vector<Column> cols;
  cols.push_back({"a", VariableRole::Input, {1.0, 3.0}, {}});
  cols.push_back({"g", VariableRole::Group, {}, {"A", "B"}});
  Dataset ds({"x", "y"}, cols);

  auto dj = descriptives_to_json(describe(ds));
  REQUIRE(dj.is_array());
  REQUIRE(dj.size() == 1);
  CHECK(dj[0]["column"] == "a");
  CHECK(dj[0]["role"] == "input");
  CHECK(dj[0]["mean"] == doctest::Approx(2.0));

  auto gj = groups_to_json(group_summary(ds, std::vector<double>{0.4, 0.6}));
  REQUIRE(gj.is_array());
  CHECK(gj[0]["group"] == "A");
  CHECK(gj[0]["count"] == 1);
  CHECK(gj[1]["members"][0] == "y");
}

}  // TEST_SUITE
