#include "frontier/cli.hpp"

#include "frontier/dataset.hpp"
#include "frontier/dea.hpp"
#include "frontier/errors.hpp"
#include "frontier/pipeline.hpp"
#include "frontier/stats.hpp"
#include "frontier/synthetic.hpp"
#include "frontier/tobit.hpp"

#include <CLI11.hpp>
#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace frontier {

namespace {

struct DataArgs {
  std::string input;
  std::string schema;
  std::string output_dir;
  unsigned threads = 0;  // 0: available parallelism
};

void add_data_options(CLI::App* cmd, DataArgs& a) {
  cmd->add_option("input", a.input, "input CSV file")->required();
  cmd->add_option("--schema", a.schema,
                  "JSON file mapping column names to roles "
                  "(identifier|input|output|explanatory|group)")
      ->required();
  cmd->add_option("-o,--output-dir", a.output_dir,
                  "directory for result files; without it, results go to "
                  "stdout")
      ->envname("FRONTIER_OUTPUT_DIR");
  cmd->add_option("--threads", a.threads,
                  "worker cap for per-unit solves (0 = all cores)")
      ->envname("FRONTIER_THREADS");
}

void add_dea_options(CLI::App* cmd, DeaModel& model, bool& no_slack) {
  const std::map<std::string, ReturnsToScale> rts_values{
      {"crs", ReturnsToScale::CRS}, {"vrs", ReturnsToScale::VRS}};
  const std::map<std::string, Orientation> orient_values{
      {"input", Orientation::Input}, {"output", Orientation::Output}};
  cmd->add_option("--rts", model.rts, "returns to scale")
      ->transform(CLI::CheckedTransformer(rts_values, CLI::ignore_case))
      ->default_str("vrs");
  cmd->add_option("--orientation", model.orientation, "model orientation")
      ->transform(CLI::CheckedTransformer(orient_values, CLI::ignore_case))
      ->default_str("input");
  cmd->add_flag("--no-slack-phase", no_slack,
                "skip the second-phase slack maximization");
}

// --model name=col1,col2,...  (repeatable)
std::vector<ModelSpec> parse_model_specs(const std::vector<std::string>& raw) {
  std::vector<ModelSpec> out;
  for (const std::string& text : raw) {
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= text.size()) {
      throw CLI::ValidationError(
          "--model", "expected name=col1,col2,... but got '" + text + "'");
    }
    ModelSpec m;
    m.name = text.substr(0, eq);
    std::size_t start = eq + 1;
    while (start <= text.size()) {
      std::size_t comma = text.find(',', start);
      if (comma == std::string::npos) comma = text.size();
      const std::string col = text.substr(start, comma - start);
      if (col.empty()) {
        throw CLI::ValidationError(
            "--model", "empty column name in '" + text + "'");
      }
      m.covariates.push_back(col);
      start = comma + 1;
    }
    out.push_back(std::move(m));
  }
  return out;
}

Dataset load_dataset(const DataArgs& a) {
  return parse_csv(a.input, schema_from_file(a.schema));
}

void emit(const DataArgs& a, const std::string& filename,
          const std::string& content) {
  if (a.output_dir.empty()) {
    std::cout << content;
    return;
  }
  std::error_code ec;
  std::filesystem::create_directories(a.output_dir, ec);
  if (ec) {
    throw ValidationError("cannot create output directory '" + a.output_dir +
                          "': " + ec.message());
  }
  write_file((std::filesystem::path(a.output_dir) / filename).string(),
             content);
}

int cmd_describe(const DataArgs& a) {
  const Dataset ds = load_dataset(a);
  emit(a, "descriptives.csv", render_descriptives_csv(describe(ds)));
  return 0;
}

int cmd_dea(const DataArgs& a, const TwoStageConfig& cfg_in) {
  // A score-only run is the two-stage pipeline with no regression models:
  // same tables, same layout, nothing fitted.
  TwoStageConfig cfg = cfg_in;
  cfg.models.clear();
  cfg.threads = a.threads;
  cfg.output_dir = a.output_dir;
  const Report rep = two_stage(load_dataset(a), cfg);
  if (a.output_dir.empty()) std::cout << render_scores_csv(rep);
  return 0;
}

int cmd_tobit(const DataArgs& a, const std::vector<std::string>& raw_models,
              const std::string& response, double lower,
              std::optional<double> upper) {
  const std::vector<ModelSpec> models = parse_model_specs(raw_models);
  const Dataset ds = load_dataset(a);

  if (!ds.has_column(response)) {
    throw ValidationError("response column '" + response +
                          "' is not in the dataset");
  }
  const Column& resp = ds.column(response);
  if (resp.role == VariableRole::Group) {
    throw ValidationError("response column '" + response +
                          "' is a group label, not numeric");
  }

  for (const ModelSpec& m : models) {
    std::vector<const Column*> cols;
    for (const std::string& name : m.covariates) {
      if (!ds.has_column(name)) {
        throw ValidationError("model '" + m.name + "': covariate '" + name +
                              "' is not a dataset column");
      }
      const Column& c = ds.column(name);
      if (c.role != VariableRole::Explanatory &&
          c.role != VariableRole::Input) {
        throw ValidationError("model '" + m.name + "': covariate '" + name +
                              "' has role " + role_name(c.role) +
                              ", expected Explanatory or Input");
      }
      cols.push_back(&c);
    }

    std::vector<std::size_t> rows;
    std::vector<std::string> dropped;
    for (std::size_t i = 0; i < ds.n(); ++i) {
      bool complete = std::isfinite(resp.values[i]);
      for (const Column* c : cols) complete = complete && std::isfinite(c->values[i]);
      if (complete) {
        rows.push_back(i);
      } else {
        dropped.push_back(ds.dmu_names()[i]);
      }
    }

    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(cols.size()));
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t j = 0; j < cols.size(); ++j) {
        X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
            cols[j]->values[rows[r]];
      }
      y(static_cast<Eigen::Index>(r)) = resp.values[rows[r]];
    }

    TobitSpec spec;
    spec.lower = lower;
    if (upper) spec.upper = *upper;

    Stage2Result result;
    result.model_name = m.name;
    result.covariates = m.covariates;
    result.dropped_dmus = std::move(dropped);
    try {
      result.fit = fit(X, y, spec, m.covariates);
    } catch (const ValidationError& e) {
      throw ValidationError("model '" + m.name + "': " + e.what());
    }
    if (!result.fit.converged) {
      throw NotConverged("model '" + m.name +
                         "': likelihood maximization did not converge");
    }

    std::string table = render_tobit_csv(result);
    if (a.output_dir.empty() && models.size() > 1) {
      table = "# model: " + m.name + "\n" + table;
    }
    emit(a, "tobit_" + m.name + ".csv", table);
  }
  return 0;
}

int cmd_two_stage(const DataArgs& a, TwoStageConfig cfg,
                  const std::vector<std::string>& raw_models) {
  cfg.models = parse_model_specs(raw_models);
  cfg.threads = a.threads;
  cfg.output_dir = a.output_dir;
  const Report rep = two_stage(load_dataset(a), cfg);
  if (a.output_dir.empty()) {
    std::cout << render_report_json(rep).dump(2) << "\n";
  }
  return 0;
}

int cmd_synth(std::size_t n, std::size_t m, std::size_t s, std::size_t p,
              std::uint64_t seed, const std::string& output_dir) {
  const Dataset ds = generate_synthetic(n, m, s, p, seed);
  if (output_dir.empty()) {
    std::cout << ds.to_csv();
    return 0;
  }
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec) {
    throw ValidationError("cannot create output directory '" + output_dir +
                          "': " + ec.message());
  }
  const std::filesystem::path base(output_dir);
  write_file((base / "data.csv").string(), ds.to_csv());

  nlohmann::ordered_json schema;
  schema["dmu"] = role_name(VariableRole::Identifier);
  for (const std::string& name : ds.input_names()) {
    schema[name] = role_name(VariableRole::Input);
  }
  for (const std::string& name : ds.output_names()) {
    schema[name] = role_name(VariableRole::Output);
  }
  for (const Column* c : ds.columns_with_role(VariableRole::Explanatory)) {
    schema[c->name] = role_name(VariableRole::Explanatory);
  }
  if (ds.group_column() != nullptr) {
    schema[ds.group_column()->name] = role_name(VariableRole::Group);
  }
  write_file((base / "schema.json").string(), schema.dump(2) + "\n");
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Two-stage frontier efficiency analysis"};
  app.set_version_flag("--version", std::string("frontier ") + kVersion);
  app.require_subcommand(1);

  DataArgs describe_args;
  CLI::App* describe_cmd =
      app.add_subcommand("describe", "descriptive statistics per column");
  add_data_options(describe_cmd, describe_args);

  DataArgs dea_args;
  TwoStageConfig dea_cfg;
  bool dea_no_slack = false;
  CLI::App* dea_cmd =
      app.add_subcommand("dea", "envelopment efficiency scores and peers");
  add_data_options(dea_cmd, dea_args);
  add_dea_options(dea_cmd, dea_cfg.dea, dea_no_slack);

  DataArgs tobit_args;
  std::vector<std::string> tobit_models;
  std::string tobit_response;
  double tobit_lower = 0.0;
  std::optional<double> tobit_upper;
  CLI::App* tobit_cmd =
      app.add_subcommand("tobit", "censored maximum-likelihood regression");
  add_data_options(tobit_cmd, tobit_args);
  tobit_cmd
      ->add_option("--model", tobit_models,
                   "regression spec name=col1,col2,... (repeatable)")
      ->required();
  tobit_cmd->add_option("--response", tobit_response, "response column")
      ->required();
  tobit_cmd->add_option("--lower", tobit_lower,
                        "lower censoring limit (default 0)");
  double tobit_upper_value = 0.0;
  CLI::Option* upper_opt = tobit_cmd->add_option(
      "--upper", tobit_upper_value, "upper censoring limit (default: none)");

  DataArgs ts_args;
  TwoStageConfig ts_cfg;
  bool ts_no_slack = false;
  std::vector<std::string> ts_models;
  CLI::App* ts_cmd = app.add_subcommand(
      "two-stage", "efficiency scores, then censored regression of the "
                   "scores on explanatory columns");
  add_data_options(ts_cmd, ts_args);
  add_dea_options(ts_cmd, ts_cfg.dea, ts_no_slack);
  ts_cmd
      ->add_option("--model", ts_models,
                   "regression spec name=col1,col2,... (repeatable)")
      ->required();
  const std::map<std::string, ResponseTransform> transform_values{
      {"inefficiency", ResponseTransform::Inefficiency},
      {"efficiency", ResponseTransform::Efficiency}};
  ts_cmd
      ->add_option("--response-transform", ts_cfg.response,
                   "regress 1-score censored at 0, or the score censored "
                   "at 1")
      ->transform(CLI::CheckedTransformer(transform_values, CLI::ignore_case))
      ->default_str("inefficiency");
  std::vector<std::string> ts_formats;
  ts_cmd
      ->add_option("--format", ts_formats,
                   "artifact formats to write (repeatable; default all)")
      ->check(CLI::IsMember({"csv", "json", "markdown"}, CLI::ignore_case));

  std::size_t synth_n = 46, synth_m = 3, synth_s = 5, synth_p = 8;
  std::uint64_t synth_seed = 7;
  std::string synth_out;
  CLI::App* synth_cmd = app.add_subcommand(
      "synth", "deterministic synthetic dataset for exercising the pipeline");
  synth_cmd->add_option("--n", synth_n, "number of units");
  synth_cmd->add_option("--m", synth_m, "number of inputs");
  synth_cmd->add_option("--s", synth_s, "number of outputs");
  synth_cmd->add_option("--p", synth_p, "number of explanatory columns");
  synth_cmd->add_option("--seed", synth_seed, "generator seed");
  synth_cmd
      ->add_option("-o,--output-dir", synth_out,
                   "directory for data.csv and schema.json; without it, the "
                   "CSV goes to stdout")
      ->envname("FRONTIER_OUTPUT_DIR");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);  // prints help or the usage error
    return rc == 0 ? 0 : 2;
  }

  try {
    if (describe_cmd->parsed()) return cmd_describe(describe_args);
    if (dea_cmd->parsed()) {
      dea_cfg.dea.slack_phase = !dea_no_slack;
      return cmd_dea(dea_args, dea_cfg);
    }
    if (tobit_cmd->parsed()) {
      if (upper_opt->count() > 0) tobit_upper = tobit_upper_value;
      return cmd_tobit(tobit_args, tobit_models, tobit_response, tobit_lower,
                       tobit_upper);
    }
    if (ts_cmd->parsed()) {
      ts_cfg.dea.slack_phase = !ts_no_slack;
      if (!ts_formats.empty()) {
        ts_cfg.formats = ReportFormats{false, false, false};
        for (const std::string& f : ts_formats) {
          if (f == "csv") ts_cfg.formats.csv = true;
          if (f == "json") ts_cfg.formats.json = true;
          if (f == "markdown") ts_cfg.formats.markdown = true;
        }
      }
      return cmd_two_stage(ts_args, ts_cfg, ts_models);
    }
    if (synth_cmd->parsed()) {
      return cmd_synth(synth_n, synth_m, synth_s, synth_p, synth_seed,
                       synth_out);
    }
    std::cerr << "error: no subcommand selected\n";
    return 2;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace frontier
