#pragma once

#include "frontier/dataset.hpp"
#include "frontier/dea.hpp"
#include "frontier/tobit.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace frontier {

inline constexpr const char* kVersion = "1.0.0";

// Stage-2 response built from the stage-1 score: the default regresses
// inefficiency 1 - theta, censored below at 0 (efficient units sit at the
// bound); the alternative regresses theta itself, censored above at 1.
enum class ResponseTransform { Inefficiency, Efficiency };

std::string response_transform_name(ResponseTransform t);

struct ModelSpec {
  std::string name;                      // used in file names: [A-Za-z0-9_-]
  std::vector<std::string> covariates;   // Explanatory or Input columns
};

// Which serializations land in the output directory. meta.json is always
// written: it records how to reproduce the run regardless of format choice.
struct ReportFormats {
  bool csv = true;       // descriptives, scores, peers, groups, tobit_<model>
  bool json = true;      // report.json
  bool markdown = true;  // report.md
};

struct TwoStageConfig {
  DeaModel dea;
  std::vector<ModelSpec> models;
  ResponseTransform response = ResponseTransform::Inefficiency;
  ReportFormats formats;
  unsigned threads = 1;     // stage-1 workers; no effect on results
  std::string output_dir;   // empty: compute only, write no files
};

struct Stage2Result {
  std::string model_name;
  std::vector<std::string> covariates;
  std::vector<std::string> dropped_dmus;  // missing covariate values
  TobitFit fit;
};

struct Report {
  DescriptiveStats descriptives;
  DeaRun dea;
  std::vector<std::string> input_names;
  std::vector<std::string> output_names;
  std::vector<GroupRow> groups;      // empty when the dataset has no groups
  std::vector<double> response;      // stage-2 response, dataset row order
  std::vector<Stage2Result> tobit;
  std::uint64_t config_hash = 0;
};

// Response for one score; scores within the efficiency tolerance of 1 are
// snapped onto the censoring bound exactly.
double stage2_response(double theta, ResponseTransform t);

// FNV-1a fingerprint of the canonical text form of the analysis-affecting
// settings (threads and output paths excluded: they cannot change results).
std::uint64_t config_fingerprint(const TwoStageConfig& cfg);

// Runs the full two-stage analysis. With cfg.output_dir set, artifacts are
// written as each stage completes, so a stage-2 failure still leaves the
// stage-1 tables on disk; the error then propagates with stage context.
// Output is deterministic for identical (ds, cfg) up to the thread count,
// including byte-identical serialized artifacts.
Report two_stage(const Dataset& ds, const TwoStageConfig& cfg);

// Renderers are pure functions of the report: full numeric precision, no
// timestamps. meta.json is the single artifact carrying wall-clock time.
std::string render_descriptives_csv(const DescriptiveStats& stats);
std::string render_descriptives_csv(const Report& rep);
std::string render_scores_csv(const Report& rep);
std::string render_peer_counts_csv(const Report& rep);
std::string render_groups_csv(const Report& rep);
std::string render_tobit_csv(const Stage2Result& model);
nlohmann::ordered_json render_report_json(const Report& rep);
std::string render_report_md(const Report& rep);
nlohmann::ordered_json render_meta_json(const TwoStageConfig& cfg,
                                        const std::string& generated_at);

// Current UTC wall clock, ISO-8601; isolated so everything else stays
// reproducible.
std::string iso8601_utc_now();

void write_file(const std::string& path, const std::string& content);

}  // namespace frontier
