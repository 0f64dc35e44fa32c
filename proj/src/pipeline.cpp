#include "frontier/pipeline.hpp"

#include "frontier/csv.hpp"
#include "frontier/errors.hpp"
#include "frontier/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace frontier {

namespace {

std::string stage2_context(const std::string& model_name) {
  return "stage 2, model '" + model_name + "': ";
}

void validate_config(const Dataset& ds, const TwoStageConfig& cfg) {
  std::set<std::string> seen;
  for (const ModelSpec& m : cfg.models) {
    if (m.name.empty()) {
      throw ValidationError("stage-2 model with empty name");
    }
    for (char c : m.name) {
      const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '_' || c == '-';
      if (!ok) {
        throw ValidationError("stage-2 model name '" + m.name +
                              "' may only use letters, digits, '_' and '-'");
      }
    }
    if (!seen.insert(m.name).second) {
      throw ValidationError("duplicate stage-2 model name '" + m.name + "'");
    }
    if (m.covariates.empty()) {
      throw ValidationError(stage2_context(m.name) + "empty covariate list");
    }
    for (const std::string& name : m.covariates) {
      if (!ds.has_column(name)) {
        throw ValidationError(stage2_context(m.name) + "covariate '" + name +
                              "' is not a dataset column");
      }
      const VariableRole role = ds.column(name).role;
      if (role != VariableRole::Explanatory && role != VariableRole::Input) {
        throw ValidationError(stage2_context(m.name) + "covariate '" + name +
                              "' has role " + role_name(role) +
                              ", expected Explanatory or Input");
      }
    }
  }
}

Stage2Result fit_stage2_model(const Dataset& ds,
                              const std::vector<double>& response,
                              const ModelSpec& m, const TwoStageConfig& cfg) {
  Stage2Result out;
  out.model_name = m.name;
  out.covariates = m.covariates;

  std::vector<const Column*> cols;
  cols.reserve(m.covariates.size());
  for (const std::string& name : m.covariates) cols.push_back(&ds.column(name));

  // Rows enter the regression only with a complete covariate vector.
  std::vector<std::size_t> rows;
  rows.reserve(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) {
    bool complete = true;
    for (const Column* c : cols) {
      if (!std::isfinite(c->values[i])) {
        complete = false;
        break;
      }
    }
    if (complete) {
      rows.push_back(i);
    } else {
      out.dropped_dmus.push_back(ds.dmu_names()[i]);
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
    y(static_cast<Eigen::Index>(r)) = response[rows[r]];
  }

  TobitSpec spec;
  spec.lower = 0.0;
  if (cfg.response == ResponseTransform::Efficiency) spec.upper = 1.0;

  const std::string ctx = stage2_context(m.name);
  try {
    out.fit = fit(X, y, spec, m.covariates);
  } catch (const AllCensored& e) {
    throw AllCensored(ctx + e.what());
  } catch (const TooFewObservations& e) {
    throw TooFewObservations(ctx + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(ctx + e.what());
  } catch (const NumericalError& e) {
    throw NumericalBreakdown(ctx + e.what());
  }
  if (!out.fit.converged) {
    throw NotConverged(ctx + "likelihood maximization did not converge after " +
                       std::to_string(out.fit.iterations) + " iterations");
  }
  return out;
}

void append_fnv(std::uint64_t& h, std::string_view s) {
  constexpr std::uint64_t kPrime = 1099511628211ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= kPrime;
  }
}

std::string fixed_or_dashes(double v, int decimals) {
  if (!std::isfinite(v)) return "-----";
  return stats::format_fixed(v, decimals);
}

std::string peers_field(const DeaResult& r) {
  std::string out;
  for (std::size_t i = 0; i < r.peers.size(); ++i) {
    if (i) out += ';';
    out += r.peers[i].first;
    out += ':';
    out += stats::format_double(r.peers[i].second);
  }
  return out;
}

}  // namespace

std::string response_transform_name(ResponseTransform t) {
  return t == ResponseTransform::Inefficiency ? "inefficiency" : "efficiency";
}

double stage2_response(double theta, ResponseTransform t) {
  // Scores inside the efficiency tolerance land exactly on the censoring
  // bound so the limit observations are bitwise at the limit.
  const bool at_frontier = theta >= 1.0 - kThetaTol;
  if (t == ResponseTransform::Inefficiency) {
    return at_frontier ? 0.0 : 1.0 - theta;
  }
  return at_frontier ? 1.0 : theta;
}

std::uint64_t config_fingerprint(const TwoStageConfig& cfg) {
  std::uint64_t h = 14695981039346656037ULL;  // FNV-1a offset basis
  append_fnv(h, "v1");
  append_fnv(h, "|rts=");
  append_fnv(h, rts_name(cfg.dea.rts));
  append_fnv(h, "|orientation=");
  append_fnv(h, orientation_name(cfg.dea.orientation));
  append_fnv(h, "|slack_phase=");
  append_fnv(h, cfg.dea.slack_phase ? "1" : "0");
  append_fnv(h, "|response=");
  append_fnv(h, response_transform_name(cfg.response));
  append_fnv(h, "|models=");
  for (const ModelSpec& m : cfg.models) {
    append_fnv(h, m.name);
    append_fnv(h, "{");
    for (std::size_t i = 0; i < m.covariates.size(); ++i) {
      if (i) append_fnv(h, ",");
      append_fnv(h, m.covariates[i]);
    }
    append_fnv(h, "}");
  }
  return h;
}

std::string render_descriptives_csv(const Report& rep) {
  return render_descriptives_csv(rep.descriptives);
}

std::string render_descriptives_csv(const DescriptiveStats& stats) {
  std::string out = "column,role,mean,sd,min,max,count\n";
  for (const ColumnStats& c : stats.columns) {
    out += csv::join_line({csv::escape(c.name), role_name(c.role),
                           stats::format_double(c.mean),
                           stats::format_double(c.sd),
                           stats::format_double(c.min),
                           stats::format_double(c.max),
                           std::to_string(c.count)});
  }
  return out;
}

std::string render_scores_csv(const Report& rep) {
  std::vector<std::string> header = {"dmu",
                                     "theta",
                                     "radial_factor",
                                     "radially_efficient",
                                     "pareto_efficient",
                                     "response",
                                     "peers"};
  for (const std::string& name : rep.input_names) {
    header.push_back("slack_in_" + name);
  }
  for (const std::string& name : rep.output_names) {
    header.push_back("slack_out_" + name);
  }
  std::string out = csv::join_line(header);
  for (std::size_t i = 0; i < rep.dea.results.size(); ++i) {
    const DeaResult& r = rep.dea.results[i];
    std::vector<std::string> fields = {csv::escape(r.dmu),
                                       stats::format_double(r.theta),
                                       stats::format_double(r.radial_factor),
                                       r.radially_efficient ? "1" : "0",
                                       r.pareto_efficient ? "1" : "0",
                                       stats::format_double(rep.response[i]),
                                       csv::escape(peers_field(r))};
    for (Eigen::Index j = 0; j < r.input_slacks.size(); ++j) {
      fields.push_back(stats::format_double(r.input_slacks(j)));
    }
    for (Eigen::Index j = 0; j < r.output_slacks.size(); ++j) {
      fields.push_back(stats::format_double(r.output_slacks(j)));
    }
    out += csv::join_line(fields);
  }
  return out;
}

std::string render_peer_counts_csv(const Report& rep) {
  std::string out = "dmu,peer_count\n";
  for (std::size_t i = 0; i < rep.dea.results.size(); ++i) {
    out += csv::join_line({csv::escape(rep.dea.results[i].dmu),
                           std::to_string(rep.dea.peer_counts[i])});
  }
  return out;
}

std::string render_groups_csv(const Report& rep) {
  std::string out = "group,count,mean_theta,members\n";
  for (const GroupRow& g : rep.groups) {
    std::string members;
    for (std::size_t i = 0; i < g.members.size(); ++i) {
      if (i) members += ';';
      members += g.members[i];
    }
    out += csv::join_line({csv::escape(g.label), std::to_string(g.count),
                           stats::format_double(g.mean_score),
                           csv::escape(members)});
  }
  return out;
}

std::string render_tobit_csv(const Stage2Result& model) {
  std::string out = "variable,coef,std_err,t,p\n";
  auto line = [&out](std::initializer_list<std::string> fields) {
    out += csv::join_line(std::vector<std::string>(fields));
  };
  for (const TobitRow& row : inference_table(model.fit)) {
    if (row.dropped) {
      line({csv::escape(row.name), "-----", "-----", "-----", "-----"});
    } else {
      line({csv::escape(row.name), stats::format_double(row.coef),
            stats::format_double(row.se), stats::format_double(row.t),
            stats::format_double(row.p)});
    }
  }
  const TobitFit& fit = model.fit;
  line({"sigma", stats::format_double(fit.sigma),
        stats::format_double(fit.se_sigma), "", ""});
  line({"LR chi2(" + std::to_string(fit.df) + ")",
        stats::format_double(fit.lr_chi2), "", "", ""});
  line({"Prob > chi2", stats::format_double(fit.prob_chi2), "", "", ""});
  line({"Log likelihood", stats::format_double(fit.logL), "", "", ""});
  line({"Pseudo R2", stats::format_double(fit.pseudo_r2), "", "", ""});
  line({"N", std::to_string(fit.n), "", "", ""});
  line({"N censored", std::to_string(fit.n_censored), "", "", ""});
  line({"N uncensored", std::to_string(fit.n_uncensored), "", "", ""});
  line({"N dropped", std::to_string(model.dropped_dmus.size()), "", "", ""});
  return out;
}

nlohmann::ordered_json render_report_json(const Report& rep) {
  nlohmann::ordered_json j;
  j["version"] = kVersion;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(rep.config_hash));
  j["config_hash"] = hash;

  j["descriptives"] = descriptives_to_json(rep.descriptives);

  nlohmann::ordered_json dea;
  dea["returns_to_scale"] = rts_name(rep.dea.model.rts);
  dea["orientation"] = orientation_name(rep.dea.model.orientation);
  dea["slack_phase"] = rep.dea.model.slack_phase;
  dea["mean_theta"] = rep.dea.mean_theta;
  dea["efficient_count"] = rep.dea.efficient_count;
  dea["efficient_share"] = rep.dea.efficient_share;
  dea["scores"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < rep.dea.results.size(); ++i) {
    const DeaResult& r = rep.dea.results[i];
    nlohmann::ordered_json row;
    row["dmu"] = r.dmu;
    row["theta"] = r.theta;
    row["radial_factor"] = r.radial_factor;
    row["radially_efficient"] = r.radially_efficient;
    row["pareto_efficient"] = r.pareto_efficient;
    row["response"] = rep.response[i];
    row["peers"] = nlohmann::ordered_json::array();
    for (const auto& [peer, weight] : r.peers) {
      row["peers"].push_back({{"dmu", peer}, {"lambda", weight}});
    }
    nlohmann::ordered_json in_slacks;
    for (std::size_t m = 0; m < rep.input_names.size(); ++m) {
      in_slacks[rep.input_names[m]] = r.input_slacks(static_cast<Eigen::Index>(m));
    }
    nlohmann::ordered_json out_slacks;
    for (std::size_t s = 0; s < rep.output_names.size(); ++s) {
      out_slacks[rep.output_names[s]] =
          r.output_slacks(static_cast<Eigen::Index>(s));
    }
    row["input_slacks"] = std::move(in_slacks);
    row["output_slacks"] = std::move(out_slacks);
    dea["scores"].push_back(std::move(row));
  }
  dea["peer_counts"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < rep.dea.results.size(); ++i) {
    dea["peer_counts"].push_back({{"dmu", rep.dea.results[i].dmu},
                                  {"count", rep.dea.peer_counts[i]}});
  }
  j["dea"] = std::move(dea);

  j["groups"] = groups_to_json(rep.groups);

  j["models"] = nlohmann::ordered_json::array();
  for (const Stage2Result& s : rep.tobit) {
    const TobitFit& f = s.fit;
    nlohmann::ordered_json m;
    m["name"] = s.model_name;
    m["covariates"] = s.covariates;
    m["dropped_dmus"] = s.dropped_dmus;
    m["variables"] = nlohmann::ordered_json::array();
    for (const TobitRow& row : inference_table(f)) {
      m["variables"].push_back({{"name", row.name},
                                {"coef", row.coef},
                                {"se", row.se},
                                {"t", row.t},
                                {"p", row.p},
                                {"dropped", row.dropped}});
    }
    m["sigma"] = f.sigma;
    m["se_sigma"] = f.se_sigma;
    m["log_likelihood"] = f.logL;
    m["log_likelihood_null"] = f.logL0;
    m["lr_chi2"] = f.lr_chi2;
    m["df"] = f.df;
    m["prob_chi2"] = f.prob_chi2;
    m["pseudo_r2"] = f.pseudo_r2;
    m["n"] = f.n;
    m["n_censored"] = f.n_censored;
    m["n_uncensored"] = f.n_uncensored;
    m["iterations"] = f.iterations;
    m["dropped_variables"] = nlohmann::ordered_json::array();
    for (const DroppedVariable& d : f.dropped) {
      m["dropped_variables"].push_back({{"name", d.name}, {"reason", d.reason}});
    }
    j["models"].push_back(std::move(m));
  }
  return j;
}

std::string render_report_md(const Report& rep) {
  std::ostringstream md;
  md << "# Two-stage efficiency analysis\n\n";

  md << "## Data\n\n";
  md << "| column | role | mean | sd | min | max | n |\n";
  md << "|---|---|---:|---:|---:|---:|---:|\n";
  for (const ColumnStats& c : rep.descriptives.columns) {
    md << "| " << c.name << " | " << role_name(c.role) << " | "
       << stats::format_fixed(c.mean, 3) << " | " << stats::format_fixed(c.sd, 3)
       << " | " << stats::format_fixed(c.min, 3) << " | "
       << stats::format_fixed(c.max, 3) << " | " << c.count << " |\n";
  }

  md << "\n## Efficiency scores (" << rts_name(rep.dea.model.rts) << ", "
     << orientation_name(rep.dea.model.orientation) << "-oriented)\n\n";
  md << "Mean score " << stats::format_fixed(rep.dea.mean_theta, 3) << "; "
     << rep.dea.efficient_count << " of " << rep.dea.results.size()
     << " units on the frontier ("
     << stats::format_fixed(100.0 * rep.dea.efficient_share, 1) << "%).\n\n";
  md << "| unit | score | efficient | referenced by | peers |\n";
  md << "|---|---:|:---:|---:|---|\n";
  for (std::size_t i = 0; i < rep.dea.results.size(); ++i) {
    const DeaResult& r = rep.dea.results[i];
    std::string peers;
    for (std::size_t p = 0; p < r.peers.size(); ++p) {
      if (p) peers += ", ";
      peers += r.peers[p].first + " (" +
               stats::format_fixed(r.peers[p].second, 3) + ")";
    }
    md << "| " << r.dmu << " | " << stats::format_fixed(r.theta, 3) << " | "
       << (r.radially_efficient ? "yes" : "no") << " | "
       << rep.dea.peer_counts[i] << " | " << peers << " |\n";
  }

  if (!rep.groups.empty()) {
    md << "\n## Group summary\n\n";
    md << "| group | units | mean score |\n";
    md << "|---|---:|---:|\n";
    for (const GroupRow& g : rep.groups) {
      md << "| " << g.label << " | " << g.count << " | "
         << stats::format_fixed(g.mean_score, 3) << " |\n";
    }
  }

  for (const Stage2Result& s : rep.tobit) {
    const TobitFit& f = s.fit;
    md << "\n## Censored regression: " << s.model_name << "\n\n";
    md << "| variable | coefficient | std. err. | t | p |\n";
    md << "|---|---:|---:|---:|---:|\n";
    for (const TobitRow& row : inference_table(f)) {
      if (row.dropped) {
        md << "| " << row.name << " | ----- | ----- | ----- | ----- |\n";
      } else {
        md << "| " << row.name << " | " << stats::format_fixed(row.coef, 7)
           << " | " << stats::format_fixed(row.se, 7) << " | "
           << stats::format_fixed(row.t, 2) << " | "
           << stats::format_fixed(row.p, 3) << " |\n";
      }
    }
    md << "| sigma | " << stats::format_fixed(f.sigma, 7) << " | "
       << stats::format_fixed(f.se_sigma, 7) << " |  |  |\n";
    md << "\n";
    md << "LR chi2(" << f.df << ") = " << stats::format_fixed(f.lr_chi2, 2)
       << ", Prob > chi2 = " << fixed_or_dashes(f.prob_chi2, 4)
       << ", log likelihood = " << stats::format_fixed(f.logL, 6)
       << ", pseudo R2 = " << fixed_or_dashes(f.pseudo_r2, 4) << ".\n";
    md << "N = " << f.n << " (" << f.n_censored << " censored, "
       << f.n_uncensored << " uncensored";
    if (!s.dropped_dmus.empty()) {
      md << ", " << s.dropped_dmus.size() << " units dropped for missing values";
    }
    md << ").\n";
  }
  return md.str();
}

nlohmann::ordered_json render_meta_json(const TwoStageConfig& cfg,
                                        const std::string& generated_at) {
  nlohmann::ordered_json j;
  j["tool"] = "frontier";
  j["version"] = kVersion;
  j["generated_at"] = generated_at;
  nlohmann::ordered_json config;
  config["returns_to_scale"] = rts_name(cfg.dea.rts);
  config["orientation"] = orientation_name(cfg.dea.orientation);
  config["slack_phase"] = cfg.dea.slack_phase;
  config["response"] = response_transform_name(cfg.response);
  config["formats"] = nlohmann::ordered_json::array();
  if (cfg.formats.csv) config["formats"].push_back("csv");
  if (cfg.formats.json) config["formats"].push_back("json");
  if (cfg.formats.markdown) config["formats"].push_back("markdown");
  config["threads"] = cfg.threads;
  config["models"] = nlohmann::ordered_json::array();
  for (const ModelSpec& m : cfg.models) {
    config["models"].push_back({{"name", m.name}, {"covariates", m.covariates}});
  }
  j["config"] = std::move(config);
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(config_fingerprint(cfg)));
  j["config_hash"] = hash;
  j["tolerances"] = {{"lambda_tol", kLambdaTol},
                     {"theta_tol", kThetaTol},
                     {"lp_feasibility", 1e-8},
                     {"lp_duality_gap", 1e-8},
                     {"design_rank_rel_tol", 1e-10},
                     {"ml_gradient_tol", 1e-8}};
  j["p_value_reference"] = "z";
  return j;
}

std::string iso8601_utc_now() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileNotFound("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw FileNotFound("failed writing '" + path + "'");
}

Report two_stage(const Dataset& ds, const TwoStageConfig& cfg) {
  validate_config(ds, cfg);

  Report rep;
  rep.config_hash = config_fingerprint(cfg);
  rep.descriptives = describe(ds);
  rep.input_names = ds.input_names();
  rep.output_names = ds.output_names();

  rep.dea = run_all(ds, cfg.dea, cfg.threads);
  rep.response.reserve(ds.n());
  std::vector<double> thetas;
  thetas.reserve(ds.n());
  for (const DeaResult& r : rep.dea.results) {
    rep.response.push_back(stage2_response(r.theta, cfg.response));
    thetas.push_back(r.theta);
  }
  if (ds.group_column() != nullptr) rep.groups = group_summary(ds, thetas);

  const bool writing = !cfg.output_dir.empty();
  std::filesystem::path base(cfg.output_dir);
  if (writing) {
    std::error_code ec;
    std::filesystem::create_directories(base, ec);
    if (ec) {
      throw ValidationError("cannot create output directory '" +
                            cfg.output_dir + "': " + ec.message());
    }
    // Stage-1 artifacts land before stage 2 runs, so a stage-2 failure
    // (e.g. every unit efficient => all responses censored) still leaves
    // the score tables on disk.
    if (cfg.formats.csv) {
      write_file((base / "descriptives.csv").string(),
                 render_descriptives_csv(rep));
      write_file((base / "scores.csv").string(), render_scores_csv(rep));
      write_file((base / "peer_counts.csv").string(),
                 render_peer_counts_csv(rep));
      if (!rep.groups.empty()) {
        write_file((base / "groups.csv").string(), render_groups_csv(rep));
      }
    }
  }

  for (const ModelSpec& m : cfg.models) {
    rep.tobit.push_back(fit_stage2_model(ds, rep.response, m, cfg));
    if (writing && cfg.formats.csv) {
      write_file((base / ("tobit_" + m.name + ".csv")).string(),
                 render_tobit_csv(rep.tobit.back()));
    }
  }

  if (writing) {
    if (cfg.formats.json) {
      write_file((base / "report.json").string(),
                 render_report_json(rep).dump(2) + "\n");
    }
    if (cfg.formats.markdown) {
      write_file((base / "report.md").string(), render_report_md(rep));
    }
    write_file((base / "meta.json").string(),
               render_meta_json(cfg, iso8601_utc_now()).dump(2) + "\n");
  }
  return rep;
}

}  // namespace frontier
