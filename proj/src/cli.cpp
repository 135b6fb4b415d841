#include "netpred/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "netpred/data.hpp"
#include "netpred/errors.hpp"
#include "netpred/mgm.hpp"
#include "netpred/mvar.hpp"
#include "netpred/predictability.hpp"
#include "netpred/sampler.hpp"
#include "netpred/serialize.hpp"
#include "netpred/version.hpp"
#include "netpred/viz.hpp"

namespace netpred {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Stages declared outputs under a .tmp suffix and renames them all once the
// command succeeded, so failures leave no partial artifacts behind.
class OutputStage {
 public:
  ~OutputStage() {
    for (const auto& p : staged_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }

  std::string stage(const std::string& path) {
    if (path.empty()) throw UsageError("missing output path");
    const std::string tmp = path + ".tmp";
    staged_.push_back(tmp);
    finals_.push_back(path);
    return tmp;
  }

  void commit() {
    for (std::size_t i = 0; i < staged_.size(); ++i) {
      std::error_code ec;
      fs::rename(staged_[i], finals_[i], ec);
      if (ec)
        throw DataError("cannot move " + staged_[i] + " to " + finals_[i] + ": " +
                        ec.message());
    }
    staged_.clear();
    finals_.clear();
  }

 private:
  std::vector<std::string> staged_;
  std::vector<std::string> finals_;
};

CvConfig cv_from_config(const RunConfig& c) {
  CvConfig cv;
  cv.folds = c.folds;
  cv.n_lambda = c.n_lambda;
  cv.lambda_min_ratio = c.lambda_min_ratio;
  cv.seed = c.seed;
  return cv;
}

json config_echo(const RunConfig& c) {
  json out{{"seed", c.seed}, {"threads", c.threads}};
  switch (c.command) {
    case RunConfig::Command::fit_mgm:
      out["command"] = "fit-mgm";
      out["data"] = c.data_path;
      out["spec"] = c.spec_path;
      out["rule"] = c.rule;
      out["folds"] = c.folds;
      out["n_lambda"] = c.n_lambda;
      out["lambda_min_ratio"] = c.lambda_min_ratio;
      out["zscore"] = c.zscore;
      out["binary_sign"] = c.binary_sign;
      break;
    case RunConfig::Command::fit_var:
      out["command"] = "fit-var";
      out["data"] = c.data_path;
      out["spec"] = c.spec_path;
      out["lags"] = c.lags;
      out["folds"] = c.folds;
      out["n_lambda"] = c.n_lambda;
      out["lambda_min_ratio"] = c.lambda_min_ratio;
      out["zscore"] = c.zscore;
      out["time_index"] = c.time_index_path;
      break;
    case RunConfig::Command::predict:
      out["command"] = "predict";
      out["model"] = c.model_path;
      out["data"] = c.data_path;
      out["spec"] = c.spec_path;
      out["time_index"] = c.time_index_path;
      break;
    case RunConfig::Command::simulate:
      out["command"] = "simulate";
      out["kind"] = c.sim_kind;
      out["params"] = c.params_path;
      out["n"] = c.sim_n;
      break;
    case RunConfig::Command::viz:
      out["command"] = "viz";
      out["model"] = c.model_path;
      out["report"] = c.report_path;
      out["iterations"] = c.iterations;
      break;
  }
  return out;
}

Provenance make_provenance(const RunConfig& c, const std::vector<VariableSpec>& spec) {
  Provenance p;
  p.spec_hash = spec_hash(spec);
  p.seed = c.seed;
  p.config = config_echo(c);
  p.tool_version = kVersion;
  return p;
}

Dataset load_and_transform(const RunConfig& c) {
  const auto spec = load_spec_file(c.spec_path);
  const Dataset raw = load_csv(c.data_path, spec);
  return c.zscore ? zscore_continuous(raw) : center_continuous(raw);
}

std::optional<TimeIndex> maybe_time_index(const RunConfig& c, int n) {
  if (c.time_index_path.empty()) return std::nullopt;
  TimeIndex time = load_time_index(c.time_index_path);
  validate_time_index(time, n);
  return time;
}

void run_fit_mgm(const RunConfig& c) {
  const Dataset d = load_and_transform(c);
  MgmOptions options;
  options.rule = c.rule == "and" ? EdgeRule::AND : EdgeRule::OR;
  options.cv = cv_from_config(c);
  options.seed = c.seed;
  options.binary_sign = c.binary_sign;
  options.threads = c.threads;
  const PairwiseMGM model = fit_mgm(d, options);
  const PredictabilityReport training = evaluate(model, d, SampleKind::within_sample);

  OutputStage stage;
  const Provenance prov = make_provenance(c, model.spec);
  write_text_file(stage.stage(c.out_path), model_to_json(model, prov, &training).dump(2) + "\n");
  stage.commit();
}

void run_fit_var(const RunConfig& c) {
  const Dataset d = load_and_transform(c);
  const auto time = maybe_time_index(c, d.n());
  MvarOptions options;
  options.lags = c.lags;
  options.cv = cv_from_config(c);
  options.seed = c.seed;
  options.threads = c.threads;
  const VARModel model = fit_mvar(d, time, options);
  const PredictabilityReport training = evaluate(model, d, time, SampleKind::within_sample);

  OutputStage stage;
  const Provenance prov = make_provenance(c, model.spec);
  write_text_file(stage.stage(c.out_path), model_to_json(model, prov, &training).dump(2) + "\n");
  stage.commit();
}

// Supplying the training file again must reproduce the fit-time measures, so
// within- vs out-of-sample is decided by matching the training means.
SampleKind classify_sample(const Dataset& raw, const std::vector<VariableSpec>& spec,
                           const Eigen::VectorXd& train_means) {
  for (int j = 0; j < raw.p(); ++j) {
    if (spec[static_cast<std::size_t>(j)].kind != VarKind::continuous) continue;
    if (std::abs(raw.column(j).mean() - train_means[j]) > 1e-12)
      return SampleKind::out_of_sample;
  }
  return SampleKind::within_sample;
}

void run_predict(const RunConfig& c) {
  const LoadedModel loaded = load_model_file(c.model_path);
  const auto& spec = loaded.spec();
  if (!c.spec_path.empty() && load_spec_file(c.spec_path) != spec)
    throw DataError("spec mismatch: sidecar spec differs from the model's variables");
  const Dataset raw = load_csv(c.data_path, spec);

  const Eigen::VectorXd& means = loaded.is_mgm() ? loaded.mgm().centering_means
                                                 : loaded.var().centering_means;
  const auto& scales = loaded.is_mgm() ? loaded.mgm().scales : loaded.var().scales;
  const SampleKind kind = classify_sample(raw, spec, means);
  const Dataset d = apply_transform(raw, means, scales);

  PredictabilityReport report;
  if (loaded.is_mgm()) {
    report = evaluate(loaded.mgm(), d, kind);
  } else {
    const auto time = maybe_time_index(c, d.n());
    report = evaluate(loaded.var(), d, time, kind);
  }

  OutputStage stage;
  Provenance prov = make_provenance(c, spec);
  const std::string table = report_table(report, spec);
  write_text_file(stage.stage(c.out_path), report_to_json(report, spec, prov).dump(2) + "\n");
  if (!c.table_path.empty()) {
    std::string content;
    for (const auto& line : provenance_comment_lines(prov)) content += "# " + line + "\n";
    write_text_file(stage.stage(c.table_path), content + table);
  }
  stage.commit();
  std::cout << table;
}

void run_simulate(const RunConfig& c) {
  std::ifstream in(c.params_path);
  if (!in) throw DataError("cannot open params file: " + c.params_path);
  json params;
  try {
    in >> params;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed params file: ") + e.what());
  }
  if (c.sim_n < 1) throw UsageError("simulate needs --n >= 1");

  auto matrix_from = [&](const json& j) {
    const int rows = static_cast<int>(j.size());
    const int cols = rows ? static_cast<int>(j[0].size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
      if (static_cast<int>(j[static_cast<std::size_t>(i)].size()) != cols)
        throw DataError("ragged matrix in params file");
      for (int k = 0; k < cols; ++k)
        m(i, k) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
    }
    return m;
  };
  auto vector_from = [&](const json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
  };

  Dataset d = [&]() {
    if (c.sim_kind == "ggm") {
      return sample_ggm(matrix_from(params.at("precision")), c.sim_n, c.seed);
    }
    if (c.sim_kind == "ising") {
      return sample_ising_gibbs(matrix_from(params.at("weights")),
                                vector_from(params.at("thresholds")), c.sim_n,
                                params.value("burn_in", 1000), params.value("thin", 10),
                                c.seed);
    }
    if (c.sim_kind == "var") {
      return simulate_var(matrix_from(params.at("coefficients")),
                          vector_from(params.at("noise_sds")), c.sim_n, c.seed);
    }
    throw UsageError("unknown simulate kind: " + c.sim_kind);
  }();

  if (params.contains("names")) {
    const auto names = params.at("names").get<std::vector<std::string>>();
    if (static_cast<int>(names.size()) != d.p())
      throw DataError("params names length does not match dimension");
    std::vector<VariableSpec> spec = d.spec();
    for (std::size_t i = 0; i < names.size(); ++i) spec[i].name = names[i];
    d = Dataset(std::move(spec), d.values());
  }

  const std::string spec_out =
      !c.spec_out_path.empty()
          ? c.spec_out_path
          : fs::path(c.out_path).replace_extension(".spec").string();

  OutputStage stage;
  const Provenance prov = make_provenance(c, d.spec());
  const auto comments = provenance_comment_lines(prov);
  save_csv(stage.stage(c.out_path), d, comments);
  save_spec_file(stage.stage(spec_out), d.spec(), comments);
  stage.commit();
}

void run_viz(const RunConfig& c) {
  const LoadedModel loaded = load_model_file(c.model_path);

  PredictabilityReport report;
  if (!c.report_path.empty()) {
    std::ifstream in(c.report_path);
    if (!in) throw DataError("cannot open report file: " + c.report_path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw DataError(std::string("malformed report file: ") + e.what());
    }
    report = report_from_json(j);
  } else if (loaded.training_report) {
    report = *loaded.training_report;
  } else {
    throw UsageError("viz needs --report (model has no stored training predictability)");
  }

  RenderedGraph graph;
  if (loaded.is_mgm()) {
    graph = make_rendered_graph(loaded.mgm(), report, c.iterations, c.seed);
  } else {
    graph = make_rendered_graph(loaded.var(), report, c.iterations, c.seed);
  }

  OutputStage stage;
  const Provenance prov = make_provenance(c, loaded.spec());
  RenderOptions options;
  options.metadata_comment = "netpred " + std::string(kVersion) + " spec_hash=" +
                             prov.spec_hash + " seed=" + std::to_string(prov.seed) +
                             " config=" + prov.config.dump();
  write_text_file(stage.stage(c.out_path), render_svg(graph, options));
  if (!c.dot_path.empty())
    write_text_file(stage.stage(c.dot_path), export_dot(graph, provenance_comment_lines(prov)));
  stage.commit();
}

}  // namespace

void run(const RunConfig& config) {
  switch (config.command) {
    case RunConfig::Command::fit_mgm: run_fit_mgm(config); break;
    case RunConfig::Command::fit_var: run_fit_var(config); break;
    case RunConfig::Command::predict: run_predict(config); break;
    case RunConfig::Command::simulate: run_simulate(config); break;
    case RunConfig::Command::viz: run_viz(config); break;
  }
}

int cli_main(int argc, const char* const* argv) {
  RunConfig config;
  CLI::App app{"Mixed graphical model and mixed VAR estimation with nodewise "
               "predictability"};
  app.set_version_flag("--version", std::string("netpred ") + kVersion);
  app.require_subcommand(1);

  auto add_cv_flags = [&](CLI::App* cmd) {
    cmd->add_option("--folds", config.folds, "cross-validation folds")->check(CLI::Range(2, 1000000));
    cmd->add_option("--n-lambda", config.n_lambda, "path length");
    cmd->add_option("--lambda-min-ratio", config.lambda_min_ratio, "path floor ratio");
  };
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", config.seed, "random seed");
    cmd->add_option("--threads", config.threads, "worker cap")->check(CLI::Range(1, 4096));
  };

  CLI::App* fit_mgm_cmd = app.add_subcommand("fit-mgm", "fit a pairwise mixed graphical model");
  fit_mgm_cmd->add_option("--data", config.data_path, "CSV data file")->required();
  fit_mgm_cmd->add_option("--spec", config.spec_path, "variable spec sidecar")->required();
  fit_mgm_cmd->add_option("--out", config.out_path, "model JSON output")->required();
  fit_mgm_cmd->add_option("--rule", config.rule, "neighborhood rule")
      ->check(CLI::IsMember({"or", "and"}));
  fit_mgm_cmd->add_flag("--zscore", config.zscore, "scale continuous columns to unit sd");
  fit_mgm_cmd->add_flag("--binary-sign", config.binary_sign,
                        "report edge signs for binary variables");
  add_cv_flags(fit_mgm_cmd);
  add_common(fit_mgm_cmd);

  CLI::App* fit_var_cmd = app.add_subcommand("fit-var", "fit a mixed VAR model");
  fit_var_cmd->add_option("--data", config.data_path, "CSV data file")->required();
  fit_var_cmd->add_option("--spec", config.spec_path, "variable spec sidecar")->required();
  fit_var_cmd->add_option("--out", config.out_path, "model JSON output")->required();
  fit_var_cmd->add_option("--lags", config.lags, "lag set");
  fit_var_cmd->add_option("--time-index", config.time_index_path, "day,beep CSV");
  fit_var_cmd->add_flag("--zscore", config.zscore, "scale continuous columns to unit sd");
  add_cv_flags(fit_var_cmd);
  add_common(fit_var_cmd);

  CLI::App* predict_cmd = app.add_subcommand("predict", "nodewise predictability report");
  predict_cmd->add_option("--model", config.model_path, "model JSON")->required();
  predict_cmd->add_option("--data", config.data_path, "CSV data file")->required();
  predict_cmd->add_option("--spec", config.spec_path, "optional sidecar to cross-check");
  predict_cmd->add_option("--out", config.out_path, "report JSON output")->required();
  predict_cmd->add_option("--table", config.table_path, "also save the text table here");
  predict_cmd->add_option("--time-index", config.time_index_path, "day,beep CSV");
  add_common(predict_cmd);

  CLI::App* simulate_cmd = app.add_subcommand("simulate", "sample a synthetic dataset");
  simulate_cmd->add_option("--kind", config.sim_kind, "ggm | ising | var")
      ->required()
      ->check(CLI::IsMember({"ggm", "ising", "var"}));
  simulate_cmd->add_option("--params", config.params_path, "generator parameter JSON")->required();
  simulate_cmd->add_option("--n", config.sim_n, "rows to sample")->required();
  simulate_cmd->add_option("--out", config.out_path, "CSV output")->required();
  simulate_cmd->add_option("--spec-out", config.spec_out_path, "sidecar output path");
  add_common(simulate_cmd);

  CLI::App* viz_cmd = app.add_subcommand("viz", "render the network as SVG/DOT");
  viz_cmd->add_option("--model", config.model_path, "model JSON")->required();
  viz_cmd->add_option("--report", config.report_path, "report JSON (default: stored fit report)");
  viz_cmd->add_option("--out", config.out_path, "SVG output")->required();
  viz_cmd->add_option("--dot", config.dot_path, "also write DOT here");
  viz_cmd->add_option("--iterations", config.iterations, "layout iterations");
  add_common(viz_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (fit_mgm_cmd->parsed()) config.command = RunConfig::Command::fit_mgm;
  if (fit_var_cmd->parsed()) config.command = RunConfig::Command::fit_var;
  if (predict_cmd->parsed()) config.command = RunConfig::Command::predict;
  if (simulate_cmd->parsed()) config.command = RunConfig::Command::simulate;
  if (viz_cmd->parsed()) config.command = RunConfig::Command::viz;

  try {
    run(config);
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "netpred: error: [usage] " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "netpred: error: [data] " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "netpred: error: [numerical] " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "netpred: error: [numerical] " << e.what() << "\n";
    return 3;
  }
}

}  // namespace netpred
