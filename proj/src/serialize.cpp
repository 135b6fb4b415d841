#include "netpred/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "netpred/errors.hpp"
#include "netpred/version.hpp"

namespace netpred {

namespace {

using nlohmann::json;

constexpr int kModelVersion = 1;
constexpr int kReportVersion = 1;

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = j[i].is_null()
                                          ? std::numeric_limits<double>::quiet_NaN()
                                          : j[i].get<double>();
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[static_cast<std::size_t>(i)].size()) != cols)
      throw DataError("ragged matrix in model file");
    for (int c = 0; c < cols; ++c)
      m(i, c) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json int_matrix_to_json(const Eigen::MatrixXi& m) {
  json out = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::MatrixXi int_matrix_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
  Eigen::MatrixXi m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c)
      m(i, c) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].get<int>();
  return m;
}

json spec_to_json(const std::vector<VariableSpec>& spec) {
  json out = json::array();
  for (const auto& v : spec)
    out.push_back({{"name", v.name},
                   {"kind", v.kind == VarKind::continuous ? "continuous" : "categorical"},
                   {"levels", v.levels}});
  return out;
}

std::vector<VariableSpec> spec_from_json(const json& j) {
  std::vector<VariableSpec> spec;
  for (const auto& e : j) {
    VariableSpec v;
    v.name = e.at("name").get<std::string>();
    const std::string kind = e.at("kind").get<std::string>();
    if (kind == "continuous")
      v.kind = VarKind::continuous;
    else if (kind == "categorical")
      v.kind = VarKind::categorical;
    else
      throw DataError("unknown variable kind in model file: " + kind);
    v.levels = e.at("levels").get<int>();
    spec.push_back(std::move(v));
  }
  return spec;
}

json node_to_json(const NodeModel& m) {
  json terms = json::array();
  for (const auto& t : m.terms)
    terms.push_back({{"source", t.source}, {"category", t.category}, {"lag", t.lag}});
  json out{{"node", m.node},
           {"family", m.family == Family::gaussian ? "gaussian" : "multinomial"},
           {"levels", m.levels},
           {"lambda", m.lambda},
           {"intercepts", vector_to_json(m.coef.intercepts)},
           {"betas", matrix_to_json(m.coef.betas)},
           {"terms", std::move(terms)}};
  if (m.coef.residual_sigma) out["residual_sigma"] = *m.coef.residual_sigma;
  return out;
}

NodeModel node_from_json(const json& j) {
  NodeModel m;
  m.node = j.at("node").get<int>();
  m.family = j.at("family").get<std::string>() == "gaussian" ? Family::gaussian
                                                             : Family::multinomial;
  m.levels = j.at("levels").get<int>();
  m.lambda = j.at("lambda").get<double>();
  m.coef.intercepts = vector_from_json(j.at("intercepts"));
  m.coef.betas = matrix_from_json(j.at("betas"));
  for (const auto& t : j.at("terms"))
    m.terms.push_back(PredictorTerm{t.at("source").get<int>(), t.at("category").get<int>(),
                                    t.at("lag").get<int>()});
  if (j.contains("residual_sigma")) m.coef.residual_sigma = j["residual_sigma"].get<double>();
  return m;
}

double json_measure(const json& j, const char* key) {
  const auto& v = j.at(key);
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

json measures_to_json(const NodeMeasures& m, const std::vector<VariableSpec>* spec) {
  json out{{"node", m.node}};
  if (spec) out["name"] = (*spec)[static_cast<std::size_t>(m.node)].name;
  if (m.kind == VarKind::continuous) {
    out["kind"] = "continuous";
    out["R2"] = m.r2;
  } else {
    out["kind"] = "categorical";
    out["CC"] = m.cc;
    out["nCC"] = m.ncc;
    out["CCmarg"] = m.ccmarg;
  }
  return out;
}

NodeMeasures measures_from_json(const json& j) {
  NodeMeasures m;
  m.node = j.at("node").get<int>();
  if (j.at("kind").get<std::string>() == "continuous") {
    m.kind = VarKind::continuous;
    m.r2 = json_measure(j, "R2");
  } else {
    m.kind = VarKind::categorical;
    m.cc = json_measure(j, "CC");
    m.ncc = json_measure(j, "nCC");
    m.ccmarg = json_measure(j, "CCmarg");
  }
  return m;
}

json report_body(const PredictabilityReport& report, const std::vector<VariableSpec>* spec) {
  json nodes = json::array();
  for (const auto& m : report.nodes) nodes.push_back(measures_to_json(m, spec));
  return json{{"sample_kind", report.sample_kind == SampleKind::within_sample
                                  ? "within_sample"
                                  : "out_of_sample"},
              {"nodes", std::move(nodes)}};
}

PredictabilityReport report_from_body(const json& j) {
  PredictabilityReport report;
  report.sample_kind = j.at("sample_kind").get<std::string>() == "within_sample"
                           ? SampleKind::within_sample
                           : SampleKind::out_of_sample;
  for (const auto& e : j.at("nodes")) report.nodes.push_back(measures_from_json(e));
  return report;
}

json marginals_to_json(const std::vector<Eigen::VectorXd>& marginals) {
  json out = json::array();
  for (const auto& m : marginals) {
    if (m.size() == 0)
      out.push_back(nullptr);
    else
      out.push_back(vector_to_json(m));
  }
  return out;
}

std::vector<Eigen::VectorXd> marginals_from_json(const json& j) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& e : j)
    out.push_back(e.is_null() ? Eigen::VectorXd() : vector_from_json(e));
  return out;
}

void common_model_fields(json& out, const std::vector<VariableSpec>& spec,
                         const Eigen::VectorXd& means,
                         const std::optional<Eigen::VectorXd>& scales,
                         const std::vector<Eigen::VectorXd>& marginals,
                         const std::vector<NodeModel>& nodes, const Provenance& prov,
                         const PredictabilityReport* training_report) {
  out["format"] = "netpred-model";
  out["version"] = kModelVersion;
  out["provenance"] = provenance_to_json(prov);
  out["variables"] = spec_to_json(spec);
  out["centering_means"] = vector_to_json(means);
  out["scales"] = scales ? vector_to_json(*scales) : json(nullptr);
  out["train_marginals"] = marginals_to_json(marginals);
  json node_array = json::array();
  for (const auto& n : nodes) node_array.push_back(node_to_json(n));
  out["nodes"] = std::move(node_array);
  if (training_report) out["training_predictability"] = report_body(*training_report, &spec);
}

}  // namespace

json provenance_to_json(const Provenance& p) {
  return json{{"spec_hash", p.spec_hash},
              {"seed", p.seed},
              {"config", p.config},
              {"tool_version", p.tool_version.empty() ? kVersion : p.tool_version}};
}

Provenance provenance_from_json(const json& j) {
  Provenance p;
  p.spec_hash = j.value("spec_hash", "");
  p.seed = j.value("seed", std::uint64_t{0});
  p.config = j.value("config", json::object());
  p.tool_version = j.value("tool_version", "");
  return p;
}

std::vector<std::string> provenance_comment_lines(const Provenance& p) {
  return {"tool: netpred " + (p.tool_version.empty() ? std::string(kVersion) : p.tool_version),
          "spec_hash: " + p.spec_hash, "seed: " + std::to_string(p.seed),
          "config: " + p.config.dump()};
}

json model_to_json(const PairwiseMGM& model, const Provenance& prov,
                   const PredictabilityReport* training_report) {
  json out;
  common_model_fields(out, model.spec, model.centering_means, model.scales,
                      model.train_marginals, model.nodes, prov, training_report);
  out["model_kind"] = "mgm";
  out["rule"] = model.rule == EdgeRule::OR ? "or" : "and";
  out["binary_sign"] = model.binary_sign;
  out["seed"] = model.seed;
  out["wadj"] = matrix_to_json(model.wadj);
  out["signs"] = int_matrix_to_json(model.signs);
  return out;
}

json model_to_json(const VARModel& model, const Provenance& prov,
                   const PredictabilityReport* training_report) {
  json out;
  common_model_fields(out, model.spec, model.centering_means, model.scales,
                      model.train_marginals, model.nodes, prov, training_report);
  out["model_kind"] = "var";
  out["seed"] = model.seed;
  out["lags"] = model.lags;
  json coef = json::array();  // lag-major
  for (const auto& slice : model.coefficients) coef.push_back(matrix_to_json(slice));
  out["coefficients"] = std::move(coef);
  out["intercepts"] = vector_to_json(model.intercepts);
  out["residual_sigmas"] = vector_to_json(model.residual_sigmas);
  out["per_node_lambda"] = model.per_node_lambda;
  return out;
}

const std::vector<VariableSpec>& LoadedModel::spec() const {
  return is_mgm() ? mgm().spec : var().spec;
}

LoadedModel model_from_json(const json& j) {
  if (j.value("format", "") != "netpred-model")
    throw DataError("not a netpred model file");
  if (j.value("version", -1) != kModelVersion)
    throw DataError("unsupported model file version");

  const auto spec = spec_from_json(j.at("variables"));
  const Eigen::VectorXd means = vector_from_json(j.at("centering_means"));
  std::optional<Eigen::VectorXd> scales;
  if (!j.at("scales").is_null()) scales = vector_from_json(j.at("scales"));
  auto marginals = marginals_from_json(j.at("train_marginals"));
  std::vector<NodeModel> nodes;
  for (const auto& e : j.at("nodes")) nodes.push_back(node_from_json(e));

  LoadedModel loaded;
  loaded.provenance = provenance_from_json(j.value("provenance", json::object()));
  if (j.contains("training_predictability"))
    loaded.training_report = report_from_body(j.at("training_predictability"));

  const std::string kind = j.at("model_kind").get<std::string>();
  if (kind == "mgm") {
    PairwiseMGM m;
    m.spec = spec;
    m.rule = j.at("rule").get<std::string>() == "or" ? EdgeRule::OR : EdgeRule::AND;
    m.binary_sign = j.value("binary_sign", false);
    m.seed = j.value("seed", std::uint64_t{0});
    m.wadj = matrix_from_json(j.at("wadj"));
    m.signs = int_matrix_from_json(j.at("signs"));
    m.centering_means = means;
    m.scales = scales;
    m.train_marginals = std::move(marginals);
    m.nodes = std::move(nodes);
    loaded.model = std::move(m);
  } else if (kind == "var") {
    VARModel m;
    m.spec = spec;
    m.seed = j.value("seed", std::uint64_t{0});
    m.lags = j.at("lags").get<std::vector<int>>();
    for (const auto& slice : j.at("coefficients"))
      m.coefficients.push_back(matrix_from_json(slice));
    m.intercepts = vector_from_json(j.at("intercepts"));
    m.residual_sigmas = vector_from_json(j.at("residual_sigmas"));
    m.per_node_lambda = j.at("per_node_lambda").get<std::vector<double>>();
    m.centering_means = means;
    m.scales = scales;
    m.train_marginals = std::move(marginals);
    m.nodes = std::move(nodes);
    loaded.model = std::move(m);
  } else {
    throw DataError("unknown model_kind: " + kind);
  }
  return loaded;
}

LoadedModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("malformed model file " + path + ": " + e.what());
  }
  return model_from_json(j);
}

json report_to_json(const PredictabilityReport& report,
                    const std::vector<VariableSpec>& spec, const Provenance& prov) {
  json out = report_body(report, &spec);
  out["format"] = "netpred-report";
  out["version"] = kReportVersion;
  out["provenance"] = provenance_to_json(prov);
  return out;
}

PredictabilityReport report_from_json(const json& j) {
  if (j.value("format", "") != "netpred-report")
    throw DataError("not a netpred report file");
  if (j.value("version", -1) != kReportVersion)
    throw DataError("unsupported report file version");
  return report_from_body(j);
}

std::string report_table(const PredictabilityReport& report,
                         const std::vector<VariableSpec>& spec) {
  std::size_t name_width = 4;
  for (const auto& v : spec) name_width = std::max(name_width, v.name.size());
  char buf[64];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%-*s %-12s %8s %8s %8s %8s\n",
                static_cast<int>(name_width), "node", "kind", "R2", "CC", "nCC", "CCmarg");
  out += buf;
  auto cell = [&](double v, bool present) {
    if (!present) return std::string("       -");
    if (!std::isfinite(v)) return std::string("     nan");
    std::snprintf(buf, sizeof(buf), "%8.4f", v);
    return std::string(buf);
  };
  for (const auto& m : report.nodes) {
    const auto& v = spec[static_cast<std::size_t>(m.node)];
    const bool cont = m.kind == VarKind::continuous;
    std::snprintf(buf, sizeof(buf), "%-*s %-12s ", static_cast<int>(name_width),
                  v.name.c_str(), cont ? "continuous" : "categorical");
    out += buf;
    out += cell(m.r2, cont);
    out += ' ';
    out += cell(m.cc, !cont);
    out += ' ';
    out += cell(m.ncc, !cont);
    out += ' ';
    out += cell(m.ccmarg, !cont);
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
  if (!out) throw DataError("failed writing file: " + path);
}

}  // namespace netpred
