#pragma once

#include <json.hpp>
#include <string>
#include <variant>

#include "netpred/mgm.hpp"
#include "netpred/mvar.hpp"
#include "netpred/predictability.hpp"

namespace netpred {

// Embedded in every artifact; all fields deterministic so reruns with the
// same config and seed are byte-identical.
struct Provenance {
  std::string spec_hash;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();
  std::string tool_version;
};

nlohmann::json provenance_to_json(const Provenance& p);
Provenance provenance_from_json(const nlohmann::json& j);
std::vector<std::string> provenance_comment_lines(const Provenance& p);

nlohmann::json model_to_json(const PairwiseMGM& model, const Provenance& prov,
                             const PredictabilityReport* training_report = nullptr);
nlohmann::json model_to_json(const VARModel& model, const Provenance& prov,
                             const PredictabilityReport* training_report = nullptr);

struct LoadedModel {
  std::variant<PairwiseMGM, VARModel> model;
  Provenance provenance;
  // Self-evaluation stored at fit time, when present.
  std::optional<PredictabilityReport> training_report;

  bool is_mgm() const { return std::holds_alternative<PairwiseMGM>(model); }
  const PairwiseMGM& mgm() const { return std::get<PairwiseMGM>(model); }
  const VARModel& var() const { return std::get<VARModel>(model); }
  const std::vector<VariableSpec>& spec() const;
};

LoadedModel model_from_json(const nlohmann::json& j);
LoadedModel load_model_file(const std::string& path);

nlohmann::json report_to_json(const PredictabilityReport& report,
                              const std::vector<VariableSpec>& spec, const Provenance& prov);
PredictabilityReport report_from_json(const nlohmann::json& j);

// Plain-text table with the R2 / CC / nCC / CCmarg columns.
std::string report_table(const PredictabilityReport& report,
                         const std::vector<VariableSpec>& spec);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace netpred
