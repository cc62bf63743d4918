#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coiso/path_index.hpp"
#include "coiso/rigidity.hpp"

namespace coiso {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kPathSchema = "sympath-v1";
inline constexpr const char* kLoopSchema = "leafloop-v1";
inline constexpr const char* kModelSchema = "coiso-model-v1";
inline constexpr const char* kReportSchema = "rigidity-report-v1";

/// Reads and parses a JSON file; Io when unreadable, BadInput when malformed.
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

Json path_to_json(const SymplecticPath& path);
SymplecticPath path_from_json(const Json& j, double sympl_tol = 1e-9);

Json model_config_to_json(const ModelConfig& config);
/// Unknown keys are rejected.
ModelConfig model_config_from_json(const Json& j);

/// A leaf loop file: model, class, and optionally explicit samples. Without
/// samples the model's canonical loop in the class is used.
struct LeafLoopSpec {
  ModelConfig model;
  ClassVector homotopy_class;
  std::optional<FramedLeafLoop> loop;
};
Json leaf_loop_to_json(const ModelConfig& model, const FramedLeafLoop& loop);
LeafLoopSpec leaf_loop_from_json(const Json& j);

Json to_json(const IndexResult& r);
Json to_json(const OrbitRecord& r);
Json to_json(const Lemma33Result& r);
Json to_json(const Prop31Result& r);
Json to_json(const Prop32Result& r);
Json to_json(const WitnessCandidate& c);
Json to_json(const TheoremReport& r);
Json to_json(const Lemma35Report& r);
Json to_json(const TestHamiltonianProfile& h);

struct ReportHeader {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string timestamp;  // the only field allowed to differ between reruns
};

/// Wraps results in the report envelope: tool and schema versions, seed,
/// external-constant flags, parameters, results, pass flag, timestamp.
Json make_report(const ReportHeader& header, const Json& parameters, const Json& external_constants,
                 const Json& results, bool passed);

std::string orbit_records_csv(const std::vector<OrbitRecord>& records);
/// Long-format plot data: "level_action" rows (level, action) and
/// "class_mu" rows (class, mu).
std::string plot_data_csv(const std::vector<OrbitRecord>& records);

std::string class_to_string(const ClassVector& cls);
/// Parses "1,0", "(1,0)" or "[1, 0]".
ClassVector class_from_string(const std::string& text);

}  // namespace coiso
