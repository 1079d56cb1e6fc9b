#pragma once

// JSON file formats. Field names are documented in README.md. All
// numbers are SI (meters).

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "asmplan/planner.hpp"
#include "asmplan/scene.hpp"
#include "asmplan/strips.hpp"
#include "asmplan/vision.hpp"

namespace asmplan {

using Json = nlohmann::json;

/// Malformed or schema-violating input. The message carries the file name
/// and either line:column (syntax) or the JSON pointer of the bad field.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json to_json(const Vec3& v);
Json to_json(const Pose& pose);
Json to_json(const Primitive& prim);
Json to_json(const Scene& scene);
Json to_json(const Observation& obs);
Json to_json(const Layout& layout);
Json to_json(const Operator& op, const Catalog& catalog);
Json to_json(const OperatorSequence& seq, const Catalog& catalog);
Json to_json(const PlanResult& plan, const Catalog& catalog);
Json to_json(const VisionConfig& config);
Json to_json(const SearchConfig& config);

// Parsers take the value and the JSON pointer it was found at, for messages.
Pose pose_from_json(const Json& j, const std::string& where = "");
Primitive primitive_from_json(const Json& j, const std::string& where = "");
Scene scene_from_json(const Json& j);
Observation observation_from_json(const Json& j);
Layout layout_from_json(const Json& j);
Operator operator_from_json(const Json& j, const Catalog& catalog,
                            const std::string& where = "");
OperatorSequence sequence_from_json(const Json& j, const Catalog& catalog,
                                    const std::string& where = "");
PlanResult plan_from_json(const Json& j, const Catalog& catalog);
/// Fields absent from `j` keep the values already in `config`.
void apply_json(const Json& j, VisionConfig& config, const std::string& where = "");
void apply_json(const Json& j, SearchConfig& config, const std::string& where = "");

/// Reads and parses a file; syntax errors become InputError("file:line:col: ...").
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

/// Load + parse + validate, prefixing any error with the file name.
Scene load_scene(const std::filesystem::path& path);
Observation load_observation(const std::filesystem::path& path);
Layout load_layout(const std::filesystem::path& path);
PlanResult load_plan(const std::filesystem::path& path, const Catalog& catalog);

}  // namespace asmplan
