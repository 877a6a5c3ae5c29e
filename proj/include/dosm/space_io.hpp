#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dosm/space_model.hpp"

namespace dosm {

using Json = nlohmann::ordered_json;

// Space document codec. Points are `[x, y]` / `[x, y, z]` arrays in meters, headings are
// `{"rad": v}` or `{"deg": v}`. Unknown keys are reported as warnings; missing required keys throw.

struct DecodeContext {
  std::vector<std::string> warnings;
};

Json vec_to_json(const Vec2& v);
Json vec_to_json(const Vec3& v);
Vec2 vec2_from_json(const Json& j, const std::string& path);
Vec3 vec3_from_json(const Json& j, const std::string& path);
double heading_from_json(const Json& j, const std::string& path);

Json to_json(const SpaceModel& model);
Json entity_to_json(const Entity& entity);
Entity entity_from_json(EntityKind kind, const Json& j, DecodeContext& ctx, const std::string& path = "entity");

/// Decodes without validating the result.
SpaceModel space_from_json(const Json& j, DecodeContext& ctx);

/// Parses text; malformed input throws ParseError naming the byte offset.
Json parse_document(std::string_view text);

struct LoadedSpace {
  SpaceModel model;
  std::vector<std::string> warnings;
};

/// Reads and decodes a space file without validation (for the `validate` command).
LoadedSpace read_space_file(const std::filesystem::path& path);

/// Reads, decodes and validates; validation errors are fatal.
LoadedSpace load_space(const std::filesystem::path& path);

/// Called after the temp file is fully written and before it replaces the target.
using BeforeRenameHook = std::function<void(const std::filesystem::path& temp_path)>;

/// Atomic write-temp-then-rename. The model must validate with no errors.
void save_space(const SpaceModel& model, const std::filesystem::path& path,
                const BeforeRenameHook& before_rename = {});

/// Atomic write of arbitrary text (same temp-then-rename protocol).
void write_file_atomic(const std::filesystem::path& path, std::string_view contents,
                       const BeforeRenameHook& before_rename = {});

std::string read_text_file(const std::filesystem::path& path);

}  // namespace dosm
