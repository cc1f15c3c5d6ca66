#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>

#include "cdrag/core/scene.hpp"
#include "cdrag/core/trajectory.hpp"

namespace cdrag {

using Json = nlohmann::json;

void to_json(Json& j, const Vec2& p);
void from_json(const Json& j, Vec2& p);
void to_json(Json& j, const BBox& b);
void from_json(const Json& j, BBox& b);
void to_json(Json& j, const Trajectory& t);
void from_json(const Json& j, Trajectory& t);

Json scene_to_json(const Scene& scene);
/// Parses the canonical scene document. Missing mass defaults to bbox area.
/// Throws Error(ParseError) on schema problems.
Scene scene_from_json(const Json& j);

Json drag_to_json(const DragInput& drag);
/// Accepts `{"points":[[x,y],...], "object_id"?, "start"?}`.
DragInput drag_from_json(const Json& j);

/// Reads and parses a JSON file; failures become Error(ParseError) or Error(NotFound).
Json read_json_file(const std::filesystem::path& path);

}  // namespace cdrag
