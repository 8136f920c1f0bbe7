#pragma once

#include <string>

#include "planlab/errors.hpp"
#include "planlab/scene/types.hpp"

namespace planlab::scene {

/// Throws ValidationError naming the violated invariant.
void validate_scene(const Scene& scene);
void validate_map(const SemanticMap& map);
void validate_manifest(const DatasetManifest& manifest);

/// Scene file: one JSON document per scene, schema_version 1. Angles in
/// radians, lengths in meters, numeric values at full precision (round-trip
/// exact).
void save_scene(const Scene& scene, const std::string& path);
Scene load_scene(const std::string& path);  // validates; ParseError / ValidationError

void save_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

/// Standalone semantic-map files (same schema as the map block of a scene).
void save_map(const SemanticMap& map, const std::string& path);
SemanticMap load_map(const std::string& path);

}  // namespace planlab::scene
