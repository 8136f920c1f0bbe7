#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "planlab/scene/types.hpp"

namespace planlab::synth {

enum class MapStyle { kStraightRoad, kCurvedRoad, kFourWayIntersection };

MapStyle map_style_from_name(const std::string& name);  // ConfigError on unknown
std::string map_style_name(MapStyle style);

struct WorldSpec {
    MapStyle style = MapStyle::kStraightRoad;
    int num_lanes = 2;
    double traffic_density = 2.5;       ///< expected vehicles per scene
    double ped_crossing_prob = 0.5;     ///< per crosswalk
    double speed_limit = 10.0;          ///< m/s
    scene::Extent ego_extent{4.87, 1.85};
    std::uint64_t seed = 0;
};

/// Intelligent-driver-model parameters for the scripted expert and the
/// background traffic.
struct ExpertParams {
    double v0 = 10.0;        ///< desired speed, m/s
    double a_max = 1.5;      ///< max acceleration, m/s^2
    double b = 2.0;          ///< comfortable deceleration, m/s^2
    double s0 = 2.0;         ///< min bumper gap, m
    double t_headway = 1.5;  ///< desired time headway, s
    double crosswalk_margin = 1.5;  ///< stop this far before an occupied crosswalk, m
};

/// Deterministic for a given spec (including seed).
scene::SemanticMap build_map(const WorldSpec& spec);

struct SimOptions {
    bool omit_lead_vehicle = false;  ///< draw identical randomness but drop the ego-lane leader
};

struct SimResult {
    scene::Scene scene;
    bool has_lead_interaction = false;  ///< an ego-lane leader was spawned
    std::int64_t lead_agent_id = -1;
};

/// 250 frames at 10 Hz: ego follows its lane centerline under IDM, reacting
/// to the nearest in-lane leader and to occupied crosswalks; background
/// vehicles follow the same law; pedestrians cross on randomized schedules
/// (deferred until every approaching vehicle can stop). Deterministic given
/// the seed.
SimResult simulate_scene_info(const scene::SemanticMap& map, const WorldSpec& spec,
                              const ExpertParams& expert, std::uint64_t seed,
                              const SimOptions& options = {});

inline scene::Scene simulate_scene(const scene::SemanticMap& map, const WorldSpec& spec,
                                   const ExpertParams& expert, std::uint64_t seed) {
    return simulate_scene_info(map, spec, expert, seed).scene;
}

struct DatasetGenResult {
    scene::DatasetManifest manifest;
    std::vector<bool> has_lead_interaction;  // per scene
};

/// Writes n_scenes scene files (per-scene derived seeds and maps) into
/// out_dir and returns the manifest. On I/O failure, throws without
/// producing a manifest.
DatasetGenResult generate_dataset(const WorldSpec& spec, const ExpertParams& expert, int n_scenes,
                                  std::uint64_t seed, const std::string& out_dir);

}  // namespace planlab::synth
