#pragma once

#include "planlab/degrade/config.hpp"
#include "planlab/rng.hpp"
#include "planlab/scene/types.hpp"

namespace planlab::degrade {

/// Keep an observation iff center-to-center distance to ego <= range_m.
/// Ego, map and frame timing are unchanged.
scene::Scene clip_range(const scene::Scene& s, double range_m);

/// Keep an observation iff |bearing in the ego frame| <= fov_deg / 2.
scene::Scene clip_fov(const scene::Scene& s, double fov_deg);

/// Draw a per-track positional offset in the agent frame (dx longitudinal,
/// dy lateral) such that iou_same_size(length, width, dx, dy) == target_iou
/// exactly. dx ~ Uniform(-dx_max, dx_max) with dx_max the largest offset for
/// which the target stays achievable with dy = 0; |dy| then solves the IoU
/// equation; sign of dy uniform.
struct Offset2 {
    double dx = 0.0;
    double dy = 0.0;
};
Offset2 iou_offsets(double length, double width, double target_iou, Rng& rng);

/// One offset per agent track (derived RNG stream per agent id), applied in
/// each observation's own frame across the whole track.
scene::Scene apply_positional_noise(const scene::Scene& s, double target_iou, std::uint64_t seed);

/// One yaw offset per agent track, theta ~ rot_noise_max_rad * Normal(0, 1),
/// added to every observation of the track (per-frame draws behind
/// per_frame).
scene::Scene apply_rotational_noise(const scene::Scene& s, double rot_noise_max_rad,
                                    std::uint64_t seed, bool per_frame = false);

/// Full pipeline: positional noise -> rotational noise -> range clipping ->
/// FoV clipping, with the config recorded in provenance. The identity config
/// (unlimited, 360, IoU 1, rot 0) returns the scene unchanged: it denotes the
/// AV-grade baseline.
scene::Scene degrade_scene(const scene::Scene& s, const DegradationConfig& config);

}  // namespace planlab::degrade
