#include "planlab/degrade/degrade.hpp"

#include <cmath>
#include <unordered_map>

#include "planlab/degrade/config_json.hpp"
#include "planlab/scene/geometry.hpp"

namespace planlab::degrade {

using scene::Scene;

Scene clip_range(const Scene& s, double range_m) {
    Scene out = s;
    for (auto& f : out.frames) {
        std::erase_if(f.agents, [&](const scene::AgentObservation& a) {
            return (a.box.center.position() - f.ego.position()).norm() > range_m;
        });
    }
    return out;
}

Scene clip_fov(const Scene& s, double fov_deg) {
    double half = fov_deg * M_PI / 360.0;
    Scene out = s;
    for (auto& f : out.frames) {
        std::erase_if(f.agents, [&](const scene::AgentObservation& a) {
            scene::Vec2 local = scene::to_local(a.box.center.position(), f.ego);
            return std::abs(std::atan2(local.y, local.x)) > half;
        });
    }
    return out;
}

Offset2 iou_offsets(double length, double width, double target_iou, Rng& rng) {
    double q = target_iou;
    if (q >= 1.0) return {0.0, 0.0};
    // intersection area required for IoU q between two same-size boxes
    double inter = 2.0 * length * width * q / (1.0 + q);
    double dx_max = length * (1.0 - q) / (1.0 + q);
    double dx = rng.uniform(-dx_max, dx_max);
    double dy_abs = width - inter / (length - std::abs(dx));
    if (dy_abs < 0.0) dy_abs = 0.0;  // guard tiny negative from rounding
    double dy = rng.bernoulli(0.5) ? dy_abs : -dy_abs;
    return {dx, dy};
}

Scene apply_positional_noise(const Scene& s, double target_iou, std::uint64_t seed) {
    Scene out = s;
    if (target_iou >= 1.0) return out;
    // offsets are drawn per track from (seed, agent_id), using the extents of
    // the track's first observation
    std::unordered_map<std::int64_t, Offset2> offsets;
    for (auto& f : out.frames) {
        for (auto& a : f.agents) {
            auto it = offsets.find(a.agent_id);
            if (it == offsets.end()) {
                Rng rng(derive_seed(seed, static_cast<std::uint64_t>(a.agent_id)));
                it = offsets.emplace(a.agent_id, iou_offsets(a.box.length, a.box.width, target_iou, rng))
                         .first;
            }
            const Offset2& o = it->second;
            scene::Vec2 shifted =
                scene::to_world({o.dx, o.dy}, a.box.center);  // agent-frame offset
            a.box.center.x = shifted.x;
            a.box.center.y = shifted.y;
        }
    }
    return out;
}

Scene apply_rotational_noise(const Scene& s, double rot_noise_max_rad, std::uint64_t seed,
                             bool per_frame) {
    Scene out = s;
    if (rot_noise_max_rad == 0.0) return out;
    std::unordered_map<std::int64_t, double> offsets;
    for (auto& f : out.frames) {
        for (auto& a : f.agents) {
            double theta;
            if (per_frame) {
                Rng rng(derive_seed(derive_seed(seed, static_cast<std::uint64_t>(a.agent_id)),
                                    static_cast<std::uint64_t>(f.index)));
                theta = rot_noise_max_rad * rng.normal();
            } else {
                auto it = offsets.find(a.agent_id);
                if (it == offsets.end()) {
                    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(a.agent_id)));
                    it = offsets.emplace(a.agent_id, rot_noise_max_rad * rng.normal()).first;
                }
                theta = it->second;
            }
            a.box.center.yaw = scene::normalize_angle(a.box.center.yaw + theta);
        }
    }
    return out;
}

Scene degrade_scene(const Scene& s, const DegradationConfig& config) {
    validate_config(config);
    if (config.is_identity()) return s;  // the AV-grade baseline alters nothing
    Scene out = apply_positional_noise(s, config.target_iou, derive_seed(config.seed, 0x905));
    out = apply_rotational_noise(out, config.rot_noise_max_rad, derive_seed(config.seed, 0x207),
                                 config.rot_per_frame);
    if (config.range_m) out = clip_range(out, *config.range_m);
    if (config.fov_deg < 360.0) out = clip_fov(out, config.fov_deg);
    out.provenance.degradation = config;
    return out;
}

}  // namespace planlab::degrade
