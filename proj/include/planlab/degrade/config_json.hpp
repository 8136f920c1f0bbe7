#pragma once

#include <nlohmann/json.hpp>

#include "planlab/degrade/config.hpp"
#include "planlab/errors.hpp"

namespace planlab::degrade {

inline nlohmann::json to_json(const DegradationConfig& c) {
    nlohmann::json j;
    if (c.range_m) {
        j["range_m"] = *c.range_m;
    } else {
        j["range_m"] = "unlimited";
    }
    j["fov_deg"] = c.fov_deg;
    j["target_iou"] = c.target_iou;
    j["rot_noise_max_rad"] = c.rot_noise_max_rad;
    j["rot_per_frame"] = c.rot_per_frame;
    j["seed"] = c.seed;
    return j;
}

inline DegradationConfig config_from_json(const nlohmann::json& j) {
    DegradationConfig c;
    const auto& r = j.at("range_m");
    if (r.is_string()) {
        if (r.get<std::string>() != "unlimited")
            throw ParseError("degradation range_m: expected number or \"unlimited\"");
    } else {
        c.range_m = r.get<double>();
    }
    c.fov_deg = j.at("fov_deg").get<double>();
    c.target_iou = j.at("target_iou").get<double>();
    c.rot_noise_max_rad = j.at("rot_noise_max_rad").get<double>();
    c.rot_per_frame = j.value("rot_per_frame", false);
    c.seed = j.value("seed", std::uint64_t{0});
    return c;
}

/// Throws ValidationError naming the violated invariant.
inline void validate_config(const DegradationConfig& c) {
    if (c.range_m && !(*c.range_m > 0.0))
        throw ValidationError("degradation config: range_m > 0 when finite");
    if (!(c.fov_deg > 0.0 && c.fov_deg <= 360.0))
        throw ValidationError("degradation config: 0 < fov_deg <= 360");
    if (!(c.target_iou > 0.0 && c.target_iou <= 1.0))
        throw ValidationError("degradation config: 0 < target_iou <= 1");
    if (!(c.rot_noise_max_rad >= 0.0))
        throw ValidationError("degradation config: rot_noise_max_rad >= 0");
}

}  // namespace planlab::degrade
