#pragma once

#include <cstdint>
#include <optional>

namespace planlab::degrade {

/// The four quality knobs defining a simulated sensor grade, plus the seed
/// used to draw per-track noise.
struct DegradationConfig {
    std::optional<double> range_m;    ///< max observation distance; nullopt = unlimited
    double fov_deg = 360.0;           ///< field of view, (0, 360], centered on ego forward
    double target_iou = 1.0;          ///< positional noise calibrated to this IoU, (0, 1]
    double rot_noise_max_rad = 0.0;   ///< sigma scale of per-track yaw offset, >= 0
    bool rot_per_frame = false;       ///< sensitivity-check variant: draw yaw noise per frame
    std::uint64_t seed = 0;

    /// True when the config alters nothing (the AV-grade baseline).
    bool is_identity() const {
        return !range_m.has_value() && fov_deg == 360.0 && target_iou == 1.0 &&
               rot_noise_max_rad == 0.0;
    }

    friend bool operator==(const DegradationConfig&, const DegradationConfig&) = default;
};

}  // namespace planlab::degrade
