#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "planlab/scene/types.hpp"

namespace planlab::raster {

/// Ego-centered, ego-oriented binary BEV grid configuration.
/// Channel layout (fixed order): [drivable-area, crosswalks,
/// agents@t-(H-1)..agents@t, ego@t-(H-1)..ego@t].
struct RasterConfig {
    int size_px = 256;        // square, even
    double resolution = 0.5;  // meters per pixel
    int history = 3;          // H >= 1 frames: t, t-0.1s, ...

    int channels() const { return 2 + 2 * history; }
    double extent_m() const { return 0.5 * size_px * resolution; }

    friend bool operator==(const RasterConfig&, const RasterConfig&) = default;
};

struct Raster {
    int channels = 0;
    int size = 0;
    std::vector<float> data;  // channel-major, row-major within channel; values in {0, 1}

    float at(int c, int r, int col) const { return data[(c * size + r) * size + col]; }
    float& at(int c, int r, int col) { return data[(c * size + r) * size + col]; }

    friend bool operator==(const Raster&, const Raster&) = default;
};

/// Options for the generic renderer. By default the reference frame is the
/// ego pose at frame_index and ego history channels use the logged ego poses.
struct RenderOptions {
    std::optional<scene::Pose2D> ref_pose;  ///< override the reference (and ego) pose
    std::optional<std::int64_t> mask_agent_id;
    /// Override poses for the ego history channels, oldest first, exactly H
    /// entries; used by closed-loop rollout where ego has left the log.
    std::vector<scene::Pose2D> ego_history;
};

/// Renders the frame: ego at the grid center, forward axis toward decreasing
/// row index; a pixel is set iff its center lies inside a rendered polygon.
/// History channels are all drawn in the reference frame at frame_index.
/// Throws ValidationError when history is insufficient or the frame is out
/// of bounds.
Raster render(const scene::Scene& s, int frame_index, const RasterConfig& config,
              const RenderOptions& options);

inline Raster rasterize(const scene::Scene& s, int frame_index, const RasterConfig& config) {
    return render(s, frame_index, config, {});
}

inline Raster rasterize_masked(const scene::Scene& s, int frame_index, std::int64_t agent_id,
                               const RasterConfig& config) {
    RenderOptions opt;
    opt.mask_agent_id = agent_id;
    return render(s, frame_index, config, opt);
}

/// Debug dump: one 8-bit binary PGM per channel, named <prefix>_c<NN>.pgm.
void dump_raster_pgm(const Raster& r, const std::string& prefix);

}  // namespace planlab::raster
