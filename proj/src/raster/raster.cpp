#include "planlab/raster/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "planlab/errors.hpp"
#include "planlab/scene/geometry.hpp"

namespace planlab::raster {

using scene::Pose2D;
using scene::Vec2;

namespace {

/// Fills all pixels of one channel whose centers fall inside the convex
/// polygon given in local (ego) coordinates.
void fill_convex(Raster& r, int channel, const RasterConfig& cfg, const Vec2* local, std::size_t n) {
    // local -> pixel: row = size/2 - x/res, col = size/2 - y/res
    double half = cfg.size_px * 0.5;
    double min_r = 1e18, max_r = -1e18, min_c = 1e18, max_c = -1e18;
    for (std::size_t i = 0; i < n; ++i) {
        double pr = half - local[i].x / cfg.resolution;
        double pc = half - local[i].y / cfg.resolution;
        min_r = std::min(min_r, pr);
        max_r = std::max(max_r, pr);
        min_c = std::min(min_c, pc);
        max_c = std::max(max_c, pc);
    }
    int r0 = std::max(0, static_cast<int>(std::floor(min_r - 0.5)));
    int r1 = std::min(cfg.size_px - 1, static_cast<int>(std::ceil(max_r)));
    int c0 = std::max(0, static_cast<int>(std::floor(min_c - 0.5)));
    int c1 = std::min(cfg.size_px - 1, static_cast<int>(std::ceil(max_c)));
    for (int row = r0; row <= r1; ++row) {
        double x = (half - (row + 0.5)) * cfg.resolution;
        for (int col = c0; col <= c1; ++col) {
            double y = (half - (col + 0.5)) * cfg.resolution;
            if (scene::point_in_convex_polygon({x, y}, local, n)) r.at(channel, row, col) = 1.0f;
        }
    }
}

void fill_box(Raster& r, int channel, const RasterConfig& cfg, const scene::OrientedBox& box,
              const Pose2D& ref) {
    auto corners = box.corners();
    Vec2 local[4];
    for (int i = 0; i < 4; ++i) local[i] = scene::to_local(corners[i], ref);
    fill_convex(r, channel, cfg, local, 4);
}

void fill_disc(Raster& r, int channel, const RasterConfig& cfg, const Vec2& center_local,
               double radius) {
    double half = cfg.size_px * 0.5;
    double pr = half - center_local.x / cfg.resolution;
    double pc = half - center_local.y / cfg.resolution;
    double pix_rad = radius / cfg.resolution;
    int r0 = std::max(0, static_cast<int>(std::floor(pr - pix_rad - 1)));
    int r1 = std::min(cfg.size_px - 1, static_cast<int>(std::ceil(pr + pix_rad + 1)));
    int c0 = std::max(0, static_cast<int>(std::floor(pc - pix_rad - 1)));
    int c1 = std::min(cfg.size_px - 1, static_cast<int>(std::ceil(pc + pix_rad + 1)));
    for (int row = r0; row <= r1; ++row) {
        double x = (half - (row + 0.5)) * cfg.resolution;
        for (int col = c0; col <= c1; ++col) {
            double y = (half - (col + 0.5)) * cfg.resolution;
            if ((Vec2{x, y} - center_local).norm() <= radius) r.at(channel, row, col) = 1.0f;
        }
    }
}

}  // namespace

Raster render(const scene::Scene& s, int frame_index, const RasterConfig& config,
              const RenderOptions& options) {
    int h = config.history;
    if (frame_index < 0 || frame_index >= static_cast<int>(s.frames.size()))
        throw ValidationError("rasterize: frame index out of bounds");
    if (frame_index < h - 1) throw ValidationError("rasterize: insufficient history");
    if (config.size_px % 2 != 0) throw ValidationError("raster config: size_px even");
    if (!(config.resolution > 0.0)) throw ValidationError("raster config: resolution > 0");
    if (!options.ego_history.empty() && static_cast<int>(options.ego_history.size()) != h)
        throw ValidationError("rasterize: ego history override must have H poses");

    Pose2D ref = options.ref_pose ? *options.ref_pose : s.frames[frame_index].ego;

    Raster out;
    out.channels = config.channels();
    out.size = config.size_px;
    out.data.assign(static_cast<std::size_t>(out.channels) * out.size * out.size, 0.0f);

    // channel 0: drivable area (lane bands: a quad per segment + a disc per
    // interior joint so curved lanes have no seams)
    for (const auto& lane : s.map.lanes) {
        double hw = 0.5 * lane.width;
        for (std::size_t i = 0; i + 1 < lane.centerline.size(); ++i) {
            Vec2 a = scene::to_local(lane.centerline[i], ref);
            Vec2 b = scene::to_local(lane.centerline[i + 1], ref);
            Vec2 d = b - a;
            double len = d.norm();
            if (len <= 0.0) continue;
            Vec2 nrm{-d.y / len * hw, d.x / len * hw};
            Vec2 quad[4] = {a + nrm, b + nrm, b - nrm, a - nrm};
            fill_convex(out, 0, config, quad, 4);
            if (i + 2 < lane.centerline.size()) fill_disc(out, 0, config, b, hw);
        }
    }
    // channel 1: crosswalks
    for (const auto& poly : s.map.crosswalks) {
        std::vector<Vec2> local(poly.size());
        for (std::size_t i = 0; i < poly.size(); ++i) local[i] = scene::to_local(poly[i], ref);
        fill_convex(out, 1, config, local.data(), local.size());
    }
    // agent and ego history channels, oldest first, all in the reference frame
    for (int k = 0; k < h; ++k) {
        const scene::Frame& f = s.frames[frame_index - (h - 1) + k];
        int agent_ch = 2 + k;
        int ego_ch = 2 + h + k;
        for (const auto& a : f.agents) {
            if (options.mask_agent_id && a.agent_id == *options.mask_agent_id) continue;
            fill_box(out, agent_ch, config, a.box, ref);
        }
        if (!options.ego_history.empty()) {
            fill_box(out, ego_ch, config,
                     {options.ego_history[k], f.ego_extent.length, f.ego_extent.width}, ref);
        } else {
            fill_box(out, ego_ch, config, f.ego_box(), ref);
        }
    }
    return out;
}

void dump_raster_pgm(const Raster& r, const std::string& prefix) {
    for (int c = 0; c < r.channels; ++c) {
        char name[32];
        std::snprintf(name, sizeof(name), "_c%02d.pgm", c);
        std::ofstream out(prefix + name, std::ios::binary);
        out << "P5\n" << r.size << " " << r.size << "\n255\n";
        for (int row = 0; row < r.size; ++row)
            for (int col = 0; col < r.size; ++col)
                out.put(r.at(c, row, col) > 0.5f ? static_cast<char>(255) : static_cast<char>(0));
    }
}

}  // namespace planlab::raster
