#pragma once

#include <vector>

#include "planlab/scene/geometry.hpp"
#include "planlab/scene/types.hpp"

namespace planlab::scene {

/// Arclength-parameterized polyline; used for lane following and for
/// measuring deviation from a reference path.
class PolylinePath {
public:
    PolylinePath() = default;
    explicit PolylinePath(std::vector<Vec2> points);

    double length() const { return cum_.empty() ? 0.0 : cum_.back(); }
    const std::vector<Vec2>& points() const { return pts_; }

    /// Position at arclength s (clamped to [0, length]); heading is the
    /// tangent direction of the containing segment.
    Pose2D pose_at(double s) const;

    /// Arclength of the closest point on the path to p.
    double project(const Vec2& p) const;

    double distance_to(const Vec2& p) const { return point_polyline_distance(p, pts_); }

private:
    std::vector<Vec2> pts_;
    std::vector<double> cum_;  // cumulative arclength per point
};

}  // namespace planlab::scene
