#pragma once

#include "planlab/scene/types.hpp"

namespace planlab::scene {

/// World point -> local frame coordinates (x forward, y left).
inline Vec2 to_local(const Vec2& p, const Pose2D& frame) {
    double c = std::cos(frame.yaw), s = std::sin(frame.yaw);
    double dx = p.x - frame.x, dy = p.y - frame.y;
    return {c * dx + s * dy, -s * dx + c * dy};
}

/// Local frame coordinates -> world point. Inverse of to_local.
inline Vec2 to_world(const Vec2& p, const Pose2D& frame) {
    double c = std::cos(frame.yaw), s = std::sin(frame.yaw);
    return {frame.x + c * p.x - s * p.y, frame.y + s * p.x + c * p.y};
}

/// Separating-axis margin over the 4 edge normals of the two boxes.
/// Positive: boxes overlap with at least this penetration along every axis.
/// Negative: a separating axis exists with at least this gap.
double sat_margin(const OrientedBox& a, const OrientedBox& b);

/// True iff the closed rectangles intersect (separating-axis test).
inline bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
    return sat_margin(a, b) >= 0.0;
}

/// IoU of two same-size axis-aligned boxes offset by (dx, dy).
inline double iou_same_size(double length, double width, double dx, double dy) {
    double inter = std::max(0.0, length - std::abs(dx)) * std::max(0.0, width - std::abs(dy));
    double uni = 2.0 * length * width - inter;
    return inter / uni;
}

/// Distance from point to segment [a, b].
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// Distance from point to a polyline (>= 1 point).
double point_polyline_distance(const Vec2& p, const std::vector<Vec2>& poly);

/// Point-in-convex-polygon test (closed; boundary counts as inside).
/// Vertices may be in either winding order.
bool point_in_convex_polygon(const Vec2& p, const Vec2* poly, std::size_t n);

}  // namespace planlab::scene
