#include "planlab/scene/geometry.hpp"

#include <algorithm>
#include <limits>

namespace planlab::scene {

double sat_margin(const OrientedBox& a, const OrientedBox& b) {
    auto ca = a.corners();
    auto cb = b.corners();
    double margin = std::numeric_limits<double>::infinity();

    auto test_axes = [&](const OrientedBox& box) {
        double c = std::cos(box.center.yaw), s = std::sin(box.center.yaw);
        Vec2 axes[2] = {{c, s}, {-s, c}};
        for (const Vec2& ax : axes) {
            double amin = std::numeric_limits<double>::infinity(), amax = -amin;
            double bmin = amin, bmax = amax;
            for (const Vec2& p : ca) {
                double v = p.dot(ax);
                amin = std::min(amin, v);
                amax = std::max(amax, v);
            }
            for (const Vec2& p : cb) {
                double v = p.dot(ax);
                bmin = std::min(bmin, v);
                bmax = std::max(bmax, v);
            }
            // overlap of the two projection intervals (negative = gap)
            double ov = std::min(amax, bmax) - std::max(amin, bmin);
            margin = std::min(margin, ov);
        }
    };
    test_axes(a);
    test_axes(b);
    return margin;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double len2 = ab.dot(ab);
    if (len2 <= 0.0) return (p - a).norm();
    double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

double point_polyline_distance(const Vec2& p, const std::vector<Vec2>& poly) {
    if (poly.empty()) return std::numeric_limits<double>::infinity();
    if (poly.size() == 1) return (p - poly[0]).norm();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        best = std::min(best, point_segment_distance(p, poly[i], poly[i + 1]));
    }
    return best;
}

bool point_in_convex_polygon(const Vec2& p, const Vec2* poly, std::size_t n) {
    if (n < 3) return false;
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        if (cross > 0.0) has_pos = true;
        if (cross < 0.0) has_neg = true;
        if (has_pos && has_neg) return false;
    }
    return true;
}

}  // namespace planlab::scene
