#include "planlab/scene/polyline.hpp"

#include <algorithm>
#include <cmath>

namespace planlab::scene {

PolylinePath::PolylinePath(std::vector<Vec2> points) : pts_(std::move(points)) {
    cum_.reserve(pts_.size());
    double s = 0.0;
    for (std::size_t i = 0; i < pts_.size(); ++i) {
        if (i > 0) s += (pts_[i] - pts_[i - 1]).norm();
        cum_.push_back(s);
    }
}

Pose2D PolylinePath::pose_at(double s) const {
    if (pts_.empty()) return {};
    if (pts_.size() == 1) return {pts_[0].x, pts_[0].y, 0.0};
    s = std::clamp(s, 0.0, length());
    auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    std::size_t i = std::min<std::size_t>(
        pts_.size() - 2, it == cum_.begin() ? 0 : static_cast<std::size_t>(it - cum_.begin()) - 1);
    Vec2 a = pts_[i], b = pts_[i + 1];
    double seg = cum_[i + 1] - cum_[i];
    double t = seg > 0.0 ? (s - cum_[i]) / seg : 0.0;
    Vec2 p = a + (b - a) * t;
    double yaw = std::atan2(b.y - a.y, b.x - a.x);
    return {p.x, p.y, yaw};
}

double PolylinePath::project(const Vec2& p) const {
    if (pts_.size() < 2) return 0.0;
    double best_d = std::numeric_limits<double>::infinity();
    double best_s = 0.0;
    for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
        Vec2 a = pts_[i], b = pts_[i + 1];
        Vec2 ab = b - a;
        double len2 = ab.dot(ab);
        double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
        Vec2 q = a + ab * t;
        double d = (p - q).norm();
        if (d < best_d) {
            best_d = d;
            best_s = cum_[i] + t * std::sqrt(len2);
        }
    }
    return best_s;
}

}  // namespace planlab::scene
