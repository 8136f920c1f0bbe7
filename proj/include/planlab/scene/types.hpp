#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "planlab/degrade/config.hpp"

namespace planlab::scene {

constexpr double kFrameDt = 0.1;  // 10 Hz perception refresh
constexpr int kSceneFrames = 250; // 25 s scenes

/// Wrap an angle to (-pi, pi].
inline double normalize_angle(double a) {
    double r = std::remainder(a, 2.0 * M_PI);
    if (r <= -M_PI) r += 2.0 * M_PI;
    return r;
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }

    friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// 2D pose; yaw is counter-clockwise from world +x, normalized to (-pi, pi].
struct Pose2D {
    double x = 0.0;    // meters
    double y = 0.0;    // meters
    double yaw = 0.0;  // radians

    Vec2 position() const { return {x, y}; }

    friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

/// Rectangle with an oriented center pose; length is the longitudinal extent
/// (along yaw), width the lateral extent.
struct OrientedBox {
    Pose2D center;
    double length = 0.0;  // meters, > 0
    double width = 0.0;   // meters, > 0

    std::array<Vec2, 4> corners() const {
        double c = std::cos(center.yaw), s = std::sin(center.yaw);
        double hl = 0.5 * length, hw = 0.5 * width;
        auto pt = [&](double lx, double ly) -> Vec2 {
            return {center.x + c * lx - s * ly, center.y + s * lx + c * ly};
        };
        return {pt(hl, hw), pt(hl, -hw), pt(-hl, -hw), pt(-hl, hw)};
    }

    friend bool operator==(const OrientedBox&, const OrientedBox&) = default;
};

enum class AgentClass { kVehicle, kPedestrian };

struct AgentObservation {
    std::int64_t agent_id = 0;  // stable across the scene
    OrientedBox box;
    double speed = 0.0;  // m/s, >= 0
    AgentClass agent_class = AgentClass::kVehicle;

    friend bool operator==(const AgentObservation&, const AgentObservation&) = default;
};

struct Extent {
    double length = 0.0;
    double width = 0.0;

    friend bool operator==(const Extent&, const Extent&) = default;
};

struct Frame {
    int index = 0;  // >= 0; time_s() = index * 0.1 exactly
    Pose2D ego;
    Extent ego_extent;
    std::vector<AgentObservation> agents;

    double time_s() const { return index * kFrameDt; }
    OrientedBox ego_box() const { return {ego, ego_extent.length, ego_extent.width}; }

    friend bool operator==(const Frame&, const Frame&) = default;
};

struct Lane {
    std::vector<Vec2> centerline;  // >= 2 points
    double width = 0.0;            // > 0

    friend bool operator==(const Lane&, const Lane&) = default;
};

struct Aabb {
    double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;

    friend bool operator==(const Aabb&, const Aabb&) = default;
};

struct SemanticMap {
    std::vector<Lane> lanes;
    std::vector<std::vector<Vec2>> crosswalks;  // convex polygons
    Aabb bounds;

    friend bool operator==(const SemanticMap&, const SemanticMap&) = default;
};

/// Where a scene came from: generator label + seed, and the degradation
/// applied (nullopt = AV-grade).
struct Provenance {
    std::string source = "unknown";
    std::uint64_t seed = 0;
    std::optional<degrade::DegradationConfig> degradation;

    std::string quality_label() const { return degradation ? "degraded" : "av-grade"; }

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// A 25 s, 10 Hz log of ego pose and agent observations over a semantic map.
struct Scene {
    std::string scene_id;
    double dt_s = kFrameDt;
    SemanticMap map;
    std::vector<Frame> frames;  // contiguous indices from 0
    Provenance provenance;

    friend bool operator==(const Scene&, const Scene&) = default;
};

struct DatasetManifest {
    std::vector<std::string> scene_paths;
    double hours_equivalent = 0.0;  // scenes * 25 / 3600
    Provenance provenance;

    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

inline double hours_for_scenes(std::size_t n) {
    return static_cast<double>(n) * 25.0 / 3600.0;
}

}  // namespace planlab::scene
