#pragma once

// Shared scene fixtures for the test binaries.

#include <cmath>
#include <string>
#include <vector>

#include "planlab/rng.hpp"
#include "planlab/scene/types.hpp"

namespace planlab::testfix {

/// Straight two-lane road map, 400 m, no crosswalks.
inline scene::SemanticMap straight_map() {
    scene::SemanticMap m;
    for (int lane = 0; lane < 2; ++lane) {
        scene::Lane l;
        l.width = 3.5;
        for (int i = 0; i <= 40; ++i) l.centerline.push_back({i * 10.0, lane * 3.5});
        m.lanes.push_back(l);
    }
    m.bounds = {-10.0, -10.0, 410.0, 20.0};
    return m;
}

/// Ego driving +x at constant speed with optional constant-velocity agents.
/// agent spec: (id, x0, y, speed).
struct AgentSpec {
    std::int64_t id;
    double x0, y, speed;
};

inline scene::Scene constant_velocity_scene(double ego_speed,
                                            const std::vector<AgentSpec>& agents,
                                            int n_frames = 250,
                                            const std::string& id = "fixture") {
    scene::Scene s;
    s.scene_id = id;
    s.map = straight_map();
    s.provenance.source = "fixture";
    for (int k = 0; k < n_frames; ++k) {
        scene::Frame f;
        f.index = k;
        f.ego = {ego_speed * 0.1 * k, 0.0, 0.0};
        f.ego_extent = {4.87, 1.85};
        for (const AgentSpec& a : agents) {
            scene::AgentObservation obs;
            obs.agent_id = a.id;
            obs.box = {{a.x0 + a.speed * 0.1 * k, a.y, 0.0}, 4.5, 1.8};
            obs.speed = a.speed;
            f.agents.push_back(obs);
        }
        s.frames.push_back(std::move(f));
    }
    return s;
}

/// Random but valid scene for serialization round trips.
inline scene::Scene random_scene(std::uint64_t seed, int n_frames = 30) {
    Rng rng(seed);
    std::vector<AgentSpec> agents;
    int n_agents = 1 + rng.uniform_int(4);
    for (int i = 0; i < n_agents; ++i)
        agents.push_back({100 + i, rng.uniform(10.0, 300.0), rng.uniform(-3.0, 7.0),
                          rng.uniform(0.0, 8.0)});
    scene::Scene s = constant_velocity_scene(rng.uniform(2.0, 9.0), agents, n_frames,
                                             "random_" + std::to_string(seed));
    for (auto& f : s.frames) {
        f.ego.y = 0.05 * std::sin(0.1 * f.index);
        for (auto& a : f.agents) a.box.center.yaw = rng.uniform(-0.2, 0.2);
    }
    return s;
}

}  // namespace planlab::testfix
