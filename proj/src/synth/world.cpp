#include "planlab/synth/world.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>

#include "planlab/errors.hpp"
#include "planlab/rng.hpp"
#include "planlab/scene/geometry.hpp"
#include "planlab/scene/io.hpp"
#include "planlab/scene/polyline.hpp"

namespace planlab::synth {

using scene::Frame;
using scene::Lane;
using scene::OrientedBox;
using scene::PolylinePath;
using scene::Pose2D;
using scene::Scene;
using scene::SemanticMap;
using scene::Vec2;

namespace {

constexpr double kLaneWidth = 3.5;
constexpr double kRoadLength = 400.0;
constexpr double kCrosswalkDepth = 3.0;
constexpr double kPedSpeed = 1.4;
constexpr double kSimDt = 0.05;  // two substeps per recorded frame

void grow(scene::Aabb& b, const Vec2& p) {
    b.min_x = std::min(b.min_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_x = std::max(b.max_x, p.x);
    b.max_y = std::max(b.max_y, p.y);
}

void finalize_bounds(SemanticMap& m) {
    scene::Aabb b{1e18, 1e18, -1e18, -1e18};
    for (const auto& lane : m.lanes)
        for (const auto& p : lane.centerline) grow(b, p);
    for (const auto& poly : m.crosswalks)
        for (const auto& p : poly) grow(b, p);
    double pad = 2.0 * kLaneWidth;
    m.bounds = {b.min_x - pad, b.min_y - pad, b.max_x + pad, b.max_y + pad};
}

std::vector<Vec2> crosswalk_rect(const Vec2& center, const Vec2& along_road, double depth,
                                 double span) {
    Vec2 t = along_road;
    Vec2 n{-t.y, t.x};
    Vec2 hd = t * (0.5 * depth);
    Vec2 hs = n * (0.5 * span);
    return {center - hd - hs, center + hd - hs, center + hd + hs, center - hd + hs};
}

}  // namespace

MapStyle map_style_from_name(const std::string& name) {
    if (name == "straight-road") return MapStyle::kStraightRoad;
    if (name == "curved-road") return MapStyle::kCurvedRoad;
    if (name == "four-way-intersection") return MapStyle::kFourWayIntersection;
    throw ConfigError("unsupported map style: " + name);
}

std::string map_style_name(MapStyle style) {
    switch (style) {
        case MapStyle::kStraightRoad: return "straight-road";
        case MapStyle::kCurvedRoad: return "curved-road";
        case MapStyle::kFourWayIntersection: return "four-way-intersection";
    }
    throw ConfigError("unsupported map style enum value");
}

scene::SemanticMap build_map(const WorldSpec& spec) {
    if (spec.num_lanes < 1) throw ConfigError("world spec: num_lanes >= 1");
    Rng rng(derive_seed(spec.seed, 0xA11CE));
    SemanticMap m;
    switch (spec.style) {
        case MapStyle::kStraightRoad: {
            for (int i = 0; i < spec.num_lanes; ++i) {
                double y = i * kLaneWidth;
                m.lanes.push_back({{{0.0, y}, {kRoadLength, y}}, kLaneWidth});
            }
            double road_span = spec.num_lanes * kLaneWidth + 2.0;
            double road_mid_y = (spec.num_lanes - 1) * kLaneWidth * 0.5;
            int n_cw = 1 + rng.uniform_int(2);
            for (int k = 0; k < n_cw; ++k) {
                double station = rng.uniform(80.0, kRoadLength - 80.0);
                m.crosswalks.push_back(
                    crosswalk_rect({station, road_mid_y}, {1.0, 0.0}, kCrosswalkDepth, road_span));
            }
            break;
        }
        case MapStyle::kCurvedRoad: {
            double radius = 150.0;
            Vec2 center{0.0, radius};  // start at origin heading +x, turning left
            int n_cw = 1 + rng.uniform_int(2);
            std::vector<double> cw_stations;
            for (int k = 0; k < n_cw; ++k) cw_stations.push_back(rng.uniform(80.0, kRoadLength - 80.0));
            for (int i = 0; i < spec.num_lanes; ++i) {
                double r = radius - i * kLaneWidth;  // inner lanes turn tighter
                std::vector<Vec2> pts;
                for (double s = 0.0; s <= kRoadLength + 1e-9; s += 2.0) {
                    double a = s / radius;  // arc parameter of lane 0
                    pts.push_back({center.x + r * std::sin(a), center.y - r * std::cos(a)});
                }
                m.lanes.push_back({std::move(pts), kLaneWidth});
            }
            double road_span = spec.num_lanes * kLaneWidth + 2.0;
            for (double station : cw_stations) {
                double a = station / radius;
                double r_mid = radius - (spec.num_lanes - 1) * kLaneWidth * 0.5;
                Vec2 c{center.x + r_mid * std::sin(a), center.y - r_mid * std::cos(a)};
                Vec2 t{std::cos(a), std::sin(a)};
                m.crosswalks.push_back(crosswalk_rect(c, t, kCrosswalkDepth, road_span));
            }
            break;
        }
        case MapStyle::kFourWayIntersection: {
            double half = kRoadLength * 0.5;
            // ego road along +x (traffic lanes come first), cross road along +y
            for (int i = 0; i < spec.num_lanes; ++i) {
                double y = i * kLaneWidth;
                m.lanes.push_back({{{-half, y}, {half, y}}, kLaneWidth});
            }
            for (int i = 0; i < spec.num_lanes; ++i) {
                double x = -kLaneWidth - i * kLaneWidth;  // west of the ego road lanes
                m.lanes.push_back({{{x, -half}, {x, half}}, kLaneWidth});
            }
            double road_span = spec.num_lanes * kLaneWidth + 2.0;
            double road_mid_y = (spec.num_lanes - 1) * kLaneWidth * 0.5;
            double cross_half = spec.num_lanes * kLaneWidth + 2.0;
            // crosswalks on the ego road, both sides of the intersection
            m.crosswalks.push_back(crosswalk_rect({-cross_half - kLaneWidth, road_mid_y},
                                                  {1.0, 0.0}, kCrosswalkDepth, road_span));
            m.crosswalks.push_back(crosswalk_rect({cross_half + kLaneWidth, road_mid_y}, {1.0, 0.0},
                                                  kCrosswalkDepth, road_span));
            break;
        }
    }
    finalize_bounds(m);
    return m;
}

namespace {

struct CrosswalkOnLane {
    int crosswalk = -1;
    double stop_s = 0.0;   // front-bumper stop position (includes margin)
    double clear_s = 0.0;  // rear bumper past this = through
};

struct Vehicle {
    std::int64_t id = 0;
    int lane = 0;
    double s = 0.0;  // arclength of box center
    double v = 0.0;
    double v_des = 0.0;
    double length = 4.6;
    double width = 1.9;
    bool is_ego = false;
};

struct Pedestrian {
    std::int64_t id = 0;
    int crosswalk = 0;
    Vec2 start;
    Vec2 dir;  // unit
    double cross_len = 0.0;
    double desired_start = 0.0;
    double started_at = -1.0;
    double walked = 0.0;
};

struct IdmInput {
    double gap = std::numeric_limits<double>::infinity();
    double lead_v = 0.0;
};

double idm_accel(const ExpertParams& p, double v, double v_des, const IdmInput& in) {
    double free_term = v_des > 0.0 ? std::pow(v / v_des, 4.0) : 1.0;
    double a = p.a_max * (1.0 - free_term);
    if (std::isfinite(in.gap)) {
        double dv = v - in.lead_v;
        double s_star = p.s0 + std::max(0.0, v * p.t_headway + v * dv / (2.0 * std::sqrt(p.a_max * p.b)));
        double gap = std::max(in.gap, 0.1);
        a = p.a_max * (1.0 - free_term - (s_star / gap) * (s_star / gap));
    }
    return std::clamp(a, -p.b, p.a_max);
}

}  // namespace

SimResult simulate_scene_info(const SemanticMap& map, const WorldSpec& spec,
                              const ExpertParams& expert, std::uint64_t seed,
                              const SimOptions& options) {
    Rng rng(derive_seed(seed, 0x5CE2E));

    int traffic_lanes = std::min<int>(spec.num_lanes, static_cast<int>(map.lanes.size()));
    std::vector<PolylinePath> paths;
    paths.reserve(map.lanes.size());
    for (const auto& lane : map.lanes) paths.emplace_back(lane.centerline);

    // crosswalk geometry per traffic lane
    std::vector<std::vector<CrosswalkOnLane>> lane_crosswalks(traffic_lanes);
    std::vector<Vec2> cw_center(map.crosswalks.size());
    std::vector<Vec2> cw_long_dir(map.crosswalks.size());
    std::vector<double> cw_long_half(map.crosswalks.size());
    for (std::size_t c = 0; c < map.crosswalks.size(); ++c) {
        const auto& poly = map.crosswalks[c];
        Vec2 centroid{0, 0};
        for (const auto& p : poly) centroid = centroid + p;
        centroid = centroid * (1.0 / static_cast<double>(poly.size()));
        cw_center[c] = centroid;
        Vec2 e0 = poly[1] - poly[0];
        Vec2 e1 = poly[2] - poly[1];
        Vec2 longest = e0.norm() >= e1.norm() ? e0 : e1;
        double ln = longest.norm();
        cw_long_dir[c] = ln > 0 ? longest * (1.0 / ln) : Vec2{0, 1};
        cw_long_half[c] = 0.5 * ln;
        for (int l = 0; l < traffic_lanes; ++l) {
            double s_proj = paths[l].project(centroid);
            if (s_proj <= 1.0 || s_proj >= paths[l].length() - 1.0) continue;
            Pose2D at = paths[l].pose_at(s_proj);
            if ((at.position() - centroid).norm() > spec.num_lanes * kLaneWidth + 2.0) continue;
            // depth along the road from the polygon itself
            Vec2 t{std::cos(at.yaw), std::sin(at.yaw)};
            double half_depth = 0.0;
            for (const auto& p : poly)
                half_depth = std::max(half_depth, std::abs((p - centroid).dot(t)));
            lane_crosswalks[l].push_back({static_cast<int>(c),
                                          s_proj - half_depth - expert.crosswalk_margin,
                                          s_proj + half_depth});
        }
    }

    // ego
    std::vector<Vehicle> vehicles;
    Vehicle ego;
    ego.id = -1;
    ego.is_ego = true;
    ego.lane = 0;
    ego.s = 5.0;
    ego.v = 0.0;
    ego.v_des = std::min(expert.v0, spec.speed_limit);
    ego.length = spec.ego_extent.length;
    ego.width = spec.ego_extent.width;
    vehicles.push_back(ego);

    SimResult result;

    // traffic: a leader on the ego lane first, then rear / adjacent vehicles
    int n_vehicles = static_cast<int>(spec.traffic_density);
    if (rng.bernoulli(spec.traffic_density - n_vehicles)) n_vehicles += 1;
    n_vehicles = std::clamp(n_vehicles, 0, 6);

    std::int64_t next_id = 1;
    auto overlaps_same_lane = [&](const Vehicle& cand) {
        for (const auto& v : vehicles) {
            if (v.lane != cand.lane) continue;
            double gap = std::abs(v.s - cand.s) - 0.5 * (v.length + cand.length);
            if (gap < expert.s0) return true;
        }
        return false;
    };

    if (n_vehicles >= 1) {
        Vehicle lead;
        lead.id = next_id++;
        lead.lane = 0;
        lead.s = ego.s + rng.uniform(15.0, 60.0);
        bool stopped = rng.bernoulli(0.5);
        lead.v_des = stopped ? 0.0 : rng.uniform(2.0, 6.0);
        lead.v = lead.v_des;
        lead.length = rng.uniform(4.2, 5.2);
        lead.width = rng.uniform(1.7, 2.0);
        if (!options.omit_lead_vehicle) {
            vehicles.push_back(lead);
            result.has_lead_interaction = true;
            result.lead_agent_id = lead.id;
        }
    }
    for (int k = 1; k < n_vehicles; ++k) {
        Vehicle v;
        v.id = next_id++;
        bool rear = traffic_lanes == 1 || rng.bernoulli(0.3);
        for (int attempt = 0; attempt < 20; ++attempt) {
            if (rear) {
                v.lane = 0;
                v.s = ego.s - rng.uniform(10.0, 30.0);
                v.v = 0.0;
                v.v_des = rng.uniform(3.0, 8.0);
            } else {
                v.lane = 1 + rng.uniform_int(traffic_lanes - 1);
                v.s = ego.s + rng.uniform(-30.0, 80.0);
                v.v_des = rng.uniform(3.0, 8.0);
                v.v = v.v_des * rng.uniform(0.5, 1.0);
            }
            v.length = rng.uniform(4.2, 5.2);
            v.width = rng.uniform(1.7, 2.0);
            if (v.s - 0.5 * v.length > 1.0 && !overlaps_same_lane(v)) {
                vehicles.push_back(v);
                break;
            }
        }
    }

    // pedestrians
    std::vector<Pedestrian> peds;
    for (std::size_t c = 0; c < map.crosswalks.size(); ++c) {
        bool active = rng.bernoulli(spec.ped_crossing_prob);
        double desired_start = rng.uniform(2.0, 12.0);
        bool flip = rng.bernoulli(0.5);
        if (!active) continue;
        Pedestrian p;
        p.id = 100 + static_cast<std::int64_t>(c);
        p.crosswalk = static_cast<int>(c);
        Vec2 dir = cw_long_dir[c] * (flip ? -1.0 : 1.0);
        p.cross_len = 2.0 * (cw_long_half[c] + 1.0);
        p.start = cw_center[c] - dir * (cw_long_half[c] + 1.0);
        p.dir = dir;
        p.desired_start = desired_start;
        peds.push_back(p);
    }

    auto crosswalk_occupied = [&](int c) {
        for (const auto& p : peds)
            if (p.crosswalk == c && p.started_at >= 0.0 && p.walked < p.cross_len) return true;
        return false;
    };

    auto safe_to_cross = [&](int c) {
        for (const auto& v : vehicles) {
            for (const auto& col : lane_crosswalks[v.lane]) {
                if (col.crosswalk != c) continue;
                double front = v.s + 0.5 * v.length;
                double rear_bumper = v.s - 0.5 * v.length;
                if (rear_bumper > col.clear_s + 0.5) continue;       // already through
                double d = col.stop_s - front;
                if (v.v < 0.05 && d > 0.0) continue;                 // stopped short of line
                if (d > v.v * v.v / (2.0 * expert.b) + 0.5) continue;  // can stop in time
                return false;
            }
        }
        return true;
    };

    Scene& sc = result.scene;
    sc.scene_id = "scene";
    sc.map = map;
    sc.provenance.source = "synth-expert/" + map_style_name(spec.style);
    sc.provenance.seed = seed;

    for (int frame_idx = 0; frame_idx < scene::kSceneFrames; ++frame_idx) {
        double t = frame_idx * scene::kFrameDt;

        Frame f;
        f.index = frame_idx;
        Pose2D ego_pose = paths[0].pose_at(vehicles[0].s);
        f.ego = ego_pose;
        f.ego_extent = spec.ego_extent;
        for (std::size_t i = 1; i < vehicles.size(); ++i) {
            const Vehicle& v = vehicles[i];
            Pose2D pose = paths[v.lane].pose_at(v.s);
            f.agents.push_back({v.id, {pose, v.length, v.width}, v.v, scene::AgentClass::kVehicle});
        }
        for (const auto& p : peds) {
            Vec2 pos = p.start + p.dir * std::min(p.walked, p.cross_len);
            bool walking = p.started_at >= 0.0 && p.walked < p.cross_len;
            double yaw = std::atan2(p.dir.y, p.dir.x);
            f.agents.push_back({p.id, {{pos.x, pos.y, yaw}, 0.6, 0.6}, walking ? kPedSpeed : 0.0,
                                scene::AgentClass::kPedestrian});
        }
        sc.frames.push_back(std::move(f));

        if (frame_idx == scene::kSceneFrames - 1) break;

        for (int sub = 0; sub < 2; ++sub) {
            double now = t + sub * kSimDt;
            for (auto& p : peds) {
                if (p.started_at < 0.0 && now >= p.desired_start && safe_to_cross(p.crosswalk))
                    p.started_at = now;
                if (p.started_at >= 0.0 && p.walked < p.cross_len) p.walked += kPedSpeed * kSimDt;
            }
            std::vector<double> accel(vehicles.size(), 0.0);
            for (std::size_t i = 0; i < vehicles.size(); ++i) {
                const Vehicle& v = vehicles[i];
                IdmInput in;
                for (std::size_t j = 0; j < vehicles.size(); ++j) {
                    if (j == i || vehicles[j].lane != v.lane || vehicles[j].s <= v.s) continue;
                    double gap = vehicles[j].s - 0.5 * vehicles[j].length - (v.s + 0.5 * v.length);
                    if (gap < in.gap) in = {gap, vehicles[j].v};
                }
                for (const auto& col : lane_crosswalks[v.lane]) {
                    if (!crosswalk_occupied(col.crosswalk)) continue;
                    double d = col.stop_s - (v.s + 0.5 * v.length);
                    if (d < -0.3) continue;  // past the line, keep going
                    if (d < in.gap) in = {d, 0.0};
                }
                // end of the lane acts as a stopped leader
                double end_gap = paths[v.lane].length() - 2.0 - (v.s + 0.5 * v.length);
                if (end_gap < in.gap) in = {end_gap, 0.0};
                accel[i] = idm_accel(expert, v.v, v.v_des, in);
            }
            for (std::size_t i = 0; i < vehicles.size(); ++i) {
                Vehicle& v = vehicles[i];
                v.v = std::max(0.0, v.v + accel[i] * kSimDt);
                v.s += v.v * kSimDt;
            }
        }
    }

    return result;
}

DatasetGenResult generate_dataset(const WorldSpec& spec, const ExpertParams& expert, int n_scenes,
                                  std::uint64_t seed, const std::string& out_dir) {
    if (n_scenes < 1) throw ConfigError("generate_dataset: n_scenes >= 1");
    std::filesystem::create_directories(out_dir);
    DatasetGenResult out;
    for (int i = 0; i < n_scenes; ++i) {
        std::uint64_t scene_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
        WorldSpec s = spec;
        s.seed = scene_seed;
        SemanticMap map = build_map(s);

        SimResult sim;
        bool clean = false;
        for (int retry = 0; retry < 4 && !clean; ++retry) {
            sim = simulate_scene_info(map, s, expert, derive_seed(scene_seed, retry));
            clean = true;
            for (const auto& f : sim.scene.frames) {
                for (const auto& a : f.agents) {
                    if (scene::boxes_overlap(f.ego_box(), a.box)) {
                        clean = false;
                        break;
                    }
                }
                if (!clean) break;
            }
        }
        if (!clean) throw std::logic_error("generate_dataset: expert not collision-free");

        char name[64];
        std::snprintf(name, sizeof(name), "scene_%016llx_%04d",
                      static_cast<unsigned long long>(seed), i);
        sim.scene.scene_id = name;
        std::string file = std::string(name) + ".json";
        scene::save_scene(sim.scene, (std::filesystem::path(out_dir) / file).string());
        // manifest paths are relative to the manifest's own directory
        out.manifest.scene_paths.push_back(file);
        out.has_lead_interaction.push_back(sim.has_lead_interaction);
    }
    out.manifest.hours_equivalent = scene::hours_for_scenes(out.manifest.scene_paths.size());
    out.manifest.provenance.source = "synth-expert/" + map_style_name(spec.style);
    out.manifest.provenance.seed = seed;
    return out;
}

}  // namespace planlab::synth
