#include "planlab/scene/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "planlab/degrade/config_json.hpp"

namespace planlab::scene {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

bool finite(double v) { return std::isfinite(v); }

json pose_to_json(const Pose2D& p) { return json::array({p.x, p.y, p.yaw}); }

Pose2D pose_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ParseError("pose: expected [x, y, yaw]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec_list_to_json(const std::vector<Vec2>& pts) {
    json a = json::array();
    for (const auto& p : pts) a.push_back(json::array({p.x, p.y}));
    return a;
}

std::vector<Vec2> vec_list_from_json(const json& j) {
    std::vector<Vec2> pts;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2) throw ParseError("point: expected [x, y]");
        pts.push_back({e[0].get<double>(), e[1].get<double>()});
    }
    return pts;
}

json map_to_json(const SemanticMap& m) {
    json j;
    json lanes = json::array();
    for (const auto& lane : m.lanes) {
        lanes.push_back({{"centerline", vec_list_to_json(lane.centerline)}, {"width", lane.width}});
    }
    j["lanes"] = std::move(lanes);
    json cw = json::array();
    for (const auto& poly : m.crosswalks) cw.push_back(vec_list_to_json(poly));
    j["crosswalks"] = std::move(cw);
    j["bounds"] = json::array({m.bounds.min_x, m.bounds.min_y, m.bounds.max_x, m.bounds.max_y});
    return j;
}

SemanticMap map_from_json(const json& j) {
    SemanticMap m;
    for (const auto& lj : j.at("lanes")) {
        m.lanes.push_back({vec_list_from_json(lj.at("centerline")), lj.at("width").get<double>()});
    }
    for (const auto& cj : j.at("crosswalks")) m.crosswalks.push_back(vec_list_from_json(cj));
    const auto& b = j.at("bounds");
    if (!b.is_array() || b.size() != 4) throw ParseError("map bounds: expected [min_x, min_y, max_x, max_y]");
    m.bounds = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
    return m;
}

json provenance_to_json(const Provenance& p) {
    json j;
    j["source"] = p.source;
    j["seed"] = p.seed;
    j["degradation"] = p.degradation ? degrade::to_json(*p.degradation) : json(nullptr);
    return j;
}

Provenance provenance_from_json(const json& j) {
    Provenance p;
    p.source = j.at("source").get<std::string>();
    p.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("degradation").is_null()) p.degradation = degrade::config_from_json(j.at("degradation"));
    return p;
}

const char* class_name(AgentClass c) {
    return c == AgentClass::kVehicle ? "vehicle" : "pedestrian";
}

AgentClass class_from_name(const std::string& s) {
    if (s == "vehicle") return AgentClass::kVehicle;
    if (s == "pedestrian") return AgentClass::kPedestrian;
    throw ParseError("agent class: expected \"vehicle\" or \"pedestrian\", got \"" + s + "\"");
}

}  // namespace

void validate_map(const SemanticMap& m) {
    auto in_bounds = [&](const Vec2& p) {
        return p.x >= m.bounds.min_x && p.x <= m.bounds.max_x && p.y >= m.bounds.min_y &&
               p.y <= m.bounds.max_y;
    };
    for (const auto& lane : m.lanes) {
        if (lane.centerline.size() < 2)
            throw ValidationError("map: each lane centerline has >= 2 points");
        if (!(lane.width > 0.0)) throw ValidationError("map: lane width > 0");
        for (const auto& p : lane.centerline)
            if (!in_bounds(p)) throw ValidationError("map: all geometry within bounds");
    }
    for (const auto& poly : m.crosswalks) {
        if (poly.size() < 3) throw ValidationError("map: crosswalk polygon has >= 3 points");
        for (const auto& p : poly)
            if (!in_bounds(p)) throw ValidationError("map: all geometry within bounds");
    }
}

void validate_scene(const Scene& scene) {
    if (scene.dt_s != kFrameDt) throw ValidationError("scene: dt_s = 0.1");
    validate_map(scene.map);
    std::unordered_map<std::int64_t, AgentClass> classes;
    for (std::size_t i = 0; i < scene.frames.size(); ++i) {
        const Frame& f = scene.frames[i];
        if (f.index != static_cast<int>(i)) throw ValidationError("scene: frames contiguous");
        if (!finite(f.ego.x) || !finite(f.ego.y) || !finite(f.ego.yaw))
            throw ValidationError("scene: ego pose finite");
        if (!(f.ego_extent.length > 0.0 && f.ego_extent.width > 0.0))
            throw ValidationError("scene: ego extent positive");
        std::unordered_set<std::int64_t> ids;
        for (const auto& a : f.agents) {
            if (!ids.insert(a.agent_id).second)
                throw ValidationError("scene: agent ids unique per frame");
            if (!(a.box.length > 0.0 && a.box.width > 0.0))
                throw ValidationError("scene: agent box extents positive");
            if (!finite(a.speed) || a.speed < 0.0)
                throw ValidationError("scene: agent speed finite and non-negative");
            if (!finite(a.box.center.x) || !finite(a.box.center.y) || !finite(a.box.center.yaw))
                throw ValidationError("scene: agent pose finite");
            // one physical agent per id across the scene
            auto [it, inserted] = classes.emplace(a.agent_id, a.agent_class);
            if (!inserted && it->second != a.agent_class)
                throw ValidationError("scene: agent_id refers to one physical agent");
        }
    }
}

void validate_manifest(const DatasetManifest& m) {
    double expected = hours_for_scenes(m.scene_paths.size());
    if (std::abs(m.hours_equivalent - expected) > 1e-9)
        throw ValidationError("manifest: hours-equivalent consistent with scene count");
}

void save_scene(const Scene& scene, const std::string& path) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["scene_id"] = scene.scene_id;
    j["dt_s"] = scene.dt_s;
    j["map"] = map_to_json(scene.map);
    json frames = json::array();
    for (const Frame& f : scene.frames) {
        json fj;
        fj["index"] = f.index;
        fj["ego"] = pose_to_json(f.ego);
        fj["ego_extent"] = json::array({f.ego_extent.length, f.ego_extent.width});
        json agents = json::array();
        for (const auto& a : f.agents) {
            agents.push_back({{"id", a.agent_id},
                              {"box", json::array({a.box.center.x, a.box.center.y, a.box.center.yaw,
                                                   a.box.length, a.box.width})},
                              {"speed", a.speed},
                              {"class", class_name(a.agent_class)}});
        }
        fj["agents"] = std::move(agents);
        frames.push_back(std::move(fj));
    }
    j["frames"] = std::move(frames);
    j["provenance"] = provenance_to_json(scene.provenance);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << j.dump(1, '\t') << "\n";
    if (!out) throw ParseError("write failed: " + path);
}

Scene load_scene(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    Scene scene;
    try {
        int version = j.at("schema_version").get<int>();
        if (version != kSchemaVersion)
            throw ParseError(path + ": unsupported schema_version " + std::to_string(version));
        scene.scene_id = j.at("scene_id").get<std::string>();
        scene.dt_s = j.at("dt_s").get<double>();
        scene.map = map_from_json(j.at("map"));
        for (const auto& fj : j.at("frames")) {
            Frame f;
            f.index = fj.at("index").get<int>();
            f.ego = pose_from_json(fj.at("ego"));
            const auto& ee = fj.at("ego_extent");
            f.ego_extent = {ee.at(0).get<double>(), ee.at(1).get<double>()};
            for (const auto& aj : fj.at("agents")) {
                AgentObservation a;
                a.agent_id = aj.at("id").get<std::int64_t>();
                const auto& b = aj.at("box");
                if (!b.is_array() || b.size() != 5)
                    throw ParseError("agent box: expected [x, y, yaw, length, width]");
                a.box = {{b[0].get<double>(), b[1].get<double>(), b[2].get<double>()},
                         b[3].get<double>(), b[4].get<double>()};
                a.speed = aj.at("speed").get<double>();
                a.agent_class = class_from_name(aj.at("class").get<std::string>());
                f.agents.push_back(std::move(a));
            }
            scene.frames.push_back(std::move(f));
        }
        scene.provenance = provenance_from_json(j.at("provenance"));
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    validate_scene(scene);
    return scene;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["scenes"] = manifest.scene_paths;
    j["hours_equivalent"] = manifest.hours_equivalent;
    j["provenance"] = provenance_to_json(manifest.provenance);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << j.dump(1, '\t') << "\n";
    if (!out) throw ParseError("write failed: " + path);
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    DatasetManifest m;
    try {
        m.scene_paths = j.at("scenes").get<std::vector<std::string>>();
        m.hours_equivalent = j.at("hours_equivalent").get<double>();
        m.provenance = provenance_from_json(j.at("provenance"));
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    validate_manifest(m);
    return m;
}

void save_map(const SemanticMap& map, const std::string& path) {
    validate_map(map);
    json j;
    j["schema_version"] = kSchemaVersion;
    j["map"] = map_to_json(map);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << j.dump(1, '\t') << "\n";
    if (!out) throw ParseError("write failed: " + path);
}

SemanticMap load_map(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    SemanticMap m;
    try {
        m = map_from_json(j.at("map"));
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    validate_map(m);
    return m;
}

}  // namespace planlab::scene
