#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "planlab/scene/io.hpp"

using namespace planlab;
namespace fs = std::filesystem;

namespace {

std::string tmp_path(const std::string& name) {
    return (fs::temp_directory_path() / ("planlab_io_" + name)).string();
}

}  // namespace

TEST_CASE("scene save/load round trip is exact") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        scene::Scene s = testfix::random_scene(seed);
        std::string path = tmp_path("roundtrip.json");
        scene::save_scene(s, path);
        scene::Scene back = scene::load_scene(path);
        CHECK(back == s);
    }
}

TEST_CASE("scene with degradation provenance round trips") {
    scene::Scene s = testfix::random_scene(9);
    degrade::DegradationConfig c;
    c.range_m = 40.0;
    c.fov_deg = 130.0;
    c.target_iou = 0.37;
    c.rot_noise_max_rad = 0.1;
    c.seed = 77;
    s.provenance.degradation = c;
    std::string path = tmp_path("degraded.json");
    scene::save_scene(s, path);
    CHECK(scene::load_scene(path) == s);
    CHECK(scene::load_scene(path).provenance.quality_label() == "degraded");
}

TEST_CASE("validation rejects broken scenes naming the invariant") {
    scene::Scene s = testfix::random_scene(4);

    SUBCASE("non-contiguous frames") {
        s.frames[3].index = 9;
        CHECK_THROWS_WITH_AS(scene::validate_scene(s),
                             doctest::Contains("contiguous"), ValidationError);
    }
    SUBCASE("duplicate agent id in a frame") {
        s.frames[0].agents.push_back(s.frames[0].agents[0]);
        CHECK_THROWS_WITH_AS(scene::validate_scene(s), doctest::Contains("unique"),
                             ValidationError);
    }
    SUBCASE("agent class flips mid-scene") {
        s.frames[1].agents[0].agent_class = scene::AgentClass::kPedestrian;
        CHECK_THROWS_WITH_AS(scene::validate_scene(s),
                             doctest::Contains("one physical agent"), ValidationError);
    }
    SUBCASE("non-positive extent") {
        s.frames[0].agents[0].box.width = 0.0;
        CHECK_THROWS_AS(scene::validate_scene(s), ValidationError);
    }
    SUBCASE("non-finite pose") {
        s.frames[0].ego.x = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(scene::validate_scene(s), ValidationError);
    }
}

TEST_CASE("load rejects malformed files with ParseError") {
    std::string path = tmp_path("garbage.json");
    std::ofstream(path) << "{not json";
    CHECK_THROWS_AS(scene::load_scene(path), ParseError);
    std::ofstream(path) << "{\"schema_version\": 1}";
    CHECK_THROWS_AS(scene::load_scene(path), ParseError);
    CHECK_THROWS_AS(scene::load_scene(tmp_path("missing_file.json")), ParseError);
}

TEST_CASE("manifest round trip and hours consistency") {
    scene::DatasetManifest m;
    m.scene_paths = {"a.json", "b.json", "c.json"};
    m.hours_equivalent = scene::hours_for_scenes(3);
    m.provenance.source = "test";
    m.provenance.seed = 5;
    std::string path = tmp_path("manifest.json");
    scene::save_manifest(m, path);
    CHECK(scene::load_manifest(path) == m);

    m.hours_equivalent = 99.0;
    CHECK_THROWS_WITH_AS(scene::validate_manifest(m), doctest::Contains("hours"),
                         ValidationError);
}

TEST_CASE("map save/load round trip") {
    scene::SemanticMap m = testfix::straight_map();
    m.crosswalks.push_back({{50, -2}, {53, -2}, {53, 6}, {50, 6}});
    std::string path = tmp_path("map.json");
    scene::save_map(m, path);
    CHECK(scene::load_map(path) == m);
}
