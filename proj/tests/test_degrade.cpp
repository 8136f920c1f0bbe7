#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "fixtures.hpp"
#include "planlab/degrade/config_json.hpp"
#include "planlab/degrade/degrade.hpp"
#include "planlab/scene/geometry.hpp"

using namespace planlab;
using scene::Scene;

namespace {

Scene busy_scene() {
    // agents spread over distance and bearing, ego moving
    return testfix::constant_velocity_scene(
        5.0,
        {{1, 20.0, 0.0, 5.0},    // ahead, same lane
         {2, 60.0, 3.5, 3.0},    // ahead, left lane
         {3, -15.0, 0.0, 5.0},   // behind
         {4, 10.0, -30.0, 0.0},  // far right
         {5, 150.0, 0.0, 0.0}},  // far ahead
        100);
}

}  // namespace

TEST_CASE("identity config returns the scene bit-identically") {
    Scene s = busy_scene();
    degrade::DegradationConfig c;
    c.seed = 123;  // seed alone does not make it non-identity
    CHECK(c.is_identity());
    Scene d = degrade::degrade_scene(s, c);
    CHECK(d == s);
}

TEST_CASE("range clipping keeps exactly the observations within range") {
    Scene s = busy_scene();
    for (double range : {20.0, 40.0, 80.0}) {
        Scene d = degrade::clip_range(s, range);
        REQUIRE(d.frames.size() == s.frames.size());
        for (std::size_t k = 0; k < s.frames.size(); ++k) {
            // oracle: recompute membership from the original frame
            std::size_t expected = 0;
            for (const auto& a : s.frames[k].agents) {
                double dist =
                    (a.box.center.position() - s.frames[k].ego.position()).norm();
                if (dist <= range) {
                    ++expected;
                    bool found = false;
                    for (const auto& b : d.frames[k].agents)
                        if (b.agent_id == a.agent_id && b == a) found = true;
                    CHECK(found);
                }
            }
            CHECK(d.frames[k].agents.size() == expected);
        }
    }
}

TEST_CASE("range clipping is monotone: smaller range observes a subset") {
    Scene s = busy_scene();
    Scene d20 = degrade::clip_range(s, 20.0);
    Scene d60 = degrade::clip_range(s, 60.0);
    for (std::size_t k = 0; k < s.frames.size(); ++k) {
        for (const auto& a : d20.frames[k].agents) {
            bool in_larger = false;
            for (const auto& b : d60.frames[k].agents)
                if (b.agent_id == a.agent_id) in_larger = true;
            CHECK(in_larger);
        }
    }
}

TEST_CASE("fov clipping keeps exactly the observations inside the cone") {
    Scene s = busy_scene();
    for (double fov : {70.0, 130.0, 270.0}) {
        Scene d = degrade::clip_fov(s, fov);
        for (std::size_t k = 0; k < s.frames.size(); ++k) {
            std::size_t expected = 0;
            for (const auto& a : s.frames[k].agents) {
                scene::Vec2 local =
                    scene::to_local(a.box.center.position(), s.frames[k].ego);
                double bearing = std::atan2(local.y, local.x);
                if (std::abs(bearing) <= fov * M_PI / 180.0 / 2.0) ++expected;
            }
            CHECK(d.frames[k].agents.size() == expected);
        }
    }
    // 360 keeps everything
    CHECK(degrade::clip_fov(s, 360.0) == s);
}

TEST_CASE("iou_offsets hit the requested IoU exactly") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        double l = rng.uniform(1.0, 6.0), w = rng.uniform(0.5, 3.0);
        double q = rng.uniform(0.05, 0.95);
        degrade::Offset2 off = degrade::iou_offsets(l, w, q, rng);
        CHECK(scene::iou_same_size(l, w, off.dx, off.dy) == doctest::Approx(q).epsilon(1e-9));
    }
    // q = 1 leaves the box untouched
    degrade::Offset2 off = degrade::iou_offsets(4.0, 2.0, 1.0, rng);
    CHECK(off.dx == 0.0);
    CHECK(off.dy == 0.0);
}

TEST_CASE("positional noise: per-track constant offset with the requested IoU") {
    Scene s = busy_scene();
    double q = 0.4;
    Scene d = degrade::apply_positional_noise(s, q, 99);
    REQUIRE(d.frames.size() == s.frames.size());
    std::map<std::int64_t, std::pair<double, double>> track_offset;
    for (std::size_t k = 0; k < s.frames.size(); ++k) {
        REQUIRE(d.frames[k].agents.size() == s.frames[k].agents.size());
        for (std::size_t i = 0; i < s.frames[k].agents.size(); ++i) {
            const auto& orig = s.frames[k].agents[i];
            const auto& noisy = d.frames[k].agents[i];
            CHECK(noisy.agent_id == orig.agent_id);
            CHECK(noisy.box.center.yaw == orig.box.center.yaw);
            // realized offset measured in the agent frame
            scene::Vec2 local =
                scene::to_local(noisy.box.center.position(), orig.box.center);
            double iou = scene::iou_same_size(orig.box.length, orig.box.width, local.x, local.y);
            CHECK(iou == doctest::Approx(q).epsilon(1e-9));
            auto [it, inserted] =
                track_offset.emplace(orig.agent_id, std::make_pair(local.x, local.y));
            if (!inserted) {
                CHECK(local.x == doctest::Approx(it->second.first).epsilon(1e-9));
                CHECK(local.y == doctest::Approx(it->second.second).epsilon(1e-9));
            }
        }
    }
    // different agents draw different offsets
    CHECK(track_offset.size() >= 4);
    std::set<double> dxs;
    for (const auto& [id, off] : track_offset) dxs.insert(off.first);
    CHECK(dxs.size() >= 3);
}

TEST_CASE("rotational noise: per-track draws with the configured scale") {
    // many single-agent scenes to sample the noise distribution
    double scale = 30.0 * M_PI / 180.0;
    std::vector<double> draws;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        Scene s = testfix::constant_velocity_scene(
            0.0, {{static_cast<std::int64_t>(seed), 20.0, 0.0, 0.0}}, 3);
        Scene d = degrade::apply_rotational_noise(s, scale, seed);
        double delta = scene::normalize_angle(d.frames[0].agents[0].box.center.yaw -
                                              s.frames[0].agents[0].box.center.yaw);
        draws.push_back(delta);
        // per-track: constant across the scene
        for (const auto& f : d.frames)
            CHECK(f.agents[0].box.center.yaw ==
                  doctest::Approx(d.frames[0].agents[0].box.center.yaw));
    }
    double mean = 0.0, var = 0.0;
    for (double x : draws) mean += x;
    mean /= draws.size();
    for (double x : draws) var += (x - mean) * (x - mean);
    double sd = std::sqrt(var / draws.size());
    CHECK(std::abs(mean) < 0.1);              // centered
    CHECK(sd == doctest::Approx(scale).epsilon(0.15));  // Monte Carlo tolerance

    // per-frame variant varies within a track
    Scene s = testfix::constant_velocity_scene(0.0, {{1, 20.0, 0.0, 0.0}}, 50);
    Scene d = degrade::apply_rotational_noise(s, scale, 7, true);
    std::set<double> yaws;
    for (const auto& f : d.frames) yaws.insert(f.agents[0].box.center.yaw);
    CHECK(yaws.size() > 10);
}

TEST_CASE("full pipeline equals manual stage composition") {
    Scene s = busy_scene();
    degrade::DegradationConfig c;
    c.range_m = 45.0;
    c.fov_deg = 200.0;
    c.target_iou = 0.6;
    c.rot_noise_max_rad = 0.1;
    c.seed = 31;
    Scene d = degrade::degrade_scene(s, c);

    Scene manual = degrade::apply_positional_noise(s, c.target_iou, derive_seed(c.seed, 0x905));
    manual = degrade::apply_rotational_noise(manual, c.rot_noise_max_rad,
                                             derive_seed(c.seed, 0x207), c.rot_per_frame);
    manual = degrade::clip_range(manual, *c.range_m);
    manual = degrade::clip_fov(manual, c.fov_deg);
    manual.provenance.degradation = c;
    CHECK(d == manual);
    CHECK(d.provenance.degradation == c);
    CHECK(d.provenance.quality_label() == "degraded");
}

TEST_CASE("degradation never alters ego, map, or frame count") {
    Scene s = busy_scene();
    degrade::DegradationConfig c;
    c.range_m = 20.0;
    c.fov_deg = 70.0;
    c.target_iou = 0.3;
    c.rot_noise_max_rad = 0.5;
    c.seed = 8;
    Scene d = degrade::degrade_scene(s, c);
    REQUIRE(d.frames.size() == s.frames.size());
    CHECK(d.map == s.map);
    for (std::size_t k = 0; k < s.frames.size(); ++k) {
        CHECK(d.frames[k].ego == s.frames[k].ego);
        CHECK(d.frames[k].index == s.frames[k].index);
    }
}

TEST_CASE("config validation names the violated invariant") {
    degrade::DegradationConfig c;
    c.fov_deg = 0.0;
    CHECK_THROWS_WITH_AS(degrade::validate_config(c), doctest::Contains("fov"),
                         ValidationError);
    c = {};
    c.target_iou = 0.0;
    CHECK_THROWS_WITH_AS(degrade::validate_config(c), doctest::Contains("iou"),
                         ValidationError);
    c = {};
    c.range_m = -1.0;
    CHECK_THROWS_AS(degrade::validate_config(c), ValidationError);
    c = {};
    c.rot_noise_max_rad = -0.1;
    CHECK_THROWS_AS(degrade::validate_config(c), ValidationError);
}

TEST_CASE("degradation config JSON round trip") {
    degrade::DegradationConfig c;
    c.range_m = 40.0;
    c.fov_deg = 130.0;
    c.target_iou = 0.5;
    c.rot_noise_max_rad = 0.2;
    c.seed = 9;
    CHECK(degrade::config_from_json(degrade::to_json(c)) == c);
    degrade::DegradationConfig unlimited;
    CHECK(degrade::config_from_json(degrade::to_json(unlimited)) == unlimited);
}
