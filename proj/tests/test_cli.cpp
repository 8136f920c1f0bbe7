#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "planlab/planner/model.hpp"
#include "planlab/scene/io.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_cli;  // path to the expcli binary, from argv[1]

struct CmdResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

CmdResult run(const std::string& args) {
    CmdResult r;
    std::string cmd = g_cli + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) r.output.append(buf, n);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string work_dir() {
    static std::string dir = [] {
        std::string d = (fs::temp_directory_path() / "planlab_cli").string();
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string write_config() {
    std::string path = work_dir() + "/config.json";
    std::ofstream(path) << R"({
        "work_dir": ")" << work_dir() << R"(/exp",
        "scenes_1x": 2,
        "test_scenes": 1,
        "quantity_factor": 2,
        "seeds": [1],
        "raster": {"size_px": 64, "resolution": 0.5, "history": 3},
        "train": {"epochs": 1, "batch_size": 16, "learning_rate": 0.0001},
        "range_buckets": [40, "unlimited"],
        "fov_buckets": [360],
        "accuracy_buckets": [],
        "quantity_cells": [],
        "degradation": {"range_m": 40, "fov_deg": 130, "target_iou": 0.5,
                        "rot_noise_max_rad": 0.0873, "seed": 3}
    })";
    return path;
}

}  // namespace

TEST_CASE("full pipeline: genmap, gen, degrade, train, eval, influence, finetune") {
    std::string cfg = " --config " + write_config();
    std::string d = work_dir();

    CmdResult r = run("genmap --out " + d + "/map.json" + cfg);
    CHECK(r.exit_code == 0);
    CHECK_NOTHROW(planlab::scene::load_map(d + "/map.json"));

    r = run("gen --out-dir " + d + "/data --scenes 3" + cfg);
    REQUIRE(r.exit_code == 0);
    planlab::scene::DatasetManifest m = planlab::scene::load_manifest(d + "/data/manifest.json");
    CHECK(m.scene_paths.size() == 3);

    r = run("degrade --in " + d + "/data/manifest.json --out-dir " + d + "/deg" + cfg);
    REQUIRE(r.exit_code == 0);
    planlab::scene::DatasetManifest dm = planlab::scene::load_manifest(d + "/deg/manifest.json");
    REQUIRE(dm.scene_paths.size() == 3);
    planlab::scene::Scene degraded =
        planlab::scene::load_scene(d + "/deg/" + dm.scene_paths[0]);
    CHECK(degraded.provenance.quality_label() == "degraded");

    r = run("train --manifest " + d + "/data/manifest.json --out " + d + "/model.bin" + cfg);
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("epoch 1 mean_loss") != std::string::npos);
    planlab::planner::PlannerModel model = planlab::planner::load_model(d + "/model.bin");
    CHECK(model.spec.input_size == 64);
    CHECK_FALSE(model.provenance.fine_tuned);

    r = run("eval-open --model " + d + "/model.bin --manifest " + d +
            "/data/manifest.json --dump-raster " + d + "/bev" + cfg);
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("ade_m ") != std::string::npos);
    CHECK(r.output.find("n_steps ") != std::string::npos);
    bool dumped = false;
    for (const auto& e : fs::directory_iterator(d))
        if (e.path().filename().string().rfind("bev", 0) == 0) dumped = true;
    CHECK(dumped);

    r = run("eval-closed --model " + d + "/model.bin --manifest " + d + "/data/manifest.json" +
            cfg);
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("collision_rate ") != std::string::npos);
    CHECK(r.output.find("terminations ") != std::string::npos);

    r = run("influence --model " + d + "/model.bin --manifest " + d +
            "/data/manifest.json --out " + d + "/influence.csv --stride 25" + cfg);
    REQUIRE(r.exit_code == 0);
    std::ifstream in(d + "/influence.csv");
    std::string first_line;
    std::getline(in, first_line);
    CHECK(first_line == "# planlab-influence v1");

    r = run("finetune --model " + d + "/model.bin --manifest " + d +
            "/data/manifest.json --out " + d + "/model_ft.bin" + cfg);
    REQUIRE(r.exit_code == 0);
    planlab::planner::PlannerModel ft = planlab::planner::load_model(d + "/model_ft.bin");
    CHECK(ft.provenance.fine_tuned);
}

TEST_CASE("grid runs, resumes without recomputation, and reports") {
    std::string cfg = " --config " + write_config();
    std::string d = work_dir();
    std::string csv = d + "/results.csv";

    CmdResult r = run("grid --csv " + csv + cfg);
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("wrote " + csv + " (2 rows)") != std::string::npos);
    std::ifstream in(csv);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    CHECK(text.rfind("# planlab-results v1", 0) == 0);
    CHECK(text.find("unlimited") != std::string::npos);

    // resume: both cells are present, so the rerun only reloads the CSV
    r = run("grid --csv " + csv + " --resume" + cfg);
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("(2 rows)") != std::string::npos);

    r = run("report --csv " + csv + " --out-dir " + d + "/report" + cfg);
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(d + "/report/report.md"));
    CHECK(fs::exists(d + "/report/ade.svg"));
    CHECK(fs::exists(d + "/report/collision_rate.svg"));
}

TEST_CASE("failures exit with code 1 and an error line") {
    std::string d = work_dir();
    CmdResult r = run("train --manifest " + d + "/nonexistent.json --out " + d + "/x.bin");
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("error: ") != std::string::npos);

    r = run("genmap --out " + d + "/m.json --config " + d + "/no_such_config.json");
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("error: ") != std::string::npos);

    std::string bad_cfg = d + "/bad.json";
    std::ofstream(bad_cfg) << R"({"degradation": {"range_m": 40, "fov_deg": 130,
        "target_iou": 0.0, "rot_noise_max_rad": 0}})";
    r = run("degrade --in " + d + "/data/manifest.json --out-dir " + d + "/deg2 --config " +
            bad_cfg);
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("iou") != std::string::npos);

    r = run("frobnicate");
    CHECK(r.exit_code != 0);
}

TEST_CASE("--seed overrides the configured seeds") {
    std::string cfg = " --config " + write_config();
    std::string d = work_dir();
    CmdResult a = run("gen --out-dir " + d + "/seeded_a --scenes 1 --seed 777" + cfg);
    CmdResult b = run("gen --out-dir " + d + "/seeded_b --scenes 1 --seed 777" + cfg);
    CmdResult c = run("gen --out-dir " + d + "/seeded_c --scenes 1 --seed 778" + cfg);
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    REQUIRE(c.exit_code == 0);
    auto first_scene = [](const std::string& dir) {
        planlab::scene::DatasetManifest m =
            planlab::scene::load_manifest(dir + "/manifest.json");
        return planlab::scene::load_scene(dir + "/" + m.scene_paths.at(0));
    };
    planlab::scene::Scene sa = first_scene(d + "/seeded_a");
    CHECK(sa == first_scene(d + "/seeded_b"));
    CHECK(sa.frames != first_scene(d + "/seeded_c").frames);
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-expcli>\n");
        return 1;
    }
    g_cli = argv[1];
    doctest::Context ctx;
    ctx.applyCommandLine(1, argv);
    return ctx.run();
}
