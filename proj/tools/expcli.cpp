// Command-line front end: dataset generation, degradation, training, metrics,
// experiment grids, and report rendering. All filesystem layout decisions
// live here; the libraries take explicit paths.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "planlab/degrade/config_json.hpp"
#include "planlab/degrade/degrade.hpp"
#include "planlab/errors.hpp"
#include "planlab/eval/eval.hpp"
#include "planlab/exp/report.hpp"
#include "planlab/exp/run.hpp"
#include "planlab/planner/train.hpp"
#include "planlab/raster/raster.hpp"
#include "planlab/rng.hpp"
#include "planlab/scene/io.hpp"
#include "planlab/synth/world.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace planlab;

struct CliConfig {
    exp::ExperimentConfig exp;
    degrade::DegradationConfig degradation;
};

std::optional<double> range_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() != "unlimited")
            throw ParseError("range: expected number or \"unlimited\"");
        return std::nullopt;
    }
    return j.get<double>();
}

void apply_json(CliConfig& c, const json& j) {
    if (j.contains("work_dir")) c.exp.work_dir = j.at("work_dir").get<std::string>();
    if (j.contains("scenes_1x")) c.exp.scenes_1x = j.at("scenes_1x").get<int>();
    if (j.contains("quantity_factor")) c.exp.quantity_factor = j.at("quantity_factor").get<int>();
    if (j.contains("test_scenes")) c.exp.test_scenes = j.at("test_scenes").get<int>();
    if (j.contains("data_seed")) c.exp.data_seed = j.at("data_seed").get<std::uint64_t>();
    if (j.contains("influence_frame_stride"))
        c.exp.influence_frame_stride = j.at("influence_frame_stride").get<int>();
    if (j.contains("seeds")) c.exp.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();

    if (j.contains("world")) {
        const json& w = j.at("world");
        if (w.contains("style"))
            c.exp.world.style = synth::map_style_from_name(w.at("style").get<std::string>());
        c.exp.world.num_lanes = w.value("num_lanes", c.exp.world.num_lanes);
        c.exp.world.traffic_density = w.value("traffic_density", c.exp.world.traffic_density);
        c.exp.world.ped_crossing_prob =
            w.value("ped_crossing_prob", c.exp.world.ped_crossing_prob);
        c.exp.world.speed_limit = w.value("speed_limit", c.exp.world.speed_limit);
        c.exp.world.seed = w.value("seed", c.exp.world.seed);
    }
    if (j.contains("expert")) {
        const json& e = j.at("expert");
        c.exp.expert.v0 = e.value("v0", c.exp.expert.v0);
        c.exp.expert.a_max = e.value("a_max", c.exp.expert.a_max);
        c.exp.expert.b = e.value("b", c.exp.expert.b);
        c.exp.expert.s0 = e.value("s0", c.exp.expert.s0);
        c.exp.expert.t_headway = e.value("t_headway", c.exp.expert.t_headway);
        c.exp.expert.crosswalk_margin =
            e.value("crosswalk_margin", c.exp.expert.crosswalk_margin);
    }
    if (j.contains("raster")) {
        const json& r = j.at("raster");
        c.exp.raster.size_px = r.value("size_px", c.exp.raster.size_px);
        c.exp.raster.resolution = r.value("resolution", c.exp.raster.resolution);
        c.exp.raster.history = r.value("history", c.exp.raster.history);
    }
    if (j.contains("train")) {
        const json& t = j.at("train");
        c.exp.train.epochs = t.value("epochs", c.exp.train.epochs);
        c.exp.train.batch_size = t.value("batch_size", c.exp.train.batch_size);
        c.exp.train.learning_rate = t.value("learning_rate", c.exp.train.learning_rate);
        c.exp.train.seed = t.value("seed", c.exp.train.seed);
        if (t.contains("perturb")) {
            const json& p = t.at("perturb");
            auto& pp = c.exp.train.perturb;
            pp.probability = p.value("probability", pp.probability);
            pp.max_lateral_m = p.value("max_lateral_m", pp.max_lateral_m);
            if (p.contains("max_heading_deg"))
                pp.max_heading_rad = p.at("max_heading_deg").get<double>() * M_PI / 180.0;
            pp.wheelbase_m = p.value("wheelbase_m", pp.wheelbase_m);
            pp.kappa_max = p.value("kappa_max", pp.kappa_max);
            pp.lookahead_m = p.value("lookahead_m", pp.lookahead_m);
        }
    }
    if (j.contains("range_buckets")) {
        c.exp.range_buckets.clear();
        for (const auto& r : j.at("range_buckets"))
            c.exp.range_buckets.push_back(range_from_json(r));
    }
    if (j.contains("fov_buckets"))
        c.exp.fov_buckets = j.at("fov_buckets").get<std::vector<double>>();
    if (j.contains("accuracy_buckets")) {
        c.exp.accuracy_buckets.clear();
        for (const auto& a : j.at("accuracy_buckets"))
            c.exp.accuracy_buckets.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
    }
    if (j.contains("quantity_cells")) {
        c.exp.quantity_cells.clear();
        for (const auto& q : j.at("quantity_cells"))
            c.exp.quantity_cells.emplace_back(range_from_json(q.at(0)), q.at(1).get<double>());
    }
    if (j.contains("degradation")) c.degradation = degrade::config_from_json(j.at("degradation"));
}

CliConfig load_config(const std::string& path) {
    CliConfig c;
    if (path.empty()) return c;
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        apply_json(c, j);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return c;
}

std::vector<scene::Scene> load_manifest_scenes(const std::string& manifest) {
    return exp::load_scenes(manifest);
}

void print_loss_curve(const std::vector<double>& losses) {
    for (std::size_t i = 0; i < losses.size(); ++i)
        std::printf("epoch %zu mean_loss %.17g\n", i + 1, losses[i]);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"imitation-planner data-quality laboratory"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand

    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 1;
    bool deterministic = false;
    app.add_option("--config", config_path, "JSON configuration document");
    app.add_option("--seed", seed, "override every seed in the config")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_option("--workers", workers, "worker thread count");
    app.add_flag("--deterministic", deterministic, "force single-threaded execution");

    std::string out_path, out_dir, in_manifest, model_path, csv_path, dump_prefix;
    int n_scenes = -1, stride = 0;
    bool resume = false;

    CLI::App* genmap = app.add_subcommand("genmap", "write a semantic map");
    genmap->add_option("--out", out_path)->required();

    CLI::App* gen = app.add_subcommand("gen", "generate a scene dataset");
    gen->add_option("--out-dir", out_dir)->required();
    gen->add_option("--scenes", n_scenes, "scene count (default scenes_1x)");

    CLI::App* deg = app.add_subcommand("degrade", "apply the configured degradation");
    deg->add_option("--in", in_manifest)->required();
    deg->add_option("--out-dir", out_dir)->required();

    CLI::App* train_cmd = app.add_subcommand("train", "train a planner");
    train_cmd->add_option("--manifest", in_manifest)->required();
    train_cmd->add_option("--out", out_path)->required();

    CLI::App* ft = app.add_subcommand("finetune", "fine-tune 2 epochs at lr/10");
    ft->add_option("--model", model_path)->required();
    ft->add_option("--manifest", in_manifest)->required();
    ft->add_option("--out", out_path)->required();

    CLI::App* eo = app.add_subcommand("eval-open", "open-loop ADE");
    eo->add_option("--model", model_path)->required();
    eo->add_option("--manifest", in_manifest)->required();
    eo->add_option("--dump-raster", dump_prefix, "PGM dump prefix for the first raster");

    CLI::App* ec = app.add_subcommand("eval-closed", "closed-loop rollouts");
    ec->add_option("--model", model_path)->required();
    ec->add_option("--manifest", in_manifest)->required();

    CLI::App* infl = app.add_subcommand("influence", "agent-influence histogram");
    infl->add_option("--model", model_path)->required();
    infl->add_option("--manifest", in_manifest)->required();
    infl->add_option("--out", out_path)->required();
    infl->add_option("--stride", stride, "frame stride (default from config)");

    CLI::App* grid = app.add_subcommand("grid", "range x FoV experiment grid");
    grid->add_option("--csv", csv_path)->required();
    grid->add_flag("--resume", resume, "keep and skip rows already in the CSV");

    CLI::App* quant = app.add_subcommand("quantity", "quantity-vs-quality experiment");
    quant->add_option("--csv", csv_path)->required();
    quant->add_flag("--resume", resume);

    CLI::App* rep = app.add_subcommand("report", "render markdown + SVG from a results CSV");
    rep->add_option("--csv", csv_path)->required();
    rep->add_option("--out-dir", out_dir)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        CliConfig cfg = load_config(config_path);
        if (deterministic) workers = 1;
        cfg.exp.workers = workers;
        cfg.exp.train.workers = workers;
        cfg.exp.resume = resume;
        if (seed_set) {
            cfg.exp.train.seed = seed;
            cfg.exp.seeds = {seed};
            cfg.exp.world.seed = seed;
            cfg.degradation.seed = seed;
        }

        if (genmap->parsed()) {
            scene::save_map(synth::build_map(cfg.exp.world), out_path);
            std::printf("wrote %s\n", out_path.c_str());
        } else if (gen->parsed()) {
            int count = n_scenes > 0 ? n_scenes : cfg.exp.scenes_1x;
            fs::create_directories(out_dir);
            synth::DatasetGenResult r = synth::generate_dataset(
                cfg.exp.world, cfg.exp.expert, count, cfg.exp.world.seed, out_dir);
            std::string manifest = (fs::path(out_dir) / "manifest.json").string();
            scene::save_manifest(r.manifest, manifest);
            std::printf("wrote %s (%d scenes)\n", manifest.c_str(), count);
        } else if (deg->parsed()) {
            degrade::validate_config(cfg.degradation);
            std::vector<scene::Scene> scenes = load_manifest_scenes(in_manifest);
            fs::create_directories(out_dir);
            scene::DatasetManifest out_m;
            for (std::size_t i = 0; i < scenes.size(); ++i) {
                degrade::DegradationConfig dc = cfg.degradation;
                dc.seed = derive_seed(cfg.degradation.seed, static_cast<std::uint64_t>(i));
                scene::Scene d = degrade::degrade_scene(scenes[i], dc);
                std::string name = d.scene_id + ".json";
                scene::save_scene(d, (fs::path(out_dir) / name).string());
                out_m.scene_paths.push_back(name);
            }
            out_m.hours_equivalent = scene::hours_for_scenes(scenes.size());
            out_m.provenance.source = "degrade";
            out_m.provenance.seed = cfg.degradation.seed;
            out_m.provenance.degradation = cfg.degradation;
            std::string manifest = (fs::path(out_dir) / "manifest.json").string();
            scene::save_manifest(out_m, manifest);
            std::printf("wrote %s\n", manifest.c_str());
        } else if (train_cmd->parsed()) {
            std::vector<scene::Scene> scenes = load_manifest_scenes(in_manifest);
            planner::TrainConfig tc = cfg.exp.train;
            tc.dataset_label = in_manifest;
            planner::TrainResult r = planner::train(scenes, cfg.exp.raster, tc);
            print_loss_curve(r.epoch_mean_loss);
            planner::save_model(r.model, out_path);
            std::printf("wrote %s\n", out_path.c_str());
        } else if (ft->parsed()) {
            planner::PlannerModel model = planner::load_model(model_path);
            std::vector<scene::Scene> scenes = load_manifest_scenes(in_manifest);
            planner::TrainConfig tc = cfg.exp.train;
            tc.dataset_label = in_manifest;
            planner::TrainResult r = planner::fine_tune(model, scenes, cfg.exp.raster, tc);
            print_loss_curve(r.epoch_mean_loss);
            planner::save_model(r.model, out_path);
            std::printf("wrote %s\n", out_path.c_str());
        } else if (eo->parsed()) {
            planner::PlannerModel model = planner::load_model(model_path);
            std::vector<scene::Scene> scenes = load_manifest_scenes(in_manifest);
            if (!dump_prefix.empty() && !scenes.empty())
                raster::dump_raster_pgm(
                    raster::rasterize(scenes[0], cfg.exp.raster.history - 1, cfg.exp.raster),
                    dump_prefix);
            eval::OpenLoopStats stats = eval::open_loop_ade(model, scenes, cfg.exp.raster);
            std::printf("ade_m %.17g\nn_steps %ld\n", stats.ade, stats.n_steps);
        } else if (ec->parsed()) {
            planner::PlannerModel model = planner::load_model(model_path);
            std::vector<scene::Scene> scenes = load_manifest_scenes(in_manifest);
            std::vector<eval::RolloutResult> rollouts;
            long completed = 0, collisions = 0, deviations = 0;
            for (const scene::Scene& s : scenes) {
                rollouts.push_back(eval::closed_loop(model, s, cfg.exp.raster));
                const auto& r = rollouts.back();
                completed += r.termination == eval::Termination::kCompleted;
                collisions += r.termination == eval::Termination::kCollision;
                deviations += r.termination == eval::Termination::kDeviation;
            }
            double rate = eval::collision_rate(rollouts);
            long steps = 0;
            for (const auto& r : rollouts) steps += r.steps_simulated;
            std::printf("collision_rate %.17g\nn_steps %ld\nn_collisions %ld\n", rate, steps,
                        collisions);
            std::printf("terminations completed=%ld collision=%ld deviation=%ld\n", completed,
                        collisions, deviations);
        } else if (infl->parsed()) {
            planner::PlannerModel model = planner::load_model(model_path);
            std::vector<scene::Scene> scenes = load_manifest_scenes(in_manifest);
            int fs_stride = stride > 0 ? stride : cfg.exp.influence_frame_stride;
            eval::InfluenceHistogram hist = eval::influence_histogram(
                model, scenes, cfg.exp.raster, fs_stride, workers);
            exp::save_influence_csv(hist, out_path);
            std::printf("wrote %s (%zu pairs)\n", out_path.c_str(), hist.records.size());
        } else if (grid->parsed() || quant->parsed()) {
            exp::RunOutcome out = grid->parsed() ? exp::run_grid(cfg.exp, csv_path)
                                                 : exp::run_quantity(cfg.exp, csv_path);
            std::printf("wrote %s (%zu rows)\n", csv_path.c_str(), out.table.rows.size());
            if (!out.failed_cells.empty()) {
                for (const auto& f : out.failed_cells)
                    std::fprintf(stderr, "cell failed: %s\n", f.c_str());
                return 2;
            }
        } else if (rep->parsed()) {
            exp::ResultsTable table = exp::ResultsTable::load(csv_path);
            exp::ReportPaths paths = exp::write_report(table, out_dir);
            std::printf("wrote %s\n", paths.markdown.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
