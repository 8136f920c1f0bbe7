#include "planlab/exp/run.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <tuple>

#include "planlab/degrade/degrade.hpp"
#include "planlab/errors.hpp"
#include "planlab/rng.hpp"
#include "planlab/scene/io.hpp"

namespace planlab::exp {

namespace fs = std::filesystem;
using scene::Scene;

void validate_experiment_config(const ExperimentConfig& cfg) {
    if (cfg.work_dir.empty()) throw ConfigError("experiment config: work_dir required");
    if (cfg.scenes_1x < 1 || cfg.test_scenes < 1)
        throw ConfigError("experiment config: dataset sizes >= 1 required");
    if (cfg.quantity_factor < 2)
        throw ConfigError("experiment config: quantity factor >= 2 required");
    if (cfg.range_buckets.empty() || cfg.fov_buckets.empty())
        throw ConfigError("experiment config: bucket lists must be non-empty");
    if (cfg.seeds.empty()) throw ConfigError("experiment config: at least one seed required");
    std::set<std::uint64_t> uniq(cfg.seeds.begin(), cfg.seeds.end());
    if (uniq.size() != cfg.seeds.size())
        throw ConfigError("experiment config: seeds must be distinct");
    if (cfg.workers < 1) throw ConfigError("experiment config: workers >= 1 required");
}

std::vector<Scene> load_scenes(const std::string& manifest_path) {
    scene::DatasetManifest m = scene::load_manifest(manifest_path);
    fs::path base = fs::path(manifest_path).parent_path();
    std::vector<Scene> scenes;
    scenes.reserve(m.scene_paths.size());
    for (const std::string& p : m.scene_paths) {
        fs::path sp(p);
        if (sp.is_relative()) sp = base / sp;
        scenes.push_back(scene::load_scene(sp.string()));
    }
    return scenes;
}

namespace {

std::vector<Scene> ensure_dataset(const ExperimentConfig& cfg, const std::string& name,
                                  int n_scenes, std::uint64_t seed) {
    fs::path dir = fs::path(cfg.work_dir) / "data" / name;
    fs::path manifest = dir / "manifest.json";
    if (fs::exists(manifest)) {
        std::vector<Scene> scenes = load_scenes(manifest.string());
        if (static_cast<int>(scenes.size()) == n_scenes) return scenes;
        // size changed since the cached run: regenerate
        fs::remove_all(dir);
    }
    fs::create_directories(dir);
    synth::WorldSpec world = cfg.world;
    world.seed = seed;
    synth::DatasetGenResult gen =
        synth::generate_dataset(world, cfg.expert, n_scenes, seed, dir.string());
    scene::save_manifest(gen.manifest, manifest.string());
    return load_scenes(manifest.string());
}

std::vector<Scene> degrade_all(const std::vector<Scene>& scenes,
                               const degrade::DegradationConfig& base, std::uint64_t cell_seed) {
    std::vector<Scene> out;
    out.reserve(scenes.size());
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        degrade::DegradationConfig c = base;
        c.seed = derive_seed(derive_seed(cell_seed, 0xD39AULL), static_cast<std::uint64_t>(i));
        out.push_back(degrade::degrade_scene(scenes[i], c));
    }
    return out;
}

struct CellSpec {
    std::optional<double> range_m;
    double fov_deg = 360.0;
    double iou = 1.0;
    double rot_deg = 0.0;
};

ResultRow make_row(const CellSpec& cell, double hours, bool fine_tuned, std::uint64_t seed) {
    ResultRow r;
    r.range_m = cell.range_m;
    r.fov_deg = cell.fov_deg;
    r.iou = cell.iou;
    r.rot_deg = cell.rot_deg;
    r.hours_equiv = hours;
    r.fine_tuned = fine_tuned;
    r.seed = seed;
    return r;
}

/// Runs one (cell, seed): degrade, train, optionally fine-tune on clean 1x,
/// evaluate on the clean test split. Fills the metric fields of row.
void run_cell(const ExperimentConfig& cfg, const CellSpec& cell, std::uint64_t seed,
              const std::vector<Scene>& train_scenes, const std::vector<Scene>* finetune_clean,
              const std::vector<Scene>& test, ResultRow& row) {
    auto t0 = std::chrono::steady_clock::now();

    degrade::DegradationConfig dc;
    dc.range_m = cell.range_m;
    dc.fov_deg = cell.fov_deg;
    dc.target_iou = cell.iou;
    dc.rot_noise_max_rad = cell.rot_deg * M_PI / 180.0;
    std::vector<Scene> degraded =
        dc.is_identity() ? train_scenes : degrade_all(train_scenes, dc, seed);

    planner::TrainConfig tc = cfg.train;
    tc.seed = seed;
    tc.workers = cfg.workers;
    tc.dataset_label = row.cell_key();
    planner::TrainResult tr = planner::train(degraded, cfg.raster, tc);
    planner::PlannerModel model = std::move(tr.model);
    if (finetune_clean) model = std::move(planner::fine_tune(model, *finetune_clean, cfg.raster, tc).model);

    EvalOutcome ev = evaluate_model(model, test, cfg.raster);
    row.ade_m = ev.ade;
    row.collision_rate = ev.collision_rate;
    row.n_steps = ev.n_steps;
    row.n_collisions = ev.n_collisions;
    row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunOutcome run_cells(const ExperimentConfig& cfg, const std::string& csv_path,
                     const std::vector<std::tuple<CellSpec, double, bool, std::uint64_t,
                                                  const std::vector<Scene>*,
                                                  const std::vector<Scene>*>>& jobs,
                     const std::vector<Scene>& test) {
    RunOutcome out;
    if (cfg.resume && fs::exists(csv_path)) out.table = ResultsTable::load(csv_path);

    for (const auto& [cell, hours, ft, seed, train_scenes, ft_clean] : jobs) {
        ResultRow row = make_row(cell, hours, ft, seed);
        if (out.table.has(row.cell_key())) continue;
        try {
            run_cell(cfg, cell, seed, *train_scenes, ft_clean, test, row);
            out.table.rows.push_back(row);
            out.table.save(csv_path);
        } catch (const std::exception& e) {
            out.failed_cells.push_back(row.cell_key() + ": " + e.what());
        }
    }
    return out;
}

}  // namespace

EvalOutcome evaluate_model(const planner::PlannerModel& model, const std::vector<Scene>& test,
                           const raster::RasterConfig& rcfg) {
    EvalOutcome out;
    out.ade = eval::open_loop_ade(model, test, rcfg).ade;
    std::vector<eval::RolloutResult> rollouts;
    rollouts.reserve(test.size());
    for (const Scene& s : test) rollouts.push_back(eval::closed_loop(model, s, rcfg));
    out.collision_rate = eval::collision_rate(rollouts);
    for (const auto& r : rollouts) {
        out.n_steps += r.steps_simulated;
        out.n_collisions += r.collided ? 1 : 0;
    }
    return out;
}

Datasets prepare_datasets(const ExperimentConfig& cfg, bool need_10x) {
    validate_experiment_config(cfg);
    Datasets d;
    d.train_1x = ensure_dataset(cfg, "train_1x", cfg.scenes_1x, derive_seed(cfg.data_seed, 1));
    if (need_10x)
        d.train_10x = ensure_dataset(cfg, "train_10x", cfg.scenes_1x * cfg.quantity_factor,
                                     derive_seed(cfg.data_seed, 10));
    d.test = ensure_dataset(cfg, "test", cfg.test_scenes, derive_seed(cfg.data_seed, 99));
    return d;
}

RunOutcome run_grid(const ExperimentConfig& cfg, const std::string& csv_path) {
    validate_experiment_config(cfg);
    Datasets data = prepare_datasets(cfg, false);
    double hours = scene::hours_for_scenes(data.train_1x.size());

    std::vector<std::tuple<CellSpec, double, bool, std::uint64_t, const std::vector<Scene>*,
                           const std::vector<Scene>*>>
        jobs;
    for (const auto& range : cfg.range_buckets)
        for (double fov : cfg.fov_buckets)
            for (std::uint64_t seed : cfg.seeds)
                jobs.emplace_back(CellSpec{range, fov, 1.0, 0.0}, hours, false, seed,
                                  &data.train_1x, nullptr);
    for (const auto& [iou, rot] : cfg.accuracy_buckets)
        for (std::uint64_t seed : cfg.seeds)
            jobs.emplace_back(CellSpec{std::nullopt, 360.0, iou, rot}, hours, false, seed,
                              &data.train_1x, nullptr);
    return run_cells(cfg, csv_path, jobs, data.test);
}

RunOutcome run_quantity(const ExperimentConfig& cfg, const std::string& csv_path) {
    validate_experiment_config(cfg);
    Datasets data = prepare_datasets(cfg, true);
    double hours_1x = scene::hours_for_scenes(data.train_1x.size());
    double hours_10x = scene::hours_for_scenes(data.train_10x.size());

    std::vector<std::tuple<CellSpec, double, bool, std::uint64_t, const std::vector<Scene>*,
                           const std::vector<Scene>*>>
        jobs;
    for (std::uint64_t seed : cfg.seeds)
        jobs.emplace_back(CellSpec{}, hours_1x, false, seed, &data.train_1x, nullptr);
    for (const auto& [range, fov] : cfg.quantity_cells) {
        for (std::uint64_t seed : cfg.seeds)
            jobs.emplace_back(CellSpec{range, fov, 1.0, 0.0}, hours_10x, false, seed,
                              &data.train_10x, nullptr);
        for (std::uint64_t seed : cfg.seeds)
            jobs.emplace_back(CellSpec{range, fov, 1.0, 0.0}, hours_10x, true, seed,
                              &data.train_10x, &data.train_1x);
    }
    return run_cells(cfg, csv_path, jobs, data.test);
}

void save_influence_csv(const eval::InfluenceHistogram& hist, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << "# planlab-influence v1\n";
    out << "kind,bucket,total,very,slight,very_fraction,slight_fraction\n";
    auto emit = [&](const char* kind, const std::map<int, eval::InfluenceBucket>& m) {
        for (const auto& [bucket, b] : m) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "%s,%d,%ld,%ld,%ld,%.17g,%.17g\n", kind, bucket,
                          b.total, b.very, b.slight, b.very_fraction(), b.slight_fraction());
            out << buf;
        }
    };
    emit("distance", hist.by_distance);
    emit("bearing", hist.by_bearing);
    if (!out) throw ParseError("write failed: " + path);
}

}  // namespace planlab::exp
