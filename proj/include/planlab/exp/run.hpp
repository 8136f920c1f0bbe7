#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "planlab/eval/eval.hpp"
#include "planlab/exp/results.hpp"
#include "planlab/planner/train.hpp"
#include "planlab/raster/raster.hpp"
#include "planlab/scene/types.hpp"
#include "planlab/synth/world.hpp"

namespace planlab::exp {

/// Everything an experiment family needs: world generator, dataset sizes,
/// quality buckets, training protocol, seeds, and filesystem root.
struct ExperimentConfig {
    std::string work_dir;
    synth::WorldSpec world;
    synth::ExpertParams expert;
    int scenes_1x = 36;
    int quantity_factor = 10;  // 10x level
    int test_scenes = 24;
    raster::RasterConfig raster;
    planner::TrainConfig train;
    std::vector<std::optional<double>> range_buckets{20.0, 40.0, 60.0, std::nullopt};
    std::vector<double> fov_buckets{70.0, 130.0, 270.0, 360.0};
    /// (target IoU, rot noise deg) cells, run at full range and FoV.
    std::vector<std::pair<double, double>> accuracy_buckets;
    /// (range, fov) cells for the quantity-vs-quality comparison.
    std::vector<std::pair<std::optional<double>, double>> quantity_cells{{40.0, 130.0}};
    std::vector<std::uint64_t> seeds{1, 2, 3};
    bool resume = false;
    int workers = 1;
    int influence_frame_stride = 5;
    std::uint64_t data_seed = 42;
};

void validate_experiment_config(const ExperimentConfig& cfg);  // ConfigError

struct Datasets {
    std::vector<scene::Scene> train_1x;
    std::vector<scene::Scene> train_10x;  // empty unless requested
    std::vector<scene::Scene> test;
};

/// Generates (or reloads, when already on disk) the shared train and test
/// datasets under work_dir/data. Every experiment cell reuses these splits.
Datasets prepare_datasets(const ExperimentConfig& cfg, bool need_10x);

struct RunOutcome {
    ResultsTable table;
    std::vector<std::string> failed_cells;  // "<cell key>: <error>"
};

/// Range x FoV grid (plus any accuracy buckets): degrade the shared train
/// split per cell, train, evaluate open-loop ADE and pooled closed-loop
/// collision rate on the clean test split. One row per (cell, seed). Cell
/// failures are recorded and the remaining cells continue. The CSV at
/// csv_path is rewritten after every row; with resume, rows already present
/// are kept and skipped.
RunOutcome run_grid(const ExperimentConfig& cfg, const std::string& csv_path);

/// Quantity vs quality: 1x clean, 10x degraded per quantity cell, and 10x
/// degraded fine-tuned on the 1x clean split, all on the shared test split.
RunOutcome run_quantity(const ExperimentConfig& cfg, const std::string& csv_path);

/// Metric helper shared by the runners and the CLI.
struct EvalOutcome {
    double ade = 0.0;
    double collision_rate = 0.0;
    long n_steps = 0;
    long n_collisions = 0;
};
EvalOutcome evaluate_model(const planner::PlannerModel& model,
                           const std::vector<scene::Scene>& test,
                           const raster::RasterConfig& rcfg);

/// Per-bucket influence proportions as CSV
/// (kind,bucket,total,very,slight,very_fraction,slight_fraction).
void save_influence_csv(const eval::InfluenceHistogram& hist, const std::string& path);

/// Loads every scene listed in a manifest file; paths are relative to the
/// manifest's directory unless absolute.
std::vector<scene::Scene> load_scenes(const std::string& manifest_path);

}  // namespace planlab::exp
