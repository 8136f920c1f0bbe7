#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "planlab/planner/model.hpp"
#include "planlab/planner/perturb.hpp"
#include "planlab/raster/raster.hpp"
#include "planlab/scene/types.hpp"

namespace planlab::planner {

struct TrainConfig {
    int epochs = 15;
    int batch_size = 32;
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    PerturbParams perturb;
    std::uint64_t seed = 0;
    int workers = 1;  ///< rasterization/gradient threads; results are identical for any count
    std::string dataset_label;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct TrainResult {
    PlannerModel model;
    std::vector<double> epoch_mean_loss;  // one entry per epoch
};

/// Trains a fresh model. Samples are every frame with at least H-1 frames of
/// history and 12 of future; each epoch reshuffles them from the seed.
/// Updates use the adaptive-moment method on the mini-batch mean gradient,
/// accumulated in a fixed order so the result does not depend on the worker
/// count. Throws ConfigError on a bad config, ValidationError when no frame
/// qualifies. spec_override substitutes the network architecture (the input
/// shape always follows the raster config).
TrainResult train(const std::vector<scene::Scene>& scenes, const raster::RasterConfig& rcfg,
                  const TrainConfig& cfg, const NetSpec* spec_override = nullptr);

/// Continues training for exactly 2 epochs at a tenth of the base learning
/// rate with fresh optimizer state. Provenance records the reduced rate and
/// the fine_tuned flag.
TrainResult fine_tune(const PlannerModel& model, const std::vector<scene::Scene>& clean_scenes,
                      const raster::RasterConfig& rcfg, const TrainConfig& base);

}  // namespace planlab::planner
