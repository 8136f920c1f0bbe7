#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "planlab/planner/net.hpp"
#include "planlab/raster/raster.hpp"
#include "planlab/scene/types.hpp"

namespace planlab::planner {

/// 12 (x, y) points in the ego frame at prediction time, 0.1 s spacing.
struct Trajectory {
    std::array<scene::Vec2, kHorizonSteps> points{};

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Training provenance carried in the checkpoint metadata trailer.
struct TrainProvenance {
    std::string dataset;
    std::string quality;
    double hours_equivalent = 0.0;
    int epochs = 0;
    double learning_rate = 0.0;
    std::uint64_t seed = 0;
    bool fine_tuned = false;

    friend bool operator==(const TrainProvenance&, const TrainProvenance&) = default;
};

struct PlannerModel {
    NetSpec spec;
    std::vector<float> params;
    TrainProvenance provenance;
};

/// Fan-in-scaled normal weights, zero biases, drawn deterministically from
/// the seed.
PlannerModel init_model(const NetSpec& spec, std::uint64_t seed);

/// Raster -> 12-step trajectory. Throws on input shape mismatch.
Trajectory forward(const PlannerModel& model, const raster::Raster& input);

/// Sum over the 12 steps of the per-step Euclidean distance.
double trajectory_loss(const Trajectory& pred, const Trajectory& target);

/// Exact reverse-mode gradients of the loss w.r.t. every parameter.
std::vector<float> gradients(const PlannerModel& model, const raster::Raster& input,
                             const Trajectory& target);

/// Checkpoint file: magic, schema version, architecture fingerprint,
/// parameter count, raw little-endian float32 parameters, JSON metadata
/// trailer. Round-trips are bit-exact; loading refuses mismatched
/// fingerprints and truncated files.
void save_model(const PlannerModel& model, const std::string& path);
PlannerModel load_model(const std::string& path);

/// Flattens a raster into the network input vector (shape check included).
std::vector<float> raster_input(const raster::Raster& r, const NetSpec& spec);

}  // namespace planlab::planner
