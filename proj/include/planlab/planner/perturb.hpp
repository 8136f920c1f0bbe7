#pragma once

#include <span>

#include "planlab/planner/model.hpp"
#include "planlab/rng.hpp"
#include "planlab/scene/types.hpp"

namespace planlab::planner {

/// Ackermann perturbation augmentation parameters.
struct PerturbParams {
    double probability = 0.5;
    double max_lateral_m = 1.0;
    double max_heading_rad = 20.0 * M_PI / 180.0;
    double wheelbase_m = 2.7;
    double kappa_max = 0.2;    ///< 1/m, curvature bound of the recovery path
    double lookahead_m = 6.0;  ///< pure-pursuit lookahead of the recovery controller

    friend bool operator==(const PerturbParams&, const PerturbParams&) = default;
};

struct PerturbedSample {
    scene::Pose2D ego_pose;  // world
    Trajectory target;       // in the (possibly perturbed) ego frame
    bool perturbed = false;
};

/// With probability p, offsets the start pose laterally and in heading, then
/// synthesizes the training target by rolling a kinematic bicycle that steers
/// back toward the original path (pure pursuit) at the expert's speed
/// profile. If the recovery would need curvature above kappa_max the sample
/// falls back to the unperturbed original. future_world holds the expert
/// positions at t+1, t+2, ... (>= 12 points), in world coordinates.
PerturbedSample perturb_sample(const scene::Pose2D& ego,
                               std::span<const scene::Vec2> future_world,
                               const PerturbParams& params, Rng& rng);

/// Deterministic core: applies the given lateral/heading offsets. Zero
/// offsets return the original sample unchanged.
PerturbedSample perturb_with_offsets(const scene::Pose2D& ego,
                                     std::span<const scene::Vec2> future_world,
                                     double lateral_m, double heading_rad,
                                     const PerturbParams& params);

}  // namespace planlab::planner
