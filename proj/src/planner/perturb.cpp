#include "planlab/planner/perturb.hpp"

#include "planlab/errors.hpp"
#include "planlab/scene/geometry.hpp"
#include "planlab/scene/polyline.hpp"

namespace planlab::planner {

using scene::Pose2D;
using scene::Vec2;

namespace {

PerturbedSample unperturbed(const Pose2D& ego, std::span<const Vec2> future) {
    PerturbedSample s;
    s.ego_pose = ego;
    for (int t = 0; t < kHorizonSteps; ++t) s.target.points[t] = scene::to_local(future[t], ego);
    s.perturbed = false;
    return s;
}

}  // namespace

PerturbedSample perturb_with_offsets(const Pose2D& ego, std::span<const Vec2> future_world,
                                     double lateral_m, double heading_rad,
                                     const PerturbParams& params) {
    if (future_world.size() < static_cast<std::size_t>(kHorizonSteps))
        throw ValidationError("perturb: future needs at least " + std::to_string(kHorizonSteps) +
                              " points, got " + std::to_string(future_world.size()));
    if (lateral_m == 0.0 && heading_rad == 0.0) return unperturbed(ego, future_world);

    Pose2D start;
    Vec2 left{-std::sin(ego.yaw), std::cos(ego.yaw)};
    start.x = ego.x + lateral_m * left.x;
    start.y = ego.y + lateral_m * left.y;
    start.yaw = scene::normalize_angle(ego.yaw + heading_rad);

    // Reference path for the recovery controller: the expert's own positions.
    std::vector<Vec2> ref;
    ref.reserve(future_world.size() + 1);
    ref.push_back(ego.position());
    for (const Vec2& p : future_world) ref.push_back(p);
    scene::PolylinePath path(ref);

    Pose2D pose = start;
    PerturbedSample s;
    s.ego_pose = start;
    s.perturbed = true;
    for (int t = 0; t < kHorizonSteps; ++t) {
        // expert speed profile: distance covered in this 0.1 s step
        Vec2 prev = (t == 0) ? ego.position() : future_world[t - 1];
        double d = (future_world[t] - prev).norm();
        if (d > 1e-9) {
            double s_cur = path.project(pose.position());
            double s_goal = std::min(s_cur + params.lookahead_m, path.length());
            Vec2 goal = path.pose_at(s_goal).position();
            Vec2 local = scene::to_local(goal, pose);
            double dist = local.norm();
            if (dist < 1e-6) dist = params.lookahead_m;
            double alpha = std::atan2(local.y, local.x);
            double kappa = 2.0 * std::sin(alpha) / dist;
            // steering through the bicycle geometry is the identity in
            // curvature space: delta = atan(kappa * wheelbase), kappa = tan(delta) / wheelbase
            if (std::abs(kappa) > params.kappa_max) return unperturbed(ego, future_world);
            double dpsi = kappa * d;
            double mid = pose.yaw + 0.5 * dpsi;
            pose.x += d * std::cos(mid);
            pose.y += d * std::sin(mid);
            pose.yaw = scene::normalize_angle(pose.yaw + dpsi);
        }
        s.target.points[t] = scene::to_local(pose.position(), start);
    }
    return s;
}

PerturbedSample perturb_sample(const Pose2D& ego, std::span<const Vec2> future_world,
                               const PerturbParams& params, Rng& rng) {
    // fixed draw order keeps the stream stable whether or not it applies
    bool apply = rng.uniform01() < params.probability;
    double lat = rng.uniform(-params.max_lateral_m, params.max_lateral_m);
    double head = rng.uniform(-params.max_heading_rad, params.max_heading_rad);
    if (!apply) return unperturbed(ego, future_world);
    return perturb_with_offsets(ego, future_world, lat, head, params);
}

}  // namespace planlab::planner
