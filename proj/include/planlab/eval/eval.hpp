#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "planlab/planner/model.hpp"
#include "planlab/raster/raster.hpp"
#include "planlab/scene/types.hpp"

namespace planlab::eval {

/// Trajectory source for evaluation. plan() predicts 12 steps in the frame of
/// ego_pose given the scene at frame_index; ego_history holds the last
/// history() ego poses, oldest first, ending at ego_pose.
class Policy {
public:
    virtual ~Policy() = default;
    virtual planner::Trajectory plan(const scene::Scene& s, int frame_index,
                                     const scene::Pose2D& ego_pose,
                                     std::span<const scene::Pose2D> ego_history) const = 0;
    virtual int history() const = 0;
};

/// Runs the trained CNN on a raster rendered at ego_pose.
class ModelPolicy : public Policy {
public:
    ModelPolicy(const planner::PlannerModel& model, const raster::RasterConfig& rcfg);
    planner::Trajectory plan(const scene::Scene& s, int frame_index,
                             const scene::Pose2D& ego_pose,
                             std::span<const scene::Pose2D> ego_history) const override;
    int history() const override { return rcfg_.history; }

private:
    const planner::PlannerModel& model_;
    raster::RasterConfig rcfg_;
};

/// Replays the logged expert future; the reference oracle for metric tests.
class ExpertReplayPolicy : public Policy {
public:
    planner::Trajectory plan(const scene::Scene& s, int frame_index,
                             const scene::Pose2D& ego_pose,
                             std::span<const scene::Pose2D> ego_history) const override;
    int history() const override { return 1; }
};

enum class Termination { kCompleted, kCollision, kDeviation };

std::string termination_name(Termination t);

struct RolloutResult {
    std::string scene_id;
    long steps_simulated = 0;
    bool collided = false;
    Termination termination = Termination::kCompleted;
    std::vector<scene::Pose2D> trace;  // includes the start pose
};

constexpr double kDefaultDeviationLimitM = 4.0;

/// Closed-loop rollout: replan every step at 10 Hz from the rolled-out pose,
/// advance ego to the first predicted point, keep logged agents non-reactive.
/// Terminates on ego-agent box overlap, on straying more than
/// deviation_limit_m from the expert path, or at scene end.
RolloutResult closed_loop(const Policy& policy, const scene::Scene& s,
                          double deviation_limit_m = kDefaultDeviationLimitM);
RolloutResult closed_loop(const planner::PlannerModel& model, const scene::Scene& s,
                          const raster::RasterConfig& rcfg,
                          double deviation_limit_m = kDefaultDeviationLimitM);

/// Pooled collision rate: total collisions over total executed steps.
/// Throws ValidationError when no steps were simulated.
double collision_rate(std::span<const RolloutResult> results);

struct OpenLoopStats {
    double ade = 0.0;            // mean over all (step, horizon-index) pairs
    long n_steps = 0;            // evaluated prediction steps
    std::vector<double> per_step_error;  // per step, mean over the 12 horizon points
};

/// Open-loop evaluation: predict from the logged expert pose at every frame
/// with enough history and future, compare to the expert future.
/// Throws ValidationError when no frame qualifies.
OpenLoopStats open_loop_ade(const Policy& policy, const std::vector<scene::Scene>& scenes);
OpenLoopStats open_loop_ade(const planner::PlannerModel& model,
                            const std::vector<scene::Scene>& scenes,
                            const raster::RasterConfig& rcfg);

constexpr double kVeryInfluenceThreshold = 0.1;
constexpr double kSlightInfluenceThreshold = 0.01;

enum class InfluenceClass { kVery, kSlight, kNone };

/// Boundary values land in slight.
InfluenceClass classify_influence(double influence);

struct InfluenceRecord {
    std::int64_t agent_id = 0;
    int frame_index = 0;
    double influence = 0.0;      // L2 over the flattened 24-vector
    double distance_m = 0.0;     // agent center to ego at frame_index
    double bearing_rad = 0.0;    // in the ego frame
    InfluenceClass classification = InfluenceClass::kNone;
};

/// Influence of one agent at one frame: L2 distance between the plan and the
/// plan with the agent masked out of every history channel. Throws
/// ValidationError when the agent is not observed at frame_index.
InfluenceRecord agent_influence(const planner::PlannerModel& model, const scene::Scene& s,
                                int frame_index, std::int64_t agent_id,
                                const raster::RasterConfig& rcfg);

struct InfluenceBucket {
    long total = 0;
    long very = 0;
    long slight = 0;

    double very_fraction() const { return static_cast<double>(very) / total; }
    double slight_fraction() const { return static_cast<double>(slight) / total; }
};

struct InfluenceHistogram {
    static constexpr double kDistanceBinM = 10.0;
    static constexpr double kMaxDistanceM = 100.0;
    static constexpr int kBearingSectors = 8;

    std::map<int, InfluenceBucket> by_distance;  // key: floor(distance / 10 m); absent = empty
    std::map<int, InfluenceBucket> by_bearing;   // key: 45-degree sector from -pi, CCW
    std::vector<InfluenceRecord> records;
};

/// Influence over every observed (agent, frame) pair; frame_stride subsamples
/// frames to bound cost. Pairs beyond 100 m are dropped from the distance
/// histogram but kept in the bearing histogram and records.
InfluenceHistogram influence_histogram(const planner::PlannerModel& model,
                                       const std::vector<scene::Scene>& scenes,
                                       const raster::RasterConfig& rcfg, int frame_stride = 1,
                                       int workers = 1);

}  // namespace planlab::eval
