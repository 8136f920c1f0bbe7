#include "planlab/eval/eval.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "planlab/errors.hpp"
#include "planlab/scene/geometry.hpp"

namespace planlab::eval {

using planner::kHorizonSteps;
using planner::Trajectory;
using scene::Pose2D;
using scene::Scene;
using scene::Vec2;

ModelPolicy::ModelPolicy(const planner::PlannerModel& model, const raster::RasterConfig& rcfg)
    : model_(model), rcfg_(rcfg) {
    if (model.spec.input_channels != rcfg.channels() || model.spec.input_size != rcfg.size_px)
        throw ValidationError("policy: raster config does not match model input shape");
}

Trajectory ModelPolicy::plan(const Scene& s, int frame_index, const Pose2D& ego_pose,
                             std::span<const Pose2D> ego_history) const {
    raster::RenderOptions opt;
    opt.ref_pose = ego_pose;
    opt.ego_history.assign(ego_history.begin(), ego_history.end());
    raster::Raster r = raster::render(s, frame_index, rcfg_, opt);
    return planner::forward(model_, r);
}

Trajectory ExpertReplayPolicy::plan(const Scene& s, int frame_index, const Pose2D& ego_pose,
                                    std::span<const Pose2D>) const {
    Trajectory traj;
    int last = static_cast<int>(s.frames.size()) - 1;
    for (int t = 0; t < kHorizonSteps; ++t) {
        int k = std::min(frame_index + 1 + t, last);
        traj.points[t] = scene::to_local(s.frames[k].ego.position(), ego_pose);
    }
    return traj;
}

std::string termination_name(Termination t) {
    switch (t) {
        case Termination::kCompleted: return "completed";
        case Termination::kCollision: return "collision";
        case Termination::kDeviation: return "deviation";
    }
    return "unknown";
}

RolloutResult closed_loop(const Policy& policy, const Scene& s, double deviation_limit_m) {
    if (deviation_limit_m <= 0.0) throw ConfigError("closed_loop: deviation limit > 0 required");
    const int n = static_cast<int>(s.frames.size());
    const int h = policy.history();
    const int start = h - 1;

    RolloutResult res;
    res.scene_id = s.scene_id;
    if (start >= n) return res;

    std::vector<Vec2> expert_path;
    expert_path.reserve(n);
    for (const auto& f : s.frames) expert_path.push_back(f.ego.position());

    std::vector<Pose2D> history;
    for (int k = 0; k <= start; ++k) history.push_back(s.frames[k].ego);
    Pose2D ego = s.frames[start].ego;
    res.trace.push_back(ego);

    for (int k = start; k + 1 < n; ++k) {
        Trajectory traj = policy.plan(s, k, ego, history);
        Vec2 next = scene::to_world(traj.points[0], ego);
        Vec2 step = next - ego.position();
        double yaw = step.norm() < 0.01 ? ego.yaw : std::atan2(step.y, step.x);
        ego = {next.x, next.y, yaw};
        ++res.steps_simulated;
        res.trace.push_back(ego);
        history.push_back(ego);
        if (static_cast<int>(history.size()) > h) history.erase(history.begin());

        // now at frame k+1 with logged, non-reactive agents
        const scene::Frame& fr = s.frames[k + 1];
        scene::OrientedBox ego_box{ego, fr.ego_extent.length, fr.ego_extent.width};
        bool hit = false;
        for (const auto& a : fr.agents) {
            if (scene::boxes_overlap(ego_box, a.box)) {
                hit = true;
                break;
            }
        }
        if (hit) {
            res.collided = true;
            res.termination = Termination::kCollision;
            return res;
        }
        if (scene::point_polyline_distance(ego.position(), expert_path) > deviation_limit_m) {
            res.termination = Termination::kDeviation;
            return res;
        }
    }
    res.termination = Termination::kCompleted;
    return res;
}

RolloutResult closed_loop(const planner::PlannerModel& model, const Scene& s,
                          const raster::RasterConfig& rcfg, double deviation_limit_m) {
    ModelPolicy policy(model, rcfg);
    return closed_loop(policy, s, deviation_limit_m);
}

double collision_rate(std::span<const RolloutResult> results) {
    long steps = 0, collisions = 0;
    for (const auto& r : results) {
        steps += r.steps_simulated;
        collisions += r.collided ? 1 : 0;
    }
    if (steps == 0) throw ValidationError("collision_rate: zero steps simulated");
    return static_cast<double>(collisions) / static_cast<double>(steps);
}

OpenLoopStats open_loop_ade(const Policy& policy, const std::vector<Scene>& scenes) {
    OpenLoopStats stats;
    double total = 0.0;
    long points = 0;
    const int h = policy.history();
    for (const Scene& s : scenes) {
        const int n = static_cast<int>(s.frames.size());
        for (int k = h - 1; k + kHorizonSteps < n; ++k) {
            std::vector<Pose2D> history;
            for (int j = k - h + 1; j <= k; ++j) history.push_back(s.frames[j].ego);
            const Pose2D& ego = s.frames[k].ego;
            Trajectory traj = policy.plan(s, k, ego, history);
            double step_sum = 0.0;
            for (int t = 0; t < kHorizonSteps; ++t) {
                Vec2 pred = scene::to_world(traj.points[t], ego);
                step_sum += (pred - s.frames[k + 1 + t].ego.position()).norm();
            }
            stats.per_step_error.push_back(step_sum / kHorizonSteps);
            total += step_sum;
            points += kHorizonSteps;
            ++stats.n_steps;
        }
    }
    if (stats.n_steps == 0)
        throw ValidationError("open_loop_ade: no frame has enough history and future");
    stats.ade = total / static_cast<double>(points);
    return stats;
}

OpenLoopStats open_loop_ade(const planner::PlannerModel& model, const std::vector<Scene>& scenes,
                            const raster::RasterConfig& rcfg) {
    ModelPolicy policy(model, rcfg);
    return open_loop_ade(policy, scenes);
}

InfluenceClass classify_influence(double influence) {
    if (influence > kVeryInfluenceThreshold) return InfluenceClass::kVery;
    if (influence >= kSlightInfluenceThreshold) return InfluenceClass::kSlight;
    return InfluenceClass::kNone;
}

namespace {

double trajectory_l2(const Trajectory& a, const Trajectory& b) {
    double sq = 0.0;
    for (int t = 0; t < kHorizonSteps; ++t) {
        Vec2 d = a.points[t] - b.points[t];
        sq += d.x * d.x + d.y * d.y;
    }
    return std::sqrt(sq);
}

}  // namespace

InfluenceRecord agent_influence(const planner::PlannerModel& model, const Scene& s,
                                int frame_index, std::int64_t agent_id,
                                const raster::RasterConfig& rcfg) {
    if (frame_index < rcfg.history - 1 || frame_index >= static_cast<int>(s.frames.size()))
        throw ValidationError("influence: frame index lacks history or is out of range");
    const scene::Frame& fr = s.frames[frame_index];
    const scene::AgentObservation* obs = nullptr;
    for (const auto& a : fr.agents)
        if (a.agent_id == agent_id) obs = &a;
    if (!obs)
        throw ValidationError("influence: agent " + std::to_string(agent_id) +
                              " not observed at frame " + std::to_string(frame_index));

    Trajectory base = planner::forward(model, raster::rasterize(s, frame_index, rcfg));
    Trajectory masked =
        planner::forward(model, raster::rasterize_masked(s, frame_index, agent_id, rcfg));

    InfluenceRecord rec;
    rec.agent_id = agent_id;
    rec.frame_index = frame_index;
    rec.influence = trajectory_l2(base, masked);
    Vec2 local = scene::to_local(obs->box.center.position(), fr.ego);
    rec.distance_m = local.norm();
    rec.bearing_rad = std::atan2(local.y, local.x);
    rec.classification = classify_influence(rec.influence);
    return rec;
}

InfluenceHistogram influence_histogram(const planner::PlannerModel& model,
                                       const std::vector<Scene>& scenes,
                                       const raster::RasterConfig& rcfg, int frame_stride,
                                       int workers) {
    if (scenes.empty()) throw ValidationError("influence_histogram: no scenes");
    if (frame_stride < 1) throw ConfigError("influence_histogram: frame stride >= 1 required");
    if (workers < 1) throw ConfigError("influence_histogram: workers >= 1 required");

    std::vector<std::vector<InfluenceRecord>> per_scene(scenes.size());
    auto work = [&](int worker) {
        for (std::size_t si = worker; si < scenes.size(); si += workers) {
            const Scene& s = scenes[si];
            for (int k = rcfg.history - 1; k < static_cast<int>(s.frames.size());
                 k += frame_stride) {
                for (const auto& a : s.frames[k].agents)
                    per_scene[si].push_back(agent_influence(model, s, k, a.agent_id, rcfg));
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < workers; ++w) threads.emplace_back(work, w);
        for (auto& t : threads) t.join();
    }

    InfluenceHistogram hist;
    for (auto& recs : per_scene) {
        for (const InfluenceRecord& rec : recs) {
            bool very = rec.classification == InfluenceClass::kVery;
            bool slight = rec.classification == InfluenceClass::kSlight;
            if (rec.distance_m < InfluenceHistogram::kMaxDistanceM) {
                int bin = static_cast<int>(rec.distance_m / InfluenceHistogram::kDistanceBinM);
                auto& b = hist.by_distance[bin];
                ++b.total;
                b.very += very;
                b.slight += slight;
            }
            double span = 2.0 * M_PI / InfluenceHistogram::kBearingSectors;
            int sector = static_cast<int>((rec.bearing_rad + M_PI) / span);
            sector = std::clamp(sector, 0, InfluenceHistogram::kBearingSectors - 1);
            auto& b = hist.by_bearing[sector];
            ++b.total;
            b.very += very;
            b.slight += slight;
            hist.records.push_back(rec);
        }
    }
    return hist;
}

}  // namespace planlab::eval
