#include "planlab/planner/train.hpp"

#include <cmath>
#include <numeric>
#include <thread>

#include "planlab/errors.hpp"
#include "planlab/rng.hpp"

namespace planlab::planner {

using scene::Scene;
using scene::Vec2;

namespace {

struct SampleRef {
    int scene;
    int frame;
};

std::vector<SampleRef> collect_samples(const std::vector<Scene>& scenes, int history) {
    std::vector<SampleRef> out;
    for (int si = 0; si < static_cast<int>(scenes.size()); ++si) {
        int n = static_cast<int>(scenes[si].frames.size());
        for (int k = history - 1; k + kHorizonSteps < n; ++k) out.push_back({si, k});
    }
    return out;
}

void validate_config(const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw ConfigError("train config: epochs >= 1 required");
    if (cfg.batch_size < 1) throw ConfigError("train config: batch size >= 1 required");
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("train config: learning rate > 0 required");
    if (cfg.workers < 1) throw ConfigError("train config: workers >= 1 required");
}

/// Rasterizes one sample at its (possibly perturbed) ego pose and returns
/// the loss while accumulating gradients into grads.
float sample_loss_and_gradients(const Scene& sc, const SampleRef& ref,
                                const raster::RasterConfig& rcfg, const TrainConfig& cfg,
                                int epoch, const Network& net, std::span<const float> params,
                                std::span<float> grads) {
    const auto& frames = sc.frames;
    const scene::Pose2D ego = frames[ref.frame].ego;
    std::vector<Vec2> future(kHorizonSteps);
    for (int t = 0; t < kHorizonSteps; ++t)
        future[t] = frames[ref.frame + 1 + t].ego.position();

    // per-(epoch, sample) stream: independent of shuffle order and workers
    std::uint64_t key = derive_seed(cfg.seed, 0x7261696eULL + static_cast<std::uint64_t>(epoch));
    key = derive_seed(key, static_cast<std::uint64_t>(ref.scene));
    key = derive_seed(key, static_cast<std::uint64_t>(ref.frame));
    Rng rng(key);
    PerturbedSample ps = perturb_sample(ego, future, cfg.perturb, rng);

    raster::RenderOptions opt;
    opt.ref_pose = ps.ego_pose;
    opt.ego_history.reserve(rcfg.history);
    for (int h = rcfg.history - 1; h >= 1; --h)
        opt.ego_history.push_back(frames[ref.frame - h].ego);
    opt.ego_history.push_back(ps.ego_pose);
    raster::Raster r = raster::render(sc, ref.frame, rcfg, opt);

    std::array<float, kOutputDim> tgt;
    for (int t = 0; t < kHorizonSteps; ++t) {
        tgt[2 * t] = static_cast<float>(ps.target.points[t].x);
        tgt[2 * t + 1] = static_cast<float>(ps.target.points[t].y);
    }
    return net.loss_and_gradients(params, r.data, tgt, grads);
}

TrainResult run_training(const std::vector<Scene>& scenes, const raster::RasterConfig& rcfg,
                         const TrainConfig& cfg, PlannerModel model) {
    validate_config(cfg);
    std::vector<SampleRef> samples = collect_samples(scenes, rcfg.history);
    if (samples.empty())
        throw ValidationError("train: no frame has both " + std::to_string(rcfg.history - 1) +
                              " history frames and " + std::to_string(kHorizonSteps) +
                              " future frames");

    Network net(model.spec);
    const std::size_t np = net.param_count();
    const int batch = cfg.batch_size;

    // adaptive-moment state
    std::vector<float> m(np, 0.0f), v(np, 0.0f), batch_grad(np);
    std::vector<std::vector<float>> slot_grads(batch, std::vector<float>(np));
    std::vector<float> slot_loss(batch);
    long step = 0;

    TrainResult result;
    std::vector<int> order(samples.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(cfg.seed, 0x73687566ULL + static_cast<std::uint64_t>(epoch)));
        for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
            std::swap(order[i], order[shuffle_rng.uniform_int(i + 1)]);

        double epoch_loss = 0.0;
        for (std::size_t b0 = 0; b0 < order.size(); b0 += batch) {
            int count = static_cast<int>(std::min<std::size_t>(batch, order.size() - b0));
            auto work = [&](int worker) {
                for (int i = worker; i < count; i += cfg.workers) {
                    const SampleRef& ref = samples[order[b0 + i]];
                    slot_loss[i] = sample_loss_and_gradients(scenes[ref.scene], ref, rcfg, cfg,
                                                             epoch, net, model.params,
                                                             slot_grads[i]);
                }
            };
            if (cfg.workers == 1) {
                work(0);
            } else {
                std::vector<std::thread> threads;
                for (int w = 0; w < cfg.workers; ++w) threads.emplace_back(work, w);
                for (auto& t : threads) t.join();
            }

            // fixed-order reduction to the mini-batch mean
            std::fill(batch_grad.begin(), batch_grad.end(), 0.0f);
            float inv = 1.0f / static_cast<float>(count);
            for (int i = 0; i < count; ++i) {
                epoch_loss += slot_loss[i];
                const float* g = slot_grads[i].data();
                for (std::size_t p = 0; p < np; ++p) batch_grad[p] += g[p];
            }
            for (std::size_t p = 0; p < np; ++p) batch_grad[p] *= inv;

            ++step;
            double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            for (std::size_t p = 0; p < np; ++p) {
                double g = batch_grad[p];
                double mp = cfg.beta1 * m[p] + (1.0 - cfg.beta1) * g;
                double vp = cfg.beta2 * v[p] + (1.0 - cfg.beta2) * g * g;
                m[p] = static_cast<float>(mp);
                v[p] = static_cast<float>(vp);
                double update = cfg.learning_rate * (mp / bc1) /
                                (std::sqrt(vp / bc2) + cfg.adam_eps);
                model.params[p] = static_cast<float>(model.params[p] - update);
            }
        }
        result.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(samples.size()));
    }

    result.model = std::move(model);
    return result;
}

double hours_equivalent(const std::vector<Scene>& scenes) {
    double total_s = 0.0;
    for (const Scene& s : scenes) total_s += static_cast<double>(s.frames.size()) * s.dt_s;
    return total_s / 3600.0;
}

}  // namespace

TrainResult train(const std::vector<Scene>& scenes, const raster::RasterConfig& rcfg,
                  const TrainConfig& cfg, const NetSpec* spec_override) {
    NetSpec spec = spec_override ? *spec_override : NetSpec{};
    spec.input_channels = rcfg.channels();
    spec.input_size = rcfg.size_px;
    PlannerModel model = init_model(spec, cfg.seed);
    TrainResult result = run_training(scenes, rcfg, cfg, std::move(model));
    TrainProvenance& p = result.model.provenance;
    p.dataset = cfg.dataset_label;
    p.quality = scenes.empty() ? "" : scenes.front().provenance.quality_label();
    p.hours_equivalent = hours_equivalent(scenes);
    p.epochs = cfg.epochs;
    p.learning_rate = cfg.learning_rate;
    p.seed = cfg.seed;
    p.fine_tuned = false;
    return result;
}

TrainResult fine_tune(const PlannerModel& model, const std::vector<Scene>& clean_scenes,
                      const raster::RasterConfig& rcfg, const TrainConfig& base) {
    if (model.spec.input_channels != rcfg.channels() || model.spec.input_size != rcfg.size_px)
        throw ValidationError("fine_tune: raster config does not match model input shape");
    TrainConfig cfg = base;
    cfg.epochs = 2;
    cfg.learning_rate = base.learning_rate / 10.0;
    TrainResult result = run_training(clean_scenes, rcfg, cfg, model);
    TrainProvenance& p = result.model.provenance;
    p.dataset = cfg.dataset_label.empty() ? model.provenance.dataset : cfg.dataset_label;
    p.quality = clean_scenes.empty() ? "" : clean_scenes.front().provenance.quality_label();
    p.hours_equivalent = hours_equivalent(clean_scenes);
    p.epochs = cfg.epochs;
    p.learning_rate = cfg.learning_rate;
    p.seed = cfg.seed;
    p.fine_tuned = true;
    return result;
}

}  // namespace planlab::planner
