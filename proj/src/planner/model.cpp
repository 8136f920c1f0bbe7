#include "planlab/planner/model.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "planlab/rng.hpp"

namespace planlab::planner {

using nlohmann::json;

PlannerModel init_model(const NetSpec& spec, std::uint64_t seed) {
    PlannerModel m;
    m.spec = spec;
    m.params.resize(spec.param_count());
    Rng rng(derive_seed(seed, 0x1417));
    // fan-in-scaled normal per layer, biases zero; order matches the layout
    std::size_t off = 0;
    auto fill = [&](std::size_t w_count, std::size_t b_count, int fan_in) {
        double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t i = 0; i < w_count; ++i)
            m.params[off + i] = static_cast<float>(scale * rng.normal());
        off += w_count;
        for (std::size_t i = 0; i < b_count; ++i) m.params[off + i] = 0.0f;
        off += b_count;
    };
    int c = spec.input_channels;
    for (int w : spec.conv_widths) {
        fill(static_cast<std::size_t>(w) * c * 9, w, c * 9);
        c = w;
    }
    fill(static_cast<std::size_t>(spec.fc_hidden) * c, spec.fc_hidden, c);
    fill(static_cast<std::size_t>(kOutputDim) * spec.fc_hidden, kOutputDim, spec.fc_hidden);
    return m;
}

std::vector<float> raster_input(const raster::Raster& r, const NetSpec& spec) {
    if (r.channels != spec.input_channels || r.size != spec.input_size)
        throw ValidationError("forward: raster shape " + std::to_string(r.channels) + "x" +
                              std::to_string(r.size) + "x" + std::to_string(r.size) +
                              " does not match model input " +
                              std::to_string(spec.input_channels) + "x" +
                              std::to_string(spec.input_size) + "x" +
                              std::to_string(spec.input_size));
    return r.data;
}

Trajectory forward(const PlannerModel& model, const raster::Raster& input) {
    Network net(model.spec);
    std::vector<float> in = raster_input(input, model.spec);
    std::array<float, kOutputDim> out{};
    net.forward(model.params, in, out);
    Trajectory traj;
    for (int t = 0; t < kHorizonSteps; ++t)
        traj.points[t] = {static_cast<double>(out[2 * t]), static_cast<double>(out[2 * t + 1])};
    return traj;
}

double trajectory_loss(const Trajectory& pred, const Trajectory& target) {
    double total = 0.0;
    for (int t = 0; t < kHorizonSteps; ++t) total += (pred.points[t] - target.points[t]).norm();
    return total;
}

std::vector<float> gradients(const PlannerModel& model, const raster::Raster& input,
                             const Trajectory& target) {
    Network net(model.spec);
    std::vector<float> in = raster_input(input, model.spec);
    std::array<float, kOutputDim> tgt{};
    for (int t = 0; t < kHorizonSteps; ++t) {
        tgt[2 * t] = static_cast<float>(target.points[t].x);
        tgt[2 * t + 1] = static_cast<float>(target.points[t].y);
    }
    std::vector<float> grads(net.param_count());
    net.loss_and_gradients(model.params, in, tgt, grads);
    return grads;
}

namespace {

constexpr char kMagic[8] = {'P', 'L', 'N', 'R', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

json provenance_to_json(const TrainProvenance& p) {
    return {{"dataset", p.dataset},       {"quality", p.quality},
            {"hours_equivalent", p.hours_equivalent}, {"epochs", p.epochs},
            {"learning_rate", p.learning_rate},       {"seed", p.seed},
            {"fine_tuned", p.fine_tuned}};
}

TrainProvenance provenance_from_json(const json& j) {
    TrainProvenance p;
    p.dataset = j.at("dataset").get<std::string>();
    p.quality = j.at("quality").get<std::string>();
    p.hours_equivalent = j.at("hours_equivalent").get<double>();
    p.epochs = j.at("epochs").get<int>();
    p.learning_rate = j.at("learning_rate").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.fine_tuned = j.at("fine_tuned").get<bool>();
    return p;
}

template <class T>
void write_le(std::ofstream& out, T v) {
    // assumes little-endian host (x86)
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <class T>
T read_le(std::ifstream& in, const std::string& path) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw ParseError(path + ": truncated checkpoint");
    return v;
}

}  // namespace

void save_model(const PlannerModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_le(out, kCheckpointVersion);
    write_le(out, model.spec.fingerprint());
    write_le(out, static_cast<std::uint64_t>(model.params.size()));
    out.write(reinterpret_cast<const char*>(model.params.data()),
              static_cast<std::streamsize>(model.params.size() * sizeof(float)));
    json meta;
    meta["net"] = {{"input_channels", model.spec.input_channels},
                   {"input_size", model.spec.input_size},
                   {"conv_widths", model.spec.conv_widths},
                   {"fc_hidden", model.spec.fc_hidden}};
    meta["provenance"] = provenance_to_json(model.provenance);
    std::string meta_str = meta.dump();
    write_le(out, static_cast<std::uint64_t>(meta_str.size()));
    out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));
    if (!out) throw ParseError("write failed: " + path);
}

PlannerModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw ParseError(path + ": not a planner checkpoint");
    auto version = read_le<std::uint32_t>(in, path);
    if (version != kCheckpointVersion)
        throw ParseError(path + ": unsupported checkpoint version " + std::to_string(version));
    auto stored_fp = read_le<std::uint64_t>(in, path);
    auto count = read_le<std::uint64_t>(in, path);

    PlannerModel m;
    m.params.resize(count);
    in.read(reinterpret_cast<char*>(m.params.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (!in) throw ParseError(path + ": truncated checkpoint");
    auto meta_len = read_le<std::uint64_t>(in, path);
    std::string meta_str(meta_len, '\0');
    in.read(meta_str.data(), static_cast<std::streamsize>(meta_len));
    if (!in) throw ParseError(path + ": truncated checkpoint");

    json meta;
    try {
        meta = json::parse(meta_str);
        const json& n = meta.at("net");
        m.spec.input_channels = n.at("input_channels").get<int>();
        m.spec.input_size = n.at("input_size").get<int>();
        m.spec.conv_widths = n.at("conv_widths").get<std::vector<int>>();
        m.spec.fc_hidden = n.at("fc_hidden").get<int>();
        m.provenance = provenance_from_json(meta.at("provenance"));
    } catch (const json::exception& e) {
        throw ParseError(path + ": bad checkpoint metadata: " + e.what());
    }
    if (m.spec.fingerprint() != stored_fp)
        throw ValidationError(path + ": architecture fingerprint mismatch");
    if (m.spec.param_count() != m.params.size())
        throw ValidationError(path + ": parameter count does not match architecture");
    return m;
}

}  // namespace planlab::planner
