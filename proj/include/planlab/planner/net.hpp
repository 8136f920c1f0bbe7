#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "planlab/errors.hpp"

namespace planlab::planner {

constexpr int kHorizonSteps = 12;   // 1.2 s at 10 Hz
constexpr int kOutputDim = 2 * kHorizonSteps;

/// Architecture description: conv stages (3x3, stride 2, pad 1, each followed
/// by ReLU) -> global average pool -> FC -> ReLU -> FC(output).
struct NetSpec {
    int input_channels = 8;
    int input_size = 256;
    std::vector<int> conv_widths{16, 32, 64, 64, 64};
    int fc_hidden = 128;

    std::string description() const;
    std::uint64_t fingerprint() const;  // FNV-1a over description()
    std::size_t param_count() const;

    friend bool operator==(const NetSpec&, const NetSpec&) = default;
};

/// Forward / reverse-mode engine over a flat parameter vector. Templated on
/// the scalar so tests can run the exact same code in double precision for
/// finite-difference checks. All methods are const and allocate their own
/// workspace; safe to call concurrently on one instance.
template <class S>
class NetworkT {
public:
    using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

    explicit NetworkT(NetSpec spec);

    const NetSpec& spec() const { return spec_; }
    std::size_t param_count() const { return param_count_; }
    std::size_t input_count() const {
        return static_cast<std::size_t>(spec_.input_channels) * spec_.input_size * spec_.input_size;
    }

    /// output must have kOutputDim entries.
    void forward(std::span<const S> params, std::span<const S> input, std::span<S> output) const;

    /// Computes the trajectory loss against target (kOutputDim entries) and
    /// writes exact reverse-mode gradients for every parameter into grads
    /// (overwritten; param_count entries). Returns the loss.
    S loss_and_gradients(std::span<const S> params, std::span<const S> input,
                         std::span<const S> target, std::span<S> grads) const;

    /// Sum over the 12 steps of the per-step Euclidean distance.
    static S trajectory_loss(std::span<const S> pred, std::span<const S> target) {
        S total = 0;
        for (int t = 0; t < kHorizonSteps; ++t) {
            S dx = pred[2 * t] - target[2 * t];
            S dy = pred[2 * t + 1] - target[2 * t + 1];
            total += std::sqrt(dx * dx + dy * dy);
        }
        return total;
    }

private:
    struct ConvGeom {
        int in_c, out_c, in_s, out_s;
        std::size_t w_off, b_off;
    };

    struct Workspace {
        std::vector<Mat> cols;  // im2col per conv layer
        std::vector<Mat> acts;  // post-ReLU activations per conv layer (out_c x npix)
        Vec pooled, hidden, out;
    };

    void run_forward(std::span<const S> params, std::span<const S> input, Workspace& ws) const;

    NetSpec spec_;
    std::vector<ConvGeom> convs_;
    std::size_t fc1_w_off_ = 0, fc1_b_off_ = 0, fc2_w_off_ = 0, fc2_b_off_ = 0;
    int gap_dim_ = 0;
    std::size_t param_count_ = 0;
};

using Network = NetworkT<float>;

extern template class NetworkT<float>;
extern template class NetworkT<double>;

}  // namespace planlab::planner
