#include "planlab/planner/net.hpp"

#include <sstream>

namespace planlab::planner {

std::string NetSpec::description() const {
    std::ostringstream os;
    os << "in " << input_channels << "x" << input_size << "x" << input_size;
    int s = input_size;
    int c = input_channels;
    for (int w : conv_widths) {
        s = (s + 1) / 2;
        os << ";conv3x3s2 " << c << "->" << w << " relu";
        c = w;
    }
    os << ";gap;fc " << c << "->" << fc_hidden << " relu;fc " << fc_hidden << "->" << kOutputDim;
    return os.str();
}

std::uint64_t NetSpec::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
    for (char ch : description()) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ull;
    }
    return h;
}

std::size_t NetSpec::param_count() const {
    std::size_t n = 0;
    int c = input_channels;
    for (int w : conv_widths) {
        n += static_cast<std::size_t>(w) * c * 9 + w;
        c = w;
    }
    n += static_cast<std::size_t>(fc_hidden) * c + fc_hidden;
    n += static_cast<std::size_t>(kOutputDim) * fc_hidden + kOutputDim;
    return n;
}

template <class S>
NetworkT<S>::NetworkT(NetSpec spec) : spec_(std::move(spec)) {
    if (spec_.conv_widths.empty()) throw ConfigError("net spec: at least one conv stage");
    std::size_t off = 0;
    int c = spec_.input_channels;
    int s = spec_.input_size;
    for (int w : spec_.conv_widths) {
        ConvGeom g;
        g.in_c = c;
        g.out_c = w;
        g.in_s = s;
        g.out_s = (s + 1) / 2;
        g.w_off = off;  // stored (in_c*9) x out_c, column-major
        off += static_cast<std::size_t>(w) * c * 9;
        g.b_off = off;
        off += w;
        convs_.push_back(g);
        c = w;
        s = g.out_s;
    }
    gap_dim_ = c;
    fc1_w_off_ = off;  // fc_hidden x gap_dim, column-major
    off += static_cast<std::size_t>(spec_.fc_hidden) * c;
    fc1_b_off_ = off;
    off += spec_.fc_hidden;
    fc2_w_off_ = off;  // kOutputDim x fc_hidden, column-major
    off += static_cast<std::size_t>(kOutputDim) * spec_.fc_hidden;
    fc2_b_off_ = off;
    off += kOutputDim;
    param_count_ = off;
}

namespace {

/// im2col for 3x3 stride-2 pad-1 into a (npix x in_c*9) matrix: row = output
/// pixel oy*out_s+ox, column = ic*9 + ky*3 + kx. Input is channel-major
/// planes of in_s*in_s values.
template <class S, class Mat>
void im2col(const S* input, int in_c, int in_s, int out_s, Mat& col) {
    col.setZero(out_s * out_s, in_c * 9);
    for (int ic = 0; ic < in_c; ++ic) {
        const S* chan = input + static_cast<std::size_t>(ic) * in_s * in_s;
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                S* dst_col = col.data() + static_cast<std::size_t>(ic * 9 + ky * 3 + kx) *
                                              (out_s * out_s);
                for (int oy = 0; oy < out_s; ++oy) {
                    int iy = 2 * oy + ky - 1;
                    if (iy < 0 || iy >= in_s) continue;
                    const S* src = chan + static_cast<std::size_t>(iy) * in_s;
                    S* dst = dst_col + static_cast<std::size_t>(oy) * out_s;
                    for (int ox = 0; ox < out_s; ++ox) {
                        int ix = 2 * ox + kx - 1;
                        if (ix < 0 || ix >= in_s) continue;
                        dst[ox] = src[ix];
                    }
                }
            }
        }
    }
}

/// Scatter-add the (npix x in_c*9) gradient back onto channel-major input
/// planes.
template <class S, class Mat>
void col2im_add(const Mat& dcol, int in_c, int in_s, int out_s, S* dinput) {
    for (int ic = 0; ic < in_c; ++ic) {
        S* chan = dinput + static_cast<std::size_t>(ic) * in_s * in_s;
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                const S* src_col = dcol.data() + static_cast<std::size_t>(ic * 9 + ky * 3 + kx) *
                                                     (out_s * out_s);
                for (int oy = 0; oy < out_s; ++oy) {
                    int iy = 2 * oy + ky - 1;
                    if (iy < 0 || iy >= in_s) continue;
                    S* dst = chan + static_cast<std::size_t>(iy) * in_s;
                    const S* src = src_col + static_cast<std::size_t>(oy) * out_s;
                    for (int ox = 0; ox < out_s; ++ox) {
                        int ix = 2 * ox + kx - 1;
                        if (ix < 0 || ix >= in_s) continue;
                        dst[ix] += src[ox];
                    }
                }
            }
        }
    }
}

}  // namespace

template <class S>
void NetworkT<S>::run_forward(std::span<const S> params, std::span<const S> input,
                              Workspace& ws) const {
    using CMap = Eigen::Map<const Mat>;
    if (input.size() != input_count())
        throw ValidationError("forward: input shape mismatch, expected " +
                              std::to_string(input_count()) + " values, got " +
                              std::to_string(input.size()));
    if (params.size() != param_count_) throw ValidationError("forward: parameter count mismatch");

    ws.cols.resize(convs_.size());
    ws.acts.resize(convs_.size());
    const S* cur = input.data();
    for (std::size_t l = 0; l < convs_.size(); ++l) {
        const ConvGeom& g = convs_[l];
        im2col(cur, g.in_c, g.in_s, g.out_s, ws.cols[l]);
        CMap w(params.data() + g.w_off, g.in_c * 9, g.out_c);
        CMap b(params.data() + g.b_off, 1, g.out_c);
        Mat& act = ws.acts[l];  // (npix x out_c): one contiguous plane per channel
        act.noalias() = ws.cols[l] * w;
        act.rowwise() += b.row(0);
        act = act.cwiseMax(S(0));
        cur = act.data();
    }
    const Mat& last = ws.acts.back();
    ws.pooled = last.colwise().mean().transpose();

    CMap w1(params.data() + fc1_w_off_, spec_.fc_hidden, gap_dim_);
    Eigen::Map<const Vec> b1(params.data() + fc1_b_off_, spec_.fc_hidden);
    ws.hidden.noalias() = w1 * ws.pooled;
    ws.hidden += b1;
    ws.hidden = ws.hidden.cwiseMax(S(0));

    CMap w2(params.data() + fc2_w_off_, kOutputDim, spec_.fc_hidden);
    Eigen::Map<const Vec> b2(params.data() + fc2_b_off_, kOutputDim);
    ws.out.noalias() = w2 * ws.hidden;
    ws.out += b2;
}

template <class S>
void NetworkT<S>::forward(std::span<const S> params, std::span<const S> input,
                          std::span<S> output) const {
    Workspace ws;
    run_forward(params, input, ws);
    for (int i = 0; i < kOutputDim; ++i) output[i] = ws.out[i];
}

template <class S>
S NetworkT<S>::loss_and_gradients(std::span<const S> params, std::span<const S> input,
                                  std::span<const S> target, std::span<S> grads) const {
    using CMap = Eigen::Map<const Mat>;
    using MMap = Eigen::Map<Mat>;
    Workspace ws;
    run_forward(params, input, ws);

    S loss = 0;
    Vec dout(kOutputDim);
    for (int t = 0; t < kHorizonSteps; ++t) {
        S dx = ws.out[2 * t] - target[2 * t];
        S dy = ws.out[2 * t + 1] - target[2 * t + 1];
        S d = std::sqrt(dx * dx + dy * dy);
        loss += d;
        if (d > S(0)) {
            dout[2 * t] = dx / d;
            dout[2 * t + 1] = dy / d;
        } else {
            dout[2 * t] = 0;
            dout[2 * t + 1] = 0;
        }
    }
    if (!std::isfinite(static_cast<double>(loss)))
        throw ValidationError("gradients: non-finite loss");

    std::fill(grads.begin(), grads.end(), S(0));

    // fc2
    CMap w2(params.data() + fc2_w_off_, kOutputDim, spec_.fc_hidden);
    MMap dw2(grads.data() + fc2_w_off_, kOutputDim, spec_.fc_hidden);
    Eigen::Map<Vec> db2(grads.data() + fc2_b_off_, kOutputDim);
    dw2.noalias() = dout * ws.hidden.transpose();
    db2 = dout;
    Vec dhidden = w2.transpose() * dout;
    dhidden = dhidden.array() * (ws.hidden.array() > S(0)).template cast<S>();

    // fc1
    CMap w1(params.data() + fc1_w_off_, spec_.fc_hidden, gap_dim_);
    MMap dw1(grads.data() + fc1_w_off_, spec_.fc_hidden, gap_dim_);
    Eigen::Map<Vec> db1(grads.data() + fc1_b_off_, spec_.fc_hidden);
    dw1.noalias() = dhidden * ws.pooled.transpose();
    db1 = dhidden;
    Vec dpooled = w1.transpose() * dhidden;

    // global average pool: gradient spreads evenly over the pixels
    const ConvGeom& lastg = convs_.back();
    int np = lastg.out_s * lastg.out_s;
    Mat dact = (dpooled.transpose() / S(np)).replicate(np, 1);

    // conv stack, top down
    Mat dx_buf;
    for (int l = static_cast<int>(convs_.size()) - 1; l >= 0; --l) {
        const ConvGeom& g = convs_[l];
        Mat dy = dact.array() * (ws.acts[l].array() > S(0)).template cast<S>();
        CMap w(params.data() + g.w_off, g.in_c * 9, g.out_c);
        MMap dw(grads.data() + g.w_off, g.in_c * 9, g.out_c);
        Eigen::Map<Mat> db(grads.data() + g.b_off, 1, g.out_c);
        dw.noalias() = ws.cols[l].transpose() * dy;
        db = dy.colwise().sum();
        if (l == 0) break;  // gradient w.r.t. the raster input is not needed
        Mat dcol;
        dcol.noalias() = dy * w.transpose();
        dx_buf.setZero(g.in_s * g.in_s, g.in_c);
        col2im_add(dcol, g.in_c, g.in_s, g.out_s, dx_buf.data());
        dact = std::move(dx_buf);
    }
    return loss;
}

template class NetworkT<float>;
template class NetworkT<double>;

}  // namespace planlab::planner
