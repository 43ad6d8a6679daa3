#include "ggs/nn.hpp"

#include <cmath>

namespace ggs {

Conv2d::Conv2d(int in_ch, int out_ch, int ksize, int stride, int pad, bool bias)
    : in_ch_(in_ch), out_ch_(out_ch), ksize_(ksize), stride_(stride), pad_(pad), has_bias_(bias) {
    if (in_ch <= 0 || out_ch <= 0 || ksize <= 0 || stride <= 0 || pad < 0)
        throw ConfigError("conv2d: invalid geometry");
    weight_.resize(std::size_t(out_ch) * in_ch * ksize * ksize);
    if (has_bias_) bias_.resize(out_ch);
}

void Conv2d::init(Rng& rng) {
    const double std = std::sqrt(2.0 / (double(in_ch_) * ksize_ * ksize_));
    for (double& w : weight_.value) w = rng.normal(0.0, std);
    if (has_bias_)
        for (double& b : bias_.value) b = 0.0;
}

std::vector<Param*> Conv2d::params() {
    std::vector<Param*> p{&weight_};
    if (has_bias_) p.push_back(&bias_);
    return p;
}

Tensor Conv2d::forward(const Tensor& in, Tape* tape) {
    if (in.channels() != in_ch_)
        throw ModelError("conv2d expects " + std::to_string(in_ch_) + " channels, got " +
                         std::to_string(in.channels()));
    const int H = in.height(), W = in.width();
    const int OH = out_height(H), OW = out_width(W);
    if (OH <= 0 || OW <= 0) throw ModelError("conv2d: input too small: " + in.shape_str());

    Tensor out(out_ch_, OH, OW);
    for (int oc = 0; oc < out_ch_; ++oc) {
        double* out_plane = out.plane(oc);
        if (has_bias_) {
            const double b = bias_.value[oc];
            for (int i = 0; i < OH * OW; ++i) out_plane[i] = b;
        }
        for (int ic = 0; ic < in_ch_; ++ic) {
            const double* in_plane = in.plane(ic);
            const double* wk = weight_.value.data() +
                               ((std::size_t(oc) * in_ch_ + ic) * ksize_) * ksize_;
            for (int ky = 0; ky < ksize_; ++ky) {
                for (int kx = 0; kx < ksize_; ++kx) {
                    const double wv = wk[ky * ksize_ + kx];
                    // output rows/cols whose sampled input stays in bounds
                    int oy0 = 0, oy1 = OH, ox0 = 0, ox1 = OW;
                    while (oy0 < OH && oy0 * stride_ - pad_ + ky < 0) ++oy0;
                    while (oy1 > oy0 && (oy1 - 1) * stride_ - pad_ + ky >= H) --oy1;
                    while (ox0 < OW && ox0 * stride_ - pad_ + kx < 0) ++ox0;
                    while (ox1 > ox0 && (ox1 - 1) * stride_ - pad_ + kx >= W) --ox1;
                    for (int oy = oy0; oy < oy1; ++oy) {
                        const double* in_row = in_plane + std::size_t(oy * stride_ - pad_ + ky) * W;
                        double* out_row = out_plane + std::size_t(oy) * OW;
                        const int base = kx - pad_;
                        for (int ox = ox0; ox < ox1; ++ox)
                            out_row[ox] += wv * in_row[ox * stride_ + base];
                    }
                }
            }
        }
    }
    if (tape) tape->push(in);
    return out;
}

Tensor Conv2d::backward(const Tensor& d_out, Tape& tape, bool accumulate, bool need_dinput) {
    const Tensor in = tape.pop();
    const int H = in.height(), W = in.width();
    const int OH = d_out.height(), OW = d_out.width();
    if (d_out.channels() != out_ch_) throw ModelError("conv2d backward: channel mismatch");

    Tensor d_in;
    if (need_dinput) d_in = Tensor(in_ch_, H, W);

    if (accumulate && has_bias_) {
        for (int oc = 0; oc < out_ch_; ++oc) {
            const double* g = d_out.plane(oc);
            double acc = 0.0;
            for (int i = 0; i < OH * OW; ++i) acc += g[i];
            bias_.grad[oc] += acc;
        }
    }

    for (int oc = 0; oc < out_ch_; ++oc) {
        const double* g_plane = d_out.plane(oc);
        for (int ic = 0; ic < in_ch_; ++ic) {
            const double* in_plane = in.plane(ic);
            double* din_plane = need_dinput ? d_in.plane(ic) : nullptr;
            const std::size_t wbase = (std::size_t(oc) * in_ch_ + ic) * ksize_ * ksize_;
            for (int ky = 0; ky < ksize_; ++ky) {
                for (int kx = 0; kx < ksize_; ++kx) {
                    const double wv = weight_.value[wbase + ky * ksize_ + kx];
                    double wacc = 0.0;
                    int oy0 = 0, oy1 = OH, ox0 = 0, ox1 = OW;
                    while (oy0 < OH && oy0 * stride_ - pad_ + ky < 0) ++oy0;
                    while (oy1 > oy0 && (oy1 - 1) * stride_ - pad_ + ky >= H) --oy1;
                    while (ox0 < OW && ox0 * stride_ - pad_ + kx < 0) ++ox0;
                    while (ox1 > ox0 && (ox1 - 1) * stride_ - pad_ + kx >= W) --ox1;
                    const int base = kx - pad_;
                    for (int oy = oy0; oy < oy1; ++oy) {
                        const std::size_t iy = std::size_t(oy * stride_ - pad_ + ky);
                        const double* in_row = in_plane + iy * W;
                        const double* g_row = g_plane + std::size_t(oy) * OW;
                        if (need_dinput) {
                            double* din_row = din_plane + iy * W;
                            for (int ox = ox0; ox < ox1; ++ox) {
                                const double g = g_row[ox];
                                wacc += g * in_row[ox * stride_ + base];
                                din_row[ox * stride_ + base] += wv * g;
                            }
                        } else {
                            for (int ox = ox0; ox < ox1; ++ox)
                                wacc += g_row[ox] * in_row[ox * stride_ + base];
                        }
                    }
                    if (accumulate) weight_.grad[wbase + ky * ksize_ + kx] += wacc;
                }
            }
        }
    }
    return d_in;
}

Tensor ReLU::forward(const Tensor& in, Tape* tape) {
    Tensor out = in;
    for (double& v : out.raw())
        if (v < 0.0) v = 0.0;
    if (tape) tape->push(in);
    return out;
}

Tensor ReLU::backward(const Tensor& d_out, Tape& tape, bool /*accumulate*/, bool need_dinput) {
    const Tensor in = tape.pop();
    if (!need_dinput) return {};
    Tensor d_in = d_out;
    for (std::size_t i = 0; i < d_in.size(); ++i)
        if (in.raw()[i] <= 0.0) d_in.raw()[i] = 0.0;
    return d_in;
}

ResidualBlock::ResidualBlock(int channels, bool bias)
    : conv1_(channels, channels, 3, 1, 1, bias), conv2_(channels, channels, 3, 1, 1, bias) {}

void ResidualBlock::init(Rng& rng) {
    conv1_.init(rng);
    conv2_.init(rng);
}

std::vector<Param*> ResidualBlock::params() {
    auto p = conv1_.params();
    for (auto* q : conv2_.params()) p.push_back(q);
    return p;
}

Tensor ResidualBlock::forward(const Tensor& in, Tape* tape) {
    Tensor mid = relu_.forward(conv1_.forward(in, tape), tape);
    Tensor out = conv2_.forward(mid, tape);
    for (std::size_t i = 0; i < out.size(); ++i) out.raw()[i] += in.raw()[i];
    return relu_.forward(out, tape);
}

Tensor ResidualBlock::backward(const Tensor& d_out, Tape& tape, bool accumulate,
                               bool need_dinput) {
    Tensor d_sum = relu_.backward(d_out, tape, accumulate, true);
    Tensor d_mid = conv2_.backward(d_sum, tape, accumulate, true);
    Tensor d_conv1 = relu_.backward(d_mid, tape, accumulate, true);
    Tensor d_in = conv1_.backward(d_conv1, tape, accumulate, true);
    for (std::size_t i = 0; i < d_in.size(); ++i) d_in.raw()[i] += d_sum.raw()[i];
    if (!need_dinput) return {};
    return d_in;
}

Linear::Linear(int in_dim, int out_dim) : in_dim_(in_dim), out_dim_(out_dim) {
    if (in_dim <= 0 || out_dim <= 0) throw ConfigError("linear: invalid dimensions");
    weight_.resize(std::size_t(out_dim) * in_dim);
    bias_.resize(out_dim);
}

void Linear::init(Rng& rng) {
    const double std = std::sqrt(2.0 / in_dim_);
    for (double& w : weight_.value) w = rng.normal(0.0, std);
    for (double& b : bias_.value) b = 0.0;
}

std::vector<double> Linear::forward(const std::vector<double>& in,
                                    std::vector<std::vector<double>>* saved) {
    if (int(in.size()) != in_dim_) throw ModelError("linear: input size mismatch");
    std::vector<double> out(out_dim_);
    for (int o = 0; o < out_dim_; ++o) {
        const double* w = weight_.value.data() + std::size_t(o) * in_dim_;
        double acc = bias_.value[o];
        for (int i = 0; i < in_dim_; ++i) acc += w[i] * in[i];
        out[o] = acc;
    }
    if (saved) saved->push_back(in);
    return out;
}

std::vector<double> Linear::backward(const std::vector<double>& d_out,
                                     std::vector<std::vector<double>>& saved, bool accumulate) {
    if (saved.empty()) throw UsageError("linear backward without a matching forward pass");
    const std::vector<double> in = std::move(saved.back());
    saved.pop_back();

    std::vector<double> d_in(in_dim_, 0.0);
    for (int o = 0; o < out_dim_; ++o) {
        const double g = d_out[o];
        const double* w = weight_.value.data() + std::size_t(o) * in_dim_;
        for (int i = 0; i < in_dim_; ++i) d_in[i] += w[i] * g;
        if (accumulate) {
            double* wg = weight_.grad.data() + std::size_t(o) * in_dim_;
            for (int i = 0; i < in_dim_; ++i) wg[i] += in[i] * g;
            bias_.grad[o] += g;
        }
    }
    return d_in;
}

} // namespace ggs
