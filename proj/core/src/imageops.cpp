#include "ggs/imageops.hpp"

#include <algorithm>
#include <cmath>

namespace ggs {

namespace {

struct LerpAxis {
    std::vector<int> lo, hi;
    std::vector<double> w_hi; // weight of hi sample; lo gets 1 - w_hi
};

LerpAxis make_axis(int src_n, int dst_n) {
    LerpAxis a;
    a.lo.resize(dst_n);
    a.hi.resize(dst_n);
    a.w_hi.resize(dst_n);
    const double scale = double(src_n) / double(dst_n);
    for (int i = 0; i < dst_n; ++i) {
        double s = (i + 0.5) * scale - 0.5;
        s = std::clamp(s, 0.0, double(src_n - 1));
        int lo = int(std::floor(s));
        int hi = std::min(lo + 1, src_n - 1);
        a.lo[i] = lo;
        a.hi[i] = hi;
        a.w_hi[i] = s - lo;
    }
    return a;
}

} // namespace

Tensor bilinear_resize(const Tensor& src, int out_h, int out_w) {
    if (out_h <= 0 || out_w <= 0) throw UsageError("bilinear_resize: non-positive output size");
    if (src.height() == out_h && src.width() == out_w) return src;

    Tensor dst(src.channels(), out_h, out_w);
    const LerpAxis ay = make_axis(src.height(), out_h);
    const LerpAxis ax = make_axis(src.width(), out_w);
    for (int c = 0; c < src.channels(); ++c) {
        const double* in = src.plane(c);
        double* out = dst.plane(c);
        for (int y = 0; y < out_h; ++y) {
            const double* row_lo = in + std::size_t(ay.lo[y]) * src.width();
            const double* row_hi = in + std::size_t(ay.hi[y]) * src.width();
            const double wy = ay.w_hi[y];
            for (int x = 0; x < out_w; ++x) {
                const double wx = ax.w_hi[x];
                const double top = row_lo[ax.lo[x]] * (1.0 - wx) + row_lo[ax.hi[x]] * wx;
                const double bot = row_hi[ax.lo[x]] * (1.0 - wx) + row_hi[ax.hi[x]] * wx;
                out[std::size_t(y) * out_w + x] = top * (1.0 - wy) + bot * wy;
            }
        }
    }
    return dst;
}

void bilinear_resize_backward(const Tensor& d_out, Tensor& d_src) {
    if (d_out.channels() != d_src.channels())
        throw UsageError("bilinear_resize_backward: channel mismatch");
    if (d_out.height() == d_src.height() && d_out.width() == d_src.width()) {
        for (std::size_t i = 0; i < d_src.size(); ++i) d_src.raw()[i] += d_out.raw()[i];
        return;
    }
    const LerpAxis ay = make_axis(d_src.height(), d_out.height());
    const LerpAxis ax = make_axis(d_src.width(), d_out.width());
    for (int c = 0; c < d_out.channels(); ++c) {
        const double* g = d_out.plane(c);
        double* acc = d_src.plane(c);
        for (int y = 0; y < d_out.height(); ++y) {
            const double wy = ay.w_hi[y];
            double* row_lo = acc + std::size_t(ay.lo[y]) * d_src.width();
            double* row_hi = acc + std::size_t(ay.hi[y]) * d_src.width();
            for (int x = 0; x < d_out.width(); ++x) {
                const double wx = ax.w_hi[x];
                const double gv = g[std::size_t(y) * d_out.width() + x];
                row_lo[ax.lo[x]] += gv * (1.0 - wy) * (1.0 - wx);
                row_lo[ax.hi[x]] += gv * (1.0 - wy) * wx;
                row_hi[ax.lo[x]] += gv * wy * (1.0 - wx);
                row_hi[ax.hi[x]] += gv * wy * wx;
            }
        }
    }
}

Mask nearest_resize(const Mask& src, int out_h, int out_w) {
    if (out_h <= 0 || out_w <= 0) throw UsageError("nearest_resize: non-positive output size");
    if (src.height() == out_h && src.width() == out_w) return src;

    Mask dst(out_h, out_w);
    const double sy = double(src.height()) / out_h;
    const double sx = double(src.width()) / out_w;
    for (int y = 0; y < out_h; ++y) {
        int iy = std::clamp(int(std::floor((y + 0.5) * sy)), 0, src.height() - 1);
        for (int x = 0; x < out_w; ++x) {
            int ix = std::clamp(int(std::floor((x + 0.5) * sx)), 0, src.width() - 1);
            dst.at(y, x) = src.at(iy, ix);
        }
    }
    return dst;
}

Tensor crop(const Tensor& src, int x0, int y0, int h, int w) {
    if (h <= 0 || w <= 0) throw UsageError("crop: empty box");
    if (x0 < 0 || y0 < 0 || x0 + w > src.width() || y0 + h > src.height())
        throw UsageError("crop: box outside image bounds");
    Tensor dst(src.channels(), h, w);
    for (int c = 0; c < src.channels(); ++c)
        for (int y = 0; y < h; ++y) {
            const double* in = src.plane(c) + std::size_t(y0 + y) * src.width() + x0;
            std::copy(in, in + w, dst.plane(c) + std::size_t(y) * w);
        }
    return dst;
}

Mask crop(const Mask& src, int x0, int y0, int h, int w) {
    if (h <= 0 || w <= 0) throw UsageError("crop: empty box");
    if (x0 < 0 || y0 < 0 || x0 + w > src.width() || y0 + h > src.height())
        throw UsageError("crop: box outside mask bounds");
    Mask dst(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) dst.at(y, x) = src.at(y0 + y, x0 + x);
    return dst;
}

void flip_horizontal_inplace(Tensor& t) {
    for (int c = 0; c < t.channels(); ++c)
        for (int y = 0; y < t.height(); ++y) {
            double* row = t.plane(c) + std::size_t(y) * t.width();
            std::reverse(row, row + t.width());
        }
}

void flip_vertical_inplace(Tensor& t) {
    for (int c = 0; c < t.channels(); ++c)
        for (int y = 0; y < t.height() / 2; ++y) {
            double* a = t.plane(c) + std::size_t(y) * t.width();
            double* b = t.plane(c) + std::size_t(t.height() - 1 - y) * t.width();
            std::swap_ranges(a, a + t.width(), b);
        }
}

void flip_horizontal_inplace(Mask& m) {
    for (int y = 0; y < m.height(); ++y) {
        auto* row = m.raw().data() + std::size_t(y) * m.width();
        std::reverse(row, row + m.width());
    }
}

void flip_vertical_inplace(Mask& m) {
    for (int y = 0; y < m.height() / 2; ++y) {
        auto* a = m.raw().data() + std::size_t(y) * m.width();
        auto* b = m.raw().data() + std::size_t(m.height() - 1 - y) * m.width();
        std::swap_ranges(a, a + m.width(), b);
    }
}

Tensor gaussian_blur(const Tensor& src, double sigma) {
    if (sigma <= 0.0) return src;
    const int radius = std::max(1, int(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) v /= sum;

    const int H = src.height(), W = src.width();
    Tensor tmp(src.channels(), H, W), dst(src.channels(), H, W);
    for (int c = 0; c < src.channels(); ++c) {
        const double* in = src.plane(c);
        double* mid = tmp.plane(c);
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    acc += k[i + radius] * in[std::size_t(y) * W + std::clamp(x + i, 0, W - 1)];
                mid[std::size_t(y) * W + x] = acc;
            }
        double* out = dst.plane(c);
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    acc += k[i + radius] * mid[std::size_t(std::clamp(y + i, 0, H - 1)) * W + x];
                out[std::size_t(y) * W + x] = acc;
            }
    }
    return dst;
}

void clamp01_inplace(Tensor& t) {
    for (double& v : t.raw()) v = std::clamp(v, 0.0, 1.0);
}

} // namespace ggs
