#include "ggs/lamcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ggs/imageops.hpp"

namespace ggs {

LossAttentionMap compute_lam(const Tensor& feature, const Tensor& feature_grad, int target_h,
                             int target_w, bool rectify) {
    if (!feature.same_shape(feature_grad))
        throw UsageError("compute_lam: feature and gradient shapes differ");
    if (target_h < 1 || target_w < 1) throw UsageError("compute_lam: bad target size");
    if (!feature.all_finite() || !feature_grad.all_finite())
        throw NumericError("compute_lam: non-finite feature or gradient");

    const int d = feature.channels(), fh = feature.height(), fw = feature.width();
    const int area = fh * fw;

    Tensor m(1, fh, fw);
    double* mp = m.plane(0);
    for (int c = 0; c < d; ++c) {
        const double* gp = feature_grad.plane(c);
        double wsum = 0.0;
        for (int i = 0; i < area; ++i) wsum += gp[i];
        const double wc = wsum / area / d;
        const double* fp = feature.plane(c);
        for (int i = 0; i < area; ++i) mp[i] += wc * fp[i];
    }
    if (rectify)
        for (int i = 0; i < area; ++i) mp[i] = std::max(mp[i], 0.0);

    Tensor resized = bilinear_resize(m, target_h, target_w);
    const double* rp = resized.plane(0);
    const int n = target_h * target_w;

    LossAttentionMap lam;
    lam.h = target_h;
    lam.w = target_w;
    lam.values.resize(n);
    double lo = rp[0], hi = rp[0];
    for (int i = 1; i < n; ++i) {
        lo = std::min(lo, rp[i]);
        hi = std::max(hi, rp[i]);
    }
    lam.raw_min = lo;
    lam.raw_max = hi;
    if (hi - lo < 1e-12) {
        std::fill(lam.values.begin(), lam.values.end(), 0.0);
    } else {
        const double inv = 1.0 / (hi - lo);
        for (int i = 0; i < n; ++i) lam.values[i] = (rp[i] - lo) * inv;
    }
    return lam;
}

DiscriminationAttentionRegion extract_dar(const LossAttentionMap& lam, double t) {
    if (!(t >= 0.0 && t < 1.0)) throw ConfigError("dar threshold must lie in [0, 1)");
    if (lam.h < 1 || lam.w < 1 || lam.values.size() != std::size_t(lam.h) * lam.w)
        throw UsageError("extract_dar: malformed attention map");

    const int h = lam.h, w = lam.w, n = h * w;

    DiscriminationAttentionRegion out;
    out.h = h;
    out.w = w;
    out.pixel_set.assign(n, 0);

    bool any = false;
    for (int i = 0; i < n && !any; ++i) any = lam.values[i] > t;

    if (!any) {
        out.full_image_fallback = true;
        std::fill(out.pixel_set.begin(), out.pixel_set.end(), 1);
        out.box = {0, 0, h, w};
        out.peak = lam.values[0];
        for (int i = 1; i < n; ++i)
            if (lam.values[i] > out.peak) {
                out.peak = lam.values[i];
                out.peak_y = i / w;
                out.peak_x = i % w;
            }
        return out;
    }

    struct Component {
        double peak = -1.0;
        int peak_y = 0, peak_x = 0;
        long long count = 0;
        int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
    };
    std::vector<Component> comps;
    std::vector<int> label(n, -1);
    std::vector<int> stack;

    for (int start = 0; start < n; ++start) {
        if (label[start] >= 0 || !(lam.values[start] > t)) continue;
        const int id = int(comps.size());
        Component c;
        c.min_x = c.max_x = start % w;
        c.min_y = c.max_y = start / w;
        stack.assign(1, start);
        label[start] = id;
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            const int y = p / w, x = p % w;
            ++c.count;
            c.min_x = std::min(c.min_x, x);
            c.max_x = std::max(c.max_x, x);
            c.min_y = std::min(c.min_y, y);
            c.max_y = std::max(c.max_y, y);
            const double v = lam.values[p];
            if (v > c.peak) {
                c.peak = v;
                c.peak_y = y;
                c.peak_x = x;
            } else if (v == c.peak && (y < c.peak_y || (y == c.peak_y && x < c.peak_x))) {
                c.peak_y = y;
                c.peak_x = x;
            }
            const int ny[4] = {y - 1, y + 1, y, y};
            const int nx[4] = {x, x, x - 1, x + 1};
            for (int q = 0; q < 4; ++q) {
                if (ny[q] < 0 || ny[q] >= h || nx[q] < 0 || nx[q] >= w) continue;
                const int np = ny[q] * w + nx[q];
                if (label[np] < 0 && lam.values[np] > t) {
                    label[np] = id;
                    stack.push_back(np);
                }
            }
        }
        comps.push_back(c);
    }

    // highest peak, then larger component, then earlier peak position
    int best = 0;
    for (int i = 1; i < int(comps.size()); ++i) {
        const Component& a = comps[i];
        const Component& b = comps[best];
        if (a.peak > b.peak) {
            best = i;
        } else if (a.peak == b.peak) {
            if (a.count > b.count) {
                best = i;
            } else if (a.count == b.count &&
                       (a.peak_y < b.peak_y ||
                        (a.peak_y == b.peak_y && a.peak_x < b.peak_x))) {
                best = i;
            }
        }
    }

    const Component& c = comps[best];
    for (int i = 0; i < n; ++i) out.pixel_set[i] = label[i] == best ? 1 : 0;
    out.peak = c.peak;
    out.peak_y = c.peak_y;
    out.peak_x = c.peak_x;
    out.box = {c.min_x, c.min_y, c.max_y - c.min_y + 1, c.max_x - c.min_x + 1};
    return out;
}

Box clamp_box(Box box, int img_h, int img_w, int min_side) {
    const int th = std::min(std::max(box.h, min_side), img_h);
    const int tw = std::min(std::max(box.w, min_side), img_w);
    int y = box.y - (th - box.h) / 2;
    int x = box.x - (tw - box.w) / 2;
    y = std::clamp(y, 0, img_h - th);
    x = std::clamp(x, 0, img_w - tw);
    return {x, y, th, tw};
}

ImagePatch dacrop(const ImagePatch& view, const DiscriminationAttentionRegion& dar,
                  int min_side) {
    const int h = view.pixels.height(), w = view.pixels.width();
    const Box& b = dar.box;
    if (b.h <= 0 || b.w <= 0) throw UsageError("dacrop: empty box");
    if (b.x < 0 || b.y < 0 || b.x + b.w > w || b.y + b.h > h)
        throw UsageError("dacrop: box outside view bounds");

    const Box cb = clamp_box(b, h, w, min_side);

    ImagePatch out;
    out.source_id = view.source_id;
    out.pixels = bilinear_resize(crop(view.pixels, cb.x, cb.y, cb.h, cb.w), h, w);
    if (view.has_mask()) out.mask = nearest_resize(crop(view.mask, cb.x, cb.y, cb.h, cb.w), h, w);
    return out;
}

std::vector<Tensor> guided_resample(const std::vector<Tensor>& views,
                                    const std::vector<Tensor>& features,
                                    const std::vector<Tensor>& feature_grads, double t,
                                    bool rectify, int min_side, GuidedResampleStats* stats) {
    if (views.size() != features.size() || views.size() != feature_grads.size())
        throw UsageError("guided_resample: view and feature counts differ");
    if (!(t >= 0.0 && t < 1.0)) throw ConfigError("dar threshold must lie in [0, 1)");

    if (stats) *stats = GuidedResampleStats{};

    if (t == 0.0) {
        // threshold zero means sampling is switched off
        if (stats) {
            stats->mean_box_area_frac = 1.0;
            for (const Tensor& v : views)
                stats->boxes.push_back({0, 0, v.height(), v.width()});
        }
        return views;
    }

    std::vector<Tensor> out;
    out.reserve(views.size());
    double area_acc = 0.0;
    for (std::size_t i = 0; i < views.size(); ++i) {
        const Tensor& v = views[i];
        const int h = v.height(), w = v.width();
        const LossAttentionMap lam = compute_lam(features[i], feature_grads[i], h, w, rectify);
        const DiscriminationAttentionRegion dar = extract_dar(lam, t);
        const Box cb = clamp_box(dar.box, h, w, min_side);
        out.push_back(bilinear_resize(crop(v, cb.x, cb.y, cb.h, cb.w), h, w));
        if (stats) {
            stats->boxes.push_back(cb);
            stats->fallback_count += dar.full_image_fallback ? 1 : 0;
            area_acc += double(cb.area()) / (double(h) * w);
        }
    }
    if (stats && !views.empty()) stats->mean_box_area_frac = area_acc / double(views.size());
    return out;
}

} // namespace ggs
