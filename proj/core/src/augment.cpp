#include "ggs/augment.hpp"

#include <cmath>

#include "ggs/imageops.hpp"
#include "ggs/rng.hpp"

namespace ggs {

namespace {

constexpr std::uint64_t kTagAugment = 0x61756766ULL;

void apply_spectral(Tensor& img, const AugmentConfig& cfg, Rng& rng) {
    const int n = img.height() * img.width();

    if (cfg.brightness > 0.0) {
        const double f = rng.uniform(std::max(0.0, 1.0 - cfg.brightness), 1.0 + cfg.brightness);
        for (double& v : img.raw()) v *= f;
    }
    if (cfg.contrast > 0.0) {
        const double f = rng.uniform(std::max(0.0, 1.0 - cfg.contrast), 1.0 + cfg.contrast);
        double mean = 0.0;
        for (int i = 0; i < n; ++i)
            mean += 0.299 * img.plane(0)[i] + 0.587 * img.plane(1)[i] + 0.114 * img.plane(2)[i];
        mean /= n;
        for (double& v : img.raw()) v = (v - mean) * f + mean;
    }
    if (cfg.saturation > 0.0) {
        const double f = rng.uniform(std::max(0.0, 1.0 - cfg.saturation), 1.0 + cfg.saturation);
        for (int i = 0; i < n; ++i) {
            const double g =
                0.299 * img.plane(0)[i] + 0.587 * img.plane(1)[i] + 0.114 * img.plane(2)[i];
            for (int c = 0; c < 3; ++c) img.plane(c)[i] = g + (img.plane(c)[i] - g) * f;
        }
    }
    if (cfg.grayscale_prob > 0.0 && rng.bernoulli(cfg.grayscale_prob)) {
        for (int i = 0; i < n; ++i) {
            const double g =
                0.299 * img.plane(0)[i] + 0.587 * img.plane(1)[i] + 0.114 * img.plane(2)[i];
            for (int c = 0; c < 3; ++c) img.plane(c)[i] = g;
        }
    }
    if (cfg.blur_prob > 0.0 && rng.bernoulli(cfg.blur_prob)) {
        img = gaussian_blur(img, rng.uniform(cfg.blur_sigma_min, cfg.blur_sigma_max));
    }
    clamp01_inplace(img);
}

/// Draws the crop box: rejection-sample area fraction and log-aspect, fall
/// back to the largest in-bounds box at a clamped aspect after 10 tries.
void draw_crop(int H, int W, const AugmentConfig& cfg, Rng& rng, ViewRecord& rec) {
    for (int attempt = 0; attempt < 10; ++attempt) {
        const double area = H * W * rng.uniform(cfg.crop_scale_min, cfg.crop_scale_max);
        const double ratio =
            std::exp(rng.uniform(std::log(cfg.crop_aspect_min), std::log(cfg.crop_aspect_max)));
        const int w = int(std::lround(std::sqrt(area * ratio)));
        const int h = int(std::lround(std::sqrt(area / ratio)));
        if (w > 0 && h > 0 && w <= W && h <= H) {
            rec.crop_w = w;
            rec.crop_h = h;
            rec.crop_x = int(rng.uniform_index(std::uint64_t(W - w + 1)));
            rec.crop_y = int(rng.uniform_index(std::uint64_t(H - h + 1)));
            return;
        }
    }
    const double in_ratio = double(W) / double(H);
    if (in_ratio < cfg.crop_aspect_min) {
        rec.crop_w = W;
        rec.crop_h = std::min(H, int(std::lround(W / cfg.crop_aspect_min)));
    } else if (in_ratio > cfg.crop_aspect_max) {
        rec.crop_h = H;
        rec.crop_w = std::min(W, int(std::lround(H * cfg.crop_aspect_max)));
    } else {
        rec.crop_w = W;
        rec.crop_h = H;
    }
    rec.crop_x = (W - rec.crop_w) / 2;
    rec.crop_y = (H - rec.crop_h) / 2;
}

} // namespace

void AugmentConfig::validate() const {
    if (views < 2) throw ConfigError("augment views (K) must be >= 2");
    if (!(crop_scale_min > 0.0 && crop_scale_min <= crop_scale_max && crop_scale_max <= 1.0))
        throw ConfigError("crop scale range must satisfy 0 < min <= max <= 1");
    if (!(crop_aspect_min > 0.0 && crop_aspect_min <= crop_aspect_max))
        throw ConfigError("crop aspect range invalid");
    for (double p : {hflip_prob, vflip_prob, grayscale_prob, blur_prob})
        if (p < 0.0 || p > 1.0) throw ConfigError("augment probability outside [0,1]");
    for (double s : {brightness, contrast, saturation})
        if (s < 0.0) throw ConfigError("augment jitter strength must be >= 0");
    if (blur_prob > 0.0 && !(blur_sigma_min > 0.0 && blur_sigma_min <= blur_sigma_max))
        throw ConfigError("blur sigma range invalid");
}

AugmentConfig AugmentConfig::identity(int views) {
    AugmentConfig cfg;
    cfg.views = views;
    cfg.crop_scale_min = cfg.crop_scale_max = 1.0;
    cfg.crop_aspect_min = cfg.crop_aspect_max = 1.0;
    cfg.hflip_prob = cfg.vflip_prob = 0.0;
    cfg.brightness = cfg.contrast = cfg.saturation = 0.0;
    cfg.grayscale_prob = cfg.blur_prob = 0.0;
    return cfg;
}

ViewBatch augment_batch(const std::vector<ImagePatch>& batch, const AugmentConfig& cfg,
                        const AugmentStream& state) {
    cfg.validate();
    if (batch.empty()) throw UsageError("augment_batch: empty batch");
    const int H = batch.front().pixels.height();
    const int W = batch.front().pixels.width();
    for (const auto& p : batch)
        if (p.pixels.height() != H || p.pixels.width() != W)
            throw UsageError("augment_batch: patches must share spatial size");

    ViewBatch out;
    out.n = int(batch.size());
    out.k = cfg.views;
    out.views.reserve(std::size_t(out.n) * out.k);
    out.records.reserve(std::size_t(out.n) * out.k);

    for (int i = 0; i < out.n; ++i) {
        for (int j = 0; j < out.k; ++j) {
            Rng rng = Rng::stream(state.seed, {kTagAugment, state.epoch,
                                              state.base_index + std::uint64_t(i),
                                              std::uint64_t(j)});
            Tensor img = batch[i].pixels; // the image copy c(.)
            apply_spectral(img, cfg, rng);

            ViewRecord rec;
            rec.source_index = i;
            rec.view_index = j;
            rec.src_h = H;
            rec.src_w = W;
            rec.out_h = H;
            rec.out_w = W;
            draw_crop(H, W, cfg, rng, rec);
            rec.hflip = cfg.hflip_prob > 0.0 && rng.bernoulli(cfg.hflip_prob);
            rec.vflip = cfg.vflip_prob > 0.0 && rng.bernoulli(cfg.vflip_prob);

            Tensor view = (rec.crop_x == 0 && rec.crop_y == 0 && rec.crop_h == H && rec.crop_w == W)
                              ? std::move(img)
                              : crop(img, rec.crop_x, rec.crop_y, rec.crop_h, rec.crop_w);
            view = bilinear_resize(view, rec.out_h, rec.out_w);
            if (rec.hflip) flip_horizontal_inplace(view);
            if (rec.vflip) flip_vertical_inplace(view);

            out.views.push_back(std::move(view));
            out.records.push_back(rec);
        }
    }
    return out;
}

Mask transport_mask(const ViewRecord& rec, const Mask& source_mask) {
    if (source_mask.empty()) throw DataError("transport_mask: empty source mask");
    if (source_mask.height() != rec.src_h || source_mask.width() != rec.src_w)
        throw DataError("transport_mask: mask shape does not match the view's source");
    Mask m = crop(source_mask, rec.crop_x, rec.crop_y, rec.crop_h, rec.crop_w);
    m = nearest_resize(m, rec.out_h, rec.out_w);
    if (rec.hflip) flip_horizontal_inplace(m);
    if (rec.vflip) flip_vertical_inplace(m);
    return m;
}

} // namespace ggs
