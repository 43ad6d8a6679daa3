#ifndef GGS_AUGMENT_HPP
#define GGS_AUGMENT_HPP

#include <cstdint>
#include <vector>

#include "ggs/synthdata.hpp"
#include "ggs/tensor.hpp"

namespace ggs {

/// Two-view augmentation recipe: random spectral jitter followed by a
/// random resized crop, the combination used for contrastive pretraining.
struct AugmentConfig {
    int views = 2; // K, at least 2 so every view has a positive partner

    // spatial
    double crop_scale_min = 0.2;
    double crop_scale_max = 1.0;
    double crop_aspect_min = 3.0 / 4.0;
    double crop_aspect_max = 4.0 / 3.0;
    double hflip_prob = 0.5;
    double vflip_prob = 0.0;

    // spectral
    double brightness = 0.4;
    double contrast = 0.4;
    double saturation = 0.4;
    double grayscale_prob = 0.2;
    double blur_prob = 0.0;
    double blur_sigma_min = 0.1;
    double blur_sigma_max = 2.0;

    void validate() const;

    /// No-op recipe: full-image crop, no jitter, no flips. Keeps K views.
    static AugmentConfig identity(int views = 2);
};

/// Geometric provenance of one view, enough to transport a source-aligned
/// mask through the identical chain.
struct ViewRecord {
    int source_index = 0;
    int view_index = 0;
    int src_h = 0, src_w = 0;
    int crop_x = 0, crop_y = 0, crop_h = 0, crop_w = 0; // source coordinates
    bool hflip = false, vflip = false;
    int out_h = 0, out_w = 0;
};

/// N x K view array stored row-major by (instance, view).
struct ViewBatch {
    std::vector<Tensor> views;
    std::vector<ViewRecord> records;
    int n = 0, k = 0;

    Tensor& view(int i, int j) { return views[std::size_t(i) * k + j]; }
    const Tensor& view(int i, int j) const { return views[std::size_t(i) * k + j]; }
    const ViewRecord& record(int i, int j) const { return records[std::size_t(i) * k + j]; }
};

/// Position of a batch inside the run; every view's RNG stream is derived
/// from (seed, epoch, base_index + instance, view), so draws are independent
/// of batch composition and worker scheduling.
struct AugmentStream {
    std::uint64_t seed = 0;
    std::uint64_t epoch = 0;
    std::uint64_t base_index = 0;
};

ViewBatch augment_batch(const std::vector<ImagePatch>& batch, const AugmentConfig& cfg,
                        const AugmentStream& state);

/// Carries a source-aligned mask through a view's geometric chain
/// (crop, nearest resize, flips). Spectral ops are identity on masks.
Mask transport_mask(const ViewRecord& rec, const Mask& source_mask);

} // namespace ggs

#endif
