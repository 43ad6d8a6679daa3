#ifndef GGS_LAMCORE_HPP
#define GGS_LAMCORE_HPP

#include <cstdint>
#include <vector>

#include "ggs/synthdata.hpp"
#include "ggs/tensor.hpp"

namespace ggs {

/// Per-view attention map derived from the loss gradient, resized to the
/// view's spatial shape and min-max normalized to [0,1]. raw_min/raw_max
/// record the range of the resized map before normalization; a degenerate
/// (constant) map normalizes to all zeros.
struct LossAttentionMap {
    int h = 0, w = 0;
    std::vector<double> values; // row-major
    double raw_min = 0.0, raw_max = 0.0;

    double at(int y, int x) const { return values[std::size_t(y) * w + x]; }
    bool degenerate() const { return raw_max - raw_min < 1e-12; }
};

struct Box {
    int x = 0, y = 0, h = 0, w = 0; // top-left corner plus size

    long long area() const { return (long long)h * w; }
    bool operator==(const Box&) const = default;
};

/// One 4-connected component of the super-threshold pixel set, chosen by
/// highest peak activation (ties: larger pixel count, then smallest
/// (row, col) of the peak). box is the minimal enclosing rectangle.
struct DiscriminationAttentionRegion {
    int h = 0, w = 0;
    std::vector<std::uint8_t> pixel_set; // row-major, 1 = inside
    double peak = 0.0;
    int peak_y = 0, peak_x = 0;
    Box box;
    bool full_image_fallback = false; // empty super-threshold set

    bool contains(int y, int x) const { return pixel_set[std::size_t(y) * w + x] != 0; }
};

/// Weights each feature channel by the spatial mean of its gradient,
/// averages the weighted channels into one map, bilinearly resizes it to
/// target_h x target_w and normalizes. rectify clamps negative map values
/// to zero before normalizing.
LossAttentionMap compute_lam(const Tensor& feature, const Tensor& feature_grad, int target_h,
                             int target_w, bool rectify = false);

/// Components of {lam > t}, t in [0,1). Empty set falls back to the
/// full-image region with the flag set.
DiscriminationAttentionRegion extract_dar(const LossAttentionMap& lam, double t);

/// Grows a box up to min_side per axis, centered on the original and
/// clipped to the image bounds.
Box clamp_box(Box box, int img_h, int img_w, int min_side = 8);

/// Crops the view to the region's (clamped) box and resizes back to the
/// view's size; an attached mask travels along via nearest neighbor.
ImagePatch dacrop(const ImagePatch& view, const DiscriminationAttentionRegion& dar,
                  int min_side = 8);

struct GuidedResampleStats {
    double mean_box_area_frac = 1.0;
    int fallback_count = 0;
    std::vector<Box> boxes; // clamped crop box per view
};

/// Reconstructs every view from its own gradient: LAM, DAR, crop, resize.
/// A threshold of exactly 0 turns resampling off and returns the views
/// unchanged. min_side bounds how tight the crops may get.
std::vector<Tensor> guided_resample(const std::vector<Tensor>& views,
                                    const std::vector<Tensor>& features,
                                    const std::vector<Tensor>& feature_grads, double t,
                                    bool rectify = false, int min_side = 8,
                                    GuidedResampleStats* stats = nullptr);

} // namespace ggs

#endif
