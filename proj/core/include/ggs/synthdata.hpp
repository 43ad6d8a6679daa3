#ifndef GGS_SYNTHDATA_HPP
#define GGS_SYNTHDATA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ggs/tensor.hpp"

namespace ggs {

/// Base color and per-pixel noise amplitude of one ground-object class.
struct ClassStyle {
    double r = 0.5, g = 0.5, b = 0.5;
    double noise = 0.06;
};

/// Recipe for one labeled ground-object mosaic. The layout is an axis-aligned
/// tile grid with per-tile class draws plus optional elliptical small-object
/// insertions of a class distinct from the tile underneath.
struct MosaicSpec {
    int image_size = 64;
    int num_classes = 6;
    int tiles_min = 2;                 // tiles per side, drawn per image
    int tiles_max = 4;
    std::uint64_t texture_seed = 0;
    std::vector<ClassStyle> palette;   // empty -> default palette for num_classes
    std::vector<double> class_probs;   // empty -> uniform; else one weight per class
    bool distinct_tile_classes = false;
    int small_objects_max = 2;         // 0 disables insertions
    int small_object_radius_min = 3;
    int small_object_radius_max = 8;

    void validate() const;
    /// Palette with procedural colors filled in for any missing classes.
    std::vector<ClassStyle> resolved_palette() const;
};

struct ImagePatch {
    Tensor pixels;          // C x H x W, values in [0,1]
    Mask mask;              // empty when the patch is unlabeled
    std::string source_id;

    bool has_mask() const { return !mask.empty(); }
};

/// Deterministic in (spec, seed): identical inputs give bit-identical output.
/// Pixels are quantized to the 8-bit grid so a disk round trip is exact.
ImagePatch generate_mosaic(const MosaicSpec& spec, std::uint64_t seed);

std::vector<ImagePatch> generate_dataset(const MosaicSpec& spec, int count, std::uint64_t seed);

/// Number of distinct class indices present. Empty mask counts as 0.
int count_classes(const Mask& mask);

/// Loads `dir/images/*` (lexicographic by filename) with masks from
/// `dir/masks/` when requested. Patches larger than expected_size are
/// center-cropped; smaller ones are a data error. expected_size 0 skips
/// the size check; limit 0 loads everything.
std::vector<ImagePatch> load_dataset(const std::string& dir, bool with_masks,
                                     int expected_size = 0, int limit = 0);

/// Materializes patches to the `images/<id>.png` + `masks/<id>.png` layout.
void save_dataset(const std::string& dir, const std::vector<ImagePatch>& patches);

} // namespace ggs

#endif
