#include "ggs/synthdata.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <set>

#include "ggs/imageops.hpp"
#include "ggs/io.hpp"
#include "ggs/rng.hpp"

namespace fs = std::filesystem;

namespace ggs {

namespace {

constexpr std::uint64_t kTagMosaic = 0x6d6f7361ULL;   // layout + texture stream
constexpr std::uint64_t kTagDataset = 0x64736574ULL;  // per-image seeds

ClassStyle hue_color(int index, int count) {
    // Evenly spaced hues, full saturation, value cycling a little for contrast.
    const double h = 6.0 * double(index) / double(std::max(count, 1));
    const double v = (index % 2 == 0) ? 0.85 : 0.6;
    const int i = int(h) % 6;
    const double f = h - std::floor(h);
    const double p = v * 0.25, q = v * (1.0 - 0.75 * f), t = v * (0.25 + 0.75 * f);
    double r = v, g = t, b = p;
    switch (i) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        case 5: r = v; g = p; b = q; break;
    }
    return ClassStyle{r, g, b, 0.06};
}

int draw_class(Rng& rng, const std::vector<double>& cumulative) {
    const double u = rng.uniform() * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return int(std::min<std::size_t>(it - cumulative.begin(), cumulative.size() - 1));
}

void quantize8(Tensor& t) {
    for (double& v : t.raw()) v = std::lround(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
}

} // namespace

void MosaicSpec::validate() const {
    if (image_size < 16) throw ConfigError("mosaic image_size must be >= 16");
    if (num_classes < 2) throw ConfigError("mosaic num_classes must be >= 2");
    if (tiles_min < 1 || tiles_max < tiles_min)
        throw ConfigError("mosaic tiles range invalid (need 1 <= tiles_min <= tiles_max)");
    if (!class_probs.empty()) {
        if (int(class_probs.size()) != num_classes)
            throw ConfigError("class_probs size must equal num_classes");
        double sum = 0.0;
        for (double p : class_probs) {
            if (p < 0.0) throw ConfigError("class_probs must be non-negative");
            sum += p;
        }
        if (sum <= 0.0) throw ConfigError("class_probs must have positive mass");
    }
    if (!palette.empty() && int(palette.size()) < num_classes)
        throw ConfigError("palette must cover all classes (or be empty for defaults)");
    if (small_objects_max < 0) throw ConfigError("small_objects_max must be >= 0");
    if (small_objects_max > 0 &&
        (small_object_radius_min < 1 || small_object_radius_max < small_object_radius_min))
        throw ConfigError("small object radius range invalid");
    if (distinct_tile_classes && tiles_max * tiles_max > num_classes)
        throw ConfigError("distinct_tile_classes needs num_classes >= tiles_max^2");
}

std::vector<ClassStyle> MosaicSpec::resolved_palette() const {
    std::vector<ClassStyle> out = palette;
    for (int c = int(out.size()); c < num_classes; ++c) out.push_back(hue_color(c, num_classes));
    out.resize(num_classes);
    return out;
}

ImagePatch generate_mosaic(const MosaicSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng = Rng::stream(spec.texture_seed, {kTagMosaic, seed});

    const int S = spec.image_size;
    const auto styles = spec.resolved_palette();

    std::vector<double> cumulative(spec.num_classes);
    double acc = 0.0;
    for (int c = 0; c < spec.num_classes; ++c) {
        acc += spec.class_probs.empty() ? 1.0 : spec.class_probs[c];
        cumulative[c] = acc;
    }

    const int tiles = rng.uniform_int(spec.tiles_min, spec.tiles_max);

    std::vector<int> tile_class(std::size_t(tiles) * tiles);
    if (spec.distinct_tile_classes) {
        std::vector<int> classes(spec.num_classes);
        for (int c = 0; c < spec.num_classes; ++c) classes[c] = c;
        rng.shuffle(classes);
        std::copy(classes.begin(), classes.begin() + tiles * tiles, tile_class.begin());
    } else {
        for (int& c : tile_class) c = draw_class(rng, cumulative);
    }

    std::vector<double> tile_gain(tile_class.size());
    for (double& g : tile_gain) g = rng.uniform(0.9, 1.1);

    ImagePatch patch;
    patch.pixels = Tensor(3, S, S);
    patch.mask = Mask(S, S);

    auto tile_of = [&](int coord) { return std::min(coord * tiles / S, tiles - 1); };
    for (int y = 0; y < S; ++y)
        for (int x = 0; x < S; ++x) {
            const int t = tile_of(y) * tiles + tile_of(x);
            const int cls = tile_class[t];
            const ClassStyle& st = styles[cls];
            const double gain = tile_gain[t];
            patch.mask.at(y, x) = cls;
            patch.pixels.at(0, y, x) = st.r * gain + rng.uniform(-st.noise, st.noise);
            patch.pixels.at(1, y, x) = st.g * gain + rng.uniform(-st.noise, st.noise);
            patch.pixels.at(2, y, x) = st.b * gain + rng.uniform(-st.noise, st.noise);
        }

    // Elliptical small-object insertions of a class different from the
    // tile beneath their center.
    const int inserts = spec.small_objects_max > 0 ? rng.uniform_int(0, spec.small_objects_max) : 0;
    for (int k = 0; k < inserts; ++k) {
        const int cy = rng.uniform_int(0, S - 1);
        const int cx = rng.uniform_int(0, S - 1);
        const int ry = rng.uniform_int(spec.small_object_radius_min, spec.small_object_radius_max);
        const int rx = rng.uniform_int(spec.small_object_radius_min, spec.small_object_radius_max);
        const int beneath = patch.mask.at(cy, cx);
        int cls = rng.uniform_int(0, spec.num_classes - 2);
        if (cls >= beneath) ++cls; // skip the underlying class
        const ClassStyle& st = styles[cls];
        for (int y = std::max(0, cy - ry); y <= std::min(S - 1, cy + ry); ++y)
            for (int x = std::max(0, cx - rx); x <= std::min(S - 1, cx + rx); ++x) {
                const double dy = double(y - cy) / ry, dx = double(x - cx) / rx;
                if (dy * dy + dx * dx > 1.0) continue;
                patch.mask.at(y, x) = cls;
                patch.pixels.at(0, y, x) = st.r + rng.uniform(-st.noise, st.noise);
                patch.pixels.at(1, y, x) = st.g + rng.uniform(-st.noise, st.noise);
                patch.pixels.at(2, y, x) = st.b + rng.uniform(-st.noise, st.noise);
            }
    }

    quantize8(patch.pixels);
    patch.source_id = "mosaic_" + std::to_string(seed);
    return patch;
}

std::vector<ImagePatch> generate_dataset(const MosaicSpec& spec, int count, std::uint64_t seed) {
    if (count < 0) throw ConfigError("dataset count must be >= 0");
    std::vector<ImagePatch> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        out.push_back(generate_mosaic(spec, derive_seed(seed, {kTagDataset, std::uint64_t(i)})));
        // zero-padded index ids keep lexicographic load order aligned with
        // generation order after a disk round trip
        char id[24];
        std::snprintf(id, sizeof(id), "mosaic_%05d", i);
        out.back().source_id = id;
    }
    return out;
}

int count_classes(const Mask& mask) {
    if (mask.empty()) return 0;
    std::set<std::int32_t> seen(mask.raw().begin(), mask.raw().end());
    return int(seen.size());
}

namespace {

ImagePatch finalize_patch(Tensor pixels, Mask mask, std::string id, int expected_size) {
    if (!mask.empty() && (mask.height() != pixels.height() || mask.width() != pixels.width()))
        throw DataError("mask shape does not match image for '" + id + "'");
    if (expected_size > 0) {
        if (pixels.height() < expected_size || pixels.width() < expected_size)
            throw DataError("image '" + id + "' smaller than configured size " +
                            std::to_string(expected_size));
        if (pixels.height() > expected_size || pixels.width() > expected_size) {
            const int y0 = (pixels.height() - expected_size) / 2;
            const int x0 = (pixels.width() - expected_size) / 2;
            pixels = crop(pixels, x0, y0, expected_size, expected_size);
            if (!mask.empty()) {
                Mask m(expected_size, expected_size);
                for (int y = 0; y < expected_size; ++y)
                    for (int x = 0; x < expected_size; ++x) m.at(y, x) = mask.at(y0 + y, x0 + x);
                mask = std::move(m);
            }
        }
    }
    return ImagePatch{std::move(pixels), std::move(mask), std::move(id)};
}

} // namespace

std::vector<ImagePatch> load_dataset(const std::string& dir, bool with_masks,
                                     int expected_size, int limit) {
    const fs::path images = fs::path(dir) / "images";
    const fs::path masks = fs::path(dir) / "masks";
    if (!fs::is_directory(images)) throw DataError("no images/ directory under " + dir);

    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(images))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

    std::vector<ImagePatch> out;
    for (const auto& f : files) {
        if (limit > 0 && int(out.size()) >= limit) break;
        Tensor pixels = read_image(f.string());
        Mask mask;
        if (with_masks) {
            fs::path mp = masks / f.filename();
            if (!fs::exists(mp)) {
                mp = masks / (f.stem().string() + ".png");
                if (!fs::exists(mp))
                    throw DataError("missing mask for image '" + f.filename().string() + "'");
            }
            mask = read_mask(mp.string());
        }
        out.push_back(finalize_patch(std::move(pixels), std::move(mask), f.stem().string(),
                                     expected_size));
    }
    return out;
}

void save_dataset(const std::string& dir, const std::vector<ImagePatch>& patches) {
    for (const auto& p : patches) {
        write_image((fs::path(dir) / "images" / (p.source_id + ".png")).string(), p.pixels);
        if (p.has_mask())
            write_mask((fs::path(dir) / "masks" / (p.source_id + ".png")).string(), p.mask);
    }
}

} // namespace ggs
