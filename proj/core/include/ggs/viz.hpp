#ifndef GGS_VIZ_HPP
#define GGS_VIZ_HPP

#include <string>
#include <vector>

#include "ggs/lamcore.hpp"
#include "ggs/tensor.hpp"

namespace ggs {

/// Blue-to-red heat ramp over the normalized map.
Tensor heatmap(const LossAttentionMap& lam);

/// alpha * heat + (1 - alpha) * image, both at the image's size.
Tensor overlay_heatmap(const Tensor& image, const LossAttentionMap& lam, double alpha = 0.45);

/// White dashed rectangle drawn in place along the box perimeter.
void draw_dashed_box(Tensor& image, const Box& box, int dash = 4);

/// Side-by-side panel strip with a thin separator; equal heights required.
Tensor hconcat_panels(const std::vector<Tensor>& panels, int gap = 2);

struct Series {
    std::string label;
    std::vector<double> x, y;
};

/// Minimal line chart (axes, ticks, legend) saved as a PNG.
void write_line_plot(const std::string& path, const std::string& title,
                     const std::vector<Series>& series, int width = 640, int height = 420);

} // namespace ggs

#endif
