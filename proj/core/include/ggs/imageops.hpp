#ifndef GGS_IMAGEOPS_HPP
#define GGS_IMAGEOPS_HPP

#include "ggs/tensor.hpp"

namespace ggs {

/// Bilinear resize with half-pixel centers (src_x = (dst_x + 0.5) * scale - 0.5).
/// Same-size calls are exact copies.
Tensor bilinear_resize(const Tensor& src, int out_h, int out_w);

/// Scatter-adds the adjoint of bilinear_resize: given d(out), accumulate d(src).
void bilinear_resize_backward(const Tensor& d_out, Tensor& d_src);

/// Nearest-neighbor resize for categorical rasters, same center convention.
Mask nearest_resize(const Mask& src, int out_h, int out_w);

Tensor crop(const Tensor& src, int x0, int y0, int h, int w);
Mask crop(const Mask& src, int x0, int y0, int h, int w);

void flip_horizontal_inplace(Tensor& t);
void flip_vertical_inplace(Tensor& t);
void flip_horizontal_inplace(Mask& m);
void flip_vertical_inplace(Mask& m);

/// Separable Gaussian blur with replicate borders. sigma <= 0 is a no-op.
Tensor gaussian_blur(const Tensor& src, double sigma);

void clamp01_inplace(Tensor& t);

} // namespace ggs

#endif
