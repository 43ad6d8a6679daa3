#ifndef GGS_IO_HPP
#define GGS_IO_HPP

#include <string>

#include "ggs/tensor.hpp"

namespace ggs {

/// 8-bit lossless raster I/O (PNG). Images are RGB in [0,1], masks are
/// single-channel class indices.
Tensor read_image(const std::string& path);
void write_image(const std::string& path, const Tensor& image);

Mask read_mask(const std::string& path);
void write_mask(const std::string& path, const Mask& mask);

} // namespace ggs

#endif
