#ifndef GGS_TENSOR_HPP
#define GGS_TENSOR_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ggs/errors.hpp"

namespace ggs {

/// Dense channels-first raster (C planes of H x W doubles).
/// Images live in [0,1]; feature maps and gradients are unbounded.
class Tensor {
public:
    Tensor() = default;
    Tensor(int channels, int height, int width, double fill = 0.0)
        : c_(channels), h_(height), w_(width),
          data_(std::size_t(channels) * height * width, fill) {}

    int channels() const { return c_; }
    int height() const { return h_; }
    int width() const { return w_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& at(int c, int y, int x) { return data_[(std::size_t(c) * h_ + y) * w_ + x]; }
    double at(int c, int y, int x) const { return data_[(std::size_t(c) * h_ + y) * w_ + x]; }

    double* plane(int c) { return data_.data() + std::size_t(c) * h_ * w_; }
    const double* plane(int c) const { return data_.data() + std::size_t(c) * h_ * w_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    bool same_shape(const Tensor& o) const {
        return c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
    }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void fill(double v) { data_.assign(data_.size(), v); }

    std::string shape_str() const {
        return std::to_string(c_) + "x" + std::to_string(h_) + "x" + std::to_string(w_);
    }

private:
    int c_ = 0, h_ = 0, w_ = 0;
    std::vector<double> data_;
};

/// H x W class-index raster. Values in [0, num_classes).
class Mask {
public:
    Mask() = default;
    Mask(int height, int width, int fill = 0)
        : h_(height), w_(width), data_(std::size_t(height) * width, std::int32_t(fill)) {}

    int height() const { return h_; }
    int width() const { return w_; }
    bool empty() const { return data_.empty(); }
    std::size_t size() const { return data_.size(); }

    std::int32_t& at(int y, int x) { return data_[std::size_t(y) * w_ + x]; }
    std::int32_t at(int y, int x) const { return data_[std::size_t(y) * w_ + x]; }

    std::vector<std::int32_t>& raw() { return data_; }
    const std::vector<std::int32_t>& raw() const { return data_; }

    bool same_shape(const Mask& o) const { return h_ == o.h_ && w_ == o.w_; }

private:
    int h_ = 0, w_ = 0;
    std::vector<std::int32_t> data_;
};

/// FNV-1a over raw bytes; used for "parameters unchanged" checks.
inline std::uint64_t hash_bytes(const void* p, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t hash_doubles(const std::vector<double>& v, std::uint64_t h = 0xcbf29ce484222325ULL) {
    return hash_bytes(v.data(), v.size() * sizeof(double), h);
}

} // namespace ggs

#endif
