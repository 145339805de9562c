#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "world4d/error.hpp"

namespace world4d {

// Dense H x W raster, row-major. Pixel coordinates are (u, v) = (column, row)
// with pixel centers at integer coordinates; (0, 0) is the top-left center.
template <class T>
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, T fill = T{})
        : width_(width), height_(height),
          data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
        if (width <= 0 || height <= 0)
            throw InvalidInputError("raster dimensions must be positive");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    bool in_bounds(int u, int v) const {
        return u >= 0 && u < width_ && v >= 0 && v < height_;
    }

    T& operator()(int u, int v) { return data_[static_cast<std::size_t>(v) * width_ + u]; }
    const T& operator()(int u, int v) const {
        return data_[static_cast<std::size_t>(v) * width_ + u];
    }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    template <class U>
    bool same_shape(const Raster<U>& other) const {
        return width_ == other.width() && height_ == other.height();
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

/// Boolean raster; nonzero means true.
using Mask = Raster<std::uint8_t>;

inline std::size_t count_true(const Mask& m) {
    std::size_t n = 0;
    for (auto v : m.data()) n += (v != 0);
    return n;
}

// Bilinear sample at sub-pixel (u, v). Taps with zero weight do not
// participate, so sampling at exact integer coordinates reproduces the stored
// value bit-for-bit and is in-bounds on the full raster. Returns nullopt when
// any positive-weight tap is out of bounds or masked invalid.
inline std::optional<double> bilinear_sample(const Raster<double>& img, const Mask* valid,
                                             double u, double v) {
    if (!std::isfinite(u) || !std::isfinite(v)) return std::nullopt;
    const int x0 = static_cast<int>(std::floor(u));
    const int y0 = static_cast<int>(std::floor(v));
    const double fx = u - x0;
    const double fy = v - y0;
    const double w[4] = {(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy};
    const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
    const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
    double acc = 0.0;
    for (int k = 0; k < 4; ++k) {
        if (w[k] == 0.0) continue;
        if (!img.in_bounds(xs[k], ys[k])) return std::nullopt;
        if (valid && !(*valid)(xs[k], ys[k])) return std::nullopt;
        acc += w[k] * img(xs[k], ys[k]);
    }
    return acc;
}

}  // namespace world4d
