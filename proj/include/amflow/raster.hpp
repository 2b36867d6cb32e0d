#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "amflow/errors.hpp"

namespace amflow {

// Dense row-major 2D grid. The unit of all mask/depth/id arithmetic.
template <typename T>
class Raster {
public:
    Raster() = default;

    Raster(int width, int height, T fill = T{})
        : width_(width), height_(height) {
        if (width <= 0 || height <= 0)
            throw ShapeError("raster dimensions must be positive");
        data_.assign(static_cast<std::size_t>(width) * height, fill);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    const T& at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    bool same_size(int w, int h) const { return width_ == w && height_ == h; }

    template <typename U>
    bool same_size(const Raster<U>& other) const {
        return width_ == other.width() && height_ == other.height();
    }

    bool operator==(const Raster&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

// Binary masks hold exactly 0 or 1 in memory (0/255 only on disk).
using Mask = Raster<std::uint8_t>;

inline std::uint64_t count_set(const Mask& m) {
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < m.size(); ++i) n += m[i];
    return n;
}

inline void require_binary(const Mask& m, const char* what) {
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i] > 1) throw FormatError(std::string(what) + ": mask values must be 0 or 1");
}

} // namespace amflow
