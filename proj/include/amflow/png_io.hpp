#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "amflow/raster.hpp"

namespace amflow {

// 8-bit RGB image, interleaved row-major (3 bytes per pixel).
struct ColorImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;

    ColorImage() = default;
    ColorImage(int w, int h) : width(w), height(h) {
        if (w <= 0 || h <= 0) throw ShapeError("image dimensions must be positive");
        rgb.assign(static_cast<std::size_t>(w) * h * 3, 0);
    }
};

Raster<std::uint8_t> read_png_gray8(const std::filesystem::path& path);
void write_png_gray8(const Raster<std::uint8_t>& img, const std::filesystem::path& path);

Raster<std::uint16_t> read_png_gray16(const std::filesystem::path& path);
void write_png_gray16(const Raster<std::uint16_t>& img, const std::filesystem::path& path);

void write_png_rgb8(const ColorImage& img, const std::filesystem::path& path);

// Binary masks are 0/255 8-bit grayscale on disk and strictly 0/1 in memory.
Mask read_mask_png(const std::filesystem::path& path);
void write_mask_png(const Mask& mask, const std::filesystem::path& path);

} // namespace amflow
