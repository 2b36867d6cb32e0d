#include "amflow/png_io.hpp"

#include <cstdio>
#include <memory>

#include <png.h>

namespace amflow {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
    throw FormatError(std::string("png: ") + msg);
    (void)png;
}

void png_warn_fn(png_structp, png_const_charp) {}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;

    PngReader() {
        png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warn_fn);
        if (!png) throw IoError("png_create_read_struct failed");
        info = png_create_info_struct(png);
        if (!info) {
            png_destroy_read_struct(&png, nullptr, nullptr);
            throw IoError("png_create_info_struct failed");
        }
    }
    ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;

    PngWriter() {
        png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warn_fn);
        if (!png) throw IoError("png_create_write_struct failed");
        info = png_create_info_struct(png);
        if (!info) {
            png_destroy_write_struct(&png, nullptr);
            throw IoError("png_create_info_struct failed");
        }
    }
    ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

// Reads a grayscale PNG at the requested bit depth (8 or 16).
template <typename T>
Raster<T> read_gray(const std::filesystem::path& path, int want_depth) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) throw IoError("cannot open " + path.string());

    PngReader r;
    png_init_io(r.png, fp.get());
    png_read_info(r.png, r.info);

    const png_uint_32 w = png_get_image_width(r.png, r.info);
    const png_uint_32 h = png_get_image_height(r.png, r.info);
    const int color = png_get_color_type(r.png, r.info);
    const int depth = png_get_bit_depth(r.png, r.info);

    if (color != PNG_COLOR_TYPE_GRAY)
        throw FormatError(path.string() + ": expected grayscale PNG");
    if (w == 0 || h == 0) throw FormatError(path.string() + ": empty PNG");

    if (want_depth == 8) {
        if (depth == 16) png_set_strip_16(r.png);
        if (depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
    } else {
        if (depth != 16)
            throw FormatError(path.string() + ": expected 16-bit grayscale PNG");
        png_set_swap(r.png); // PNG stores 16-bit big-endian
    }
    png_read_update_info(r.png, r.info);

    Raster<T> img(static_cast<int>(w), static_cast<int>(h));
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = reinterpret_cast<png_bytep>(img.data() + static_cast<std::size_t>(y) * w);
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);
    return img;
}

template <typename T>
void write_gray(const Raster<T>& img, const std::filesystem::path& path, int depth) {
    if (img.empty()) throw ShapeError("refusing to write empty PNG");
    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) throw IoError("cannot create " + path.string());

    PngWriter wtr;
    png_init_io(wtr.png, fp.get());
    png_set_IHDR(wtr.png, wtr.info, img.width(), img.height(), depth, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(wtr.png, wtr.info);
    if (depth == 16) png_set_swap(wtr.png);

    std::vector<png_bytep> rows(img.height());
    for (int y = 0; y < img.height(); ++y)
        rows[y] = reinterpret_cast<png_bytep>(const_cast<T*>(img.data()) +
                                              static_cast<std::size_t>(y) * img.width());
    png_write_image(wtr.png, rows.data());
    png_write_end(wtr.png, nullptr);
}

} // namespace

Raster<std::uint8_t> read_png_gray8(const std::filesystem::path& path) {
    return read_gray<std::uint8_t>(path, 8);
}

void write_png_gray8(const Raster<std::uint8_t>& img, const std::filesystem::path& path) {
    write_gray(img, path, 8);
}

Raster<std::uint16_t> read_png_gray16(const std::filesystem::path& path) {
    return read_gray<std::uint16_t>(path, 16);
}

void write_png_gray16(const Raster<std::uint16_t>& img, const std::filesystem::path& path) {
    write_gray(img, path, 16);
}

void write_png_rgb8(const ColorImage& img, const std::filesystem::path& path) {
    if (img.rgb.empty()) throw ShapeError("refusing to write empty PNG");
    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) throw IoError("cannot create " + path.string());

    PngWriter wtr;
    png_init_io(wtr.png, fp.get());
    png_set_IHDR(wtr.png, wtr.info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(wtr.png, wtr.info);

    std::vector<png_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y)
        rows[y] = const_cast<png_bytep>(img.rgb.data() + static_cast<std::size_t>(y) * img.width * 3);
    png_write_image(wtr.png, rows.data());
    png_write_end(wtr.png, nullptr);
}

Mask read_mask_png(const std::filesystem::path& path) {
    Raster<std::uint8_t> raw = read_png_gray8(path);
    Mask mask(raw.width(), raw.height(), 0);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == 0) continue;
        if (raw[i] != 255)
            throw FormatError(path.string() + ": mask PNG values must be 0 or 255");
        mask[i] = 1;
    }
    return mask;
}

void write_mask_png(const Mask& mask, const std::filesystem::path& path) {
    require_binary(mask, "write_mask_png");
    Raster<std::uint8_t> raw(mask.width(), mask.height(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i) raw[i] = mask[i] ? 255 : 0;
    write_png_gray8(raw, path);
}

} // namespace amflow
