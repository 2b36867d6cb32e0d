#include "amflow/flo_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

namespace amflow {

static_assert(std::endian::native == std::endian::little,
              "flo/AMFL serialization assumes a little-endian host");

namespace {

constexpr float kFloMagic = 202021.25f;
// Rasters larger than this cannot be a sane flow file.
constexpr std::int64_t kMaxPixels = std::int64_t(1) << 30;

} // namespace

FlowField read_flo(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    float magic = 0.0f;
    std::int32_t w = 0, h = 0;
    in.read(reinterpret_cast<char*>(&magic), 4);
    in.read(reinterpret_cast<char*>(&w), 4);
    in.read(reinterpret_cast<char*>(&h), 4);
    if (!in) throw FormatError(path.string() + ": truncated flo header");
    if (magic != kFloMagic) throw FormatError(path.string() + ": bad flo magic");
    if (w <= 0 || h <= 0) throw FormatError(path.string() + ": nonpositive flo dimensions");
    if (static_cast<std::int64_t>(w) * h > kMaxPixels)
        throw FormatError(path.string() + ": implausible flo dimensions");

    FlowField field(w, h);
    const std::size_t n = field.size();
    std::vector<float> interleaved(n * 2);
    in.read(reinterpret_cast<char*>(interleaved.data()),
            static_cast<std::streamsize>(interleaved.size() * sizeof(float)));
    if (!in || in.gcount() != static_cast<std::streamsize>(interleaved.size() * sizeof(float)))
        throw FormatError(path.string() + ": truncated flo payload");
    in.peek();
    if (!in.eof()) throw FormatError(path.string() + ": trailing bytes after flo payload");

    for (std::size_t i = 0; i < n; ++i) {
        field.u[i] = interleaved[2 * i];
        field.v[i] = interleaved[2 * i + 1];
    }
    if (!field.all_finite())
        throw FormatError(path.string() + ": non-finite flow values");
    return field;
}

void write_flo(const FlowField& field, const std::filesystem::path& path) {
    if (field.width <= 0 || field.height <= 0)
        throw ShapeError("refusing to write flow field with nonpositive dimensions");
    if (!field.all_finite())
        throw FormatError("refusing to write non-finite flow values");

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + path.string());

    const std::int32_t w = field.width, h = field.height;
    out.write(reinterpret_cast<const char*>(&kFloMagic), 4);
    out.write(reinterpret_cast<const char*>(&w), 4);
    out.write(reinterpret_cast<const char*>(&h), 4);

    const std::size_t n = field.size();
    std::vector<float> interleaved(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
        interleaved[2 * i] = field.u[i];
        interleaved[2 * i + 1] = field.v[i];
    }
    out.write(reinterpret_cast<const char*>(interleaved.data()),
              static_cast<std::streamsize>(interleaved.size() * sizeof(float)));
    if (!out) throw IoError("write failed for " + path.string());
}

} // namespace amflow
