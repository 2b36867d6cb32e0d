#include "amflow/stack_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "amflow/flo_io.hpp"
#include "amflow/png_io.hpp"

namespace amflow {

namespace fs = std::filesystem;

namespace {

constexpr char kAmflMagic[4] = {'A', 'M', 'F', 'L'};
constexpr std::uint32_t kAmflVersion = 1;

bool is_amfl_path(const fs::path& p) { return p.extension() == ".amfl"; }

std::string level_flo_name(int n) { return "level_" + std::to_string(n) + ".flo"; }
std::string level_mask_name(int n) { return "level_" + std::to_string(n) + "_mask.png"; }

void validate_stack(const LayeredFlowStack& stack, const std::string& what) {
    if (stack.num_levels() < 1)
        throw FormatError(what + ": stack must contain at least one level");
    if (stack.num_levels() > kMaxLevels)
        throw FormatError(what + ": stack exceeds " + std::to_string(kMaxLevels) + " levels");
    if (!stack.consistent())
        throw FormatError(what + ": level dimensions disagree");
    for (const LevelField& lf : stack.levels) require_binary(lf.mask, what.c_str());
}

LayeredFlowStack read_stack_dir(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw IoError("stack directory not found: " + dir.string());

    int n_levels = 0;
    while (fs::exists(dir / level_flo_name(n_levels))) ++n_levels;
    if (n_levels == 0)
        throw FormatError(dir.string() + ": no level_0.flo found");
    if (fs::exists(dir / level_flo_name(kMaxLevels)))
        throw FormatError(dir.string() + ": more than " + std::to_string(kMaxLevels) + " levels");

    LayeredFlowStack stack;
    for (int n = 0; n < n_levels; ++n) {
        LevelField lf;
        lf.flow = read_flo(dir / level_flo_name(n));
        const fs::path mask_path = dir / level_mask_name(n);
        if (fs::exists(mask_path)) {
            lf.mask = read_mask_png(mask_path);
        } else if (n == 0) {
            // Background is amodally present everywhere unless stated.
            lf.mask = Mask(lf.flow.width, lf.flow.height, 1);
        } else {
            throw FormatError(mask_path.string() + ": missing level mask");
        }
        if (!lf.consistent())
            throw FormatError(mask_path.string() + ": mask/flow dimension mismatch");
        stack.levels.push_back(std::move(lf));
    }
    validate_stack(stack, dir.string());
    return stack;
}

void write_stack_dir(const LayeredFlowStack& stack, const fs::path& dir) {
    fs::create_directories(dir);
    for (int n = 0; n < stack.num_levels(); ++n) {
        write_flo(stack.levels[n].flow, dir / level_flo_name(n));
        write_mask_png(stack.levels[n].mask, dir / level_mask_name(n));
    }
}

LayeredFlowStack read_stack_amfl(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    char magic[4] = {};
    std::uint32_t version = 0, w = 0, h = 0;
    std::uint8_t n_levels = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&w), 4);
    in.read(reinterpret_cast<char*>(&h), 4);
    in.read(reinterpret_cast<char*>(&n_levels), 1);
    if (!in) throw FormatError(path.string() + ": truncated AMFL header");
    if (std::memcmp(magic, kAmflMagic, 4) != 0)
        throw FormatError(path.string() + ": bad AMFL magic");
    if (version != kAmflVersion)
        throw FormatError(path.string() + ": unsupported AMFL version");
    if (w == 0 || h == 0 || w > (1u << 20) || h > (1u << 20))
        throw FormatError(path.string() + ": implausible AMFL dimensions");
    if (n_levels < 1 || n_levels > kMaxLevels)
        throw FormatError(path.string() + ": AMFL level count out of range");

    const std::size_t pixels = std::size_t(w) * h;
    LayeredFlowStack stack;
    for (int n = 0; n < n_levels; ++n) {
        LevelField lf(static_cast<int>(w), static_cast<int>(h));
        in.read(reinterpret_cast<char*>(lf.mask.data()), static_cast<std::streamsize>(pixels));
        std::vector<float> interleaved(pixels * 2);
        in.read(reinterpret_cast<char*>(interleaved.data()),
                static_cast<std::streamsize>(interleaved.size() * sizeof(float)));
        if (!in) throw FormatError(path.string() + ": truncated AMFL payload");
        for (std::size_t i = 0; i < pixels; ++i) {
            lf.flow.u[i] = interleaved[2 * i];
            lf.flow.v[i] = interleaved[2 * i + 1];
        }
        if (!lf.flow.all_finite())
            throw FormatError(path.string() + ": non-finite flow values");
        stack.levels.push_back(std::move(lf));
    }
    in.peek();
    if (!in.eof()) throw FormatError(path.string() + ": trailing bytes after AMFL payload");
    validate_stack(stack, path.string());
    return stack;
}

void write_stack_amfl(const LayeredFlowStack& stack, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + path.string());

    const std::uint32_t w = static_cast<std::uint32_t>(stack.width());
    const std::uint32_t h = static_cast<std::uint32_t>(stack.height());
    const std::uint8_t n_levels = static_cast<std::uint8_t>(stack.num_levels());
    out.write(kAmflMagic, 4);
    out.write(reinterpret_cast<const char*>(&kAmflVersion), 4);
    out.write(reinterpret_cast<const char*>(&w), 4);
    out.write(reinterpret_cast<const char*>(&h), 4);
    out.write(reinterpret_cast<const char*>(&n_levels), 1);

    const std::size_t pixels = std::size_t(w) * h;
    for (const LevelField& lf : stack.levels) {
        out.write(reinterpret_cast<const char*>(lf.mask.data()),
                  static_cast<std::streamsize>(pixels));
        std::vector<float> interleaved(pixels * 2);
        for (std::size_t i = 0; i < pixels; ++i) {
            interleaved[2 * i] = lf.flow.u[i];
            interleaved[2 * i + 1] = lf.flow.v[i];
        }
        out.write(reinterpret_cast<const char*>(interleaved.data()),
                  static_cast<std::streamsize>(interleaved.size() * sizeof(float)));
    }
    if (!out) throw IoError("write failed for " + path.string());
}

} // namespace

LayeredFlowStack read_stack(const fs::path& dir_or_file) {
    if (is_amfl_path(dir_or_file) && !fs::is_directory(dir_or_file))
        return read_stack_amfl(dir_or_file);
    return read_stack_dir(dir_or_file);
}

void write_stack(const LayeredFlowStack& stack, const fs::path& dir_or_file) {
    validate_stack(stack, dir_or_file.string());
    if (is_amfl_path(dir_or_file))
        write_stack_amfl(stack, dir_or_file);
    else
        write_stack_dir(stack, dir_or_file);
}

} // namespace amflow
