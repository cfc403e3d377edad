#include "sd/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include <png.h>

#include "sd/error.hpp"

namespace sd {

RenderStyle render_style_from_string(const std::string& name) {
    if (name == "classmap") return RenderStyle::ClassMap;
    if (name == "grayscale") return RenderStyle::Grayscale;
    if (name == "rgb") return RenderStyle::Rgb;
    throw ArgumentError("unknown render style '" + name + "' (classmap, grayscale, rgb)");
}

namespace {

constexpr std::array<std::array<std::uint8_t, 3>, 5> kPalette{{
    {0x80, 0x80, 0x80},
    {0xE8, 0xD4, 0x4D},
    {0xA8, 0xD0, 0x8D},
    {0x4F, 0x9D, 0x4F},
    {0x1E, 0x5B, 0x1E},
}};

std::uint8_t to_byte(float v) {
    const double x = std::clamp(static_cast<double>(v), 0.0, 1.0);
    return static_cast<std::uint8_t>(std::floor(x * 255.0 + 0.5));
}

void append_bytes(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void no_flush(png_structp) {}

[[noreturn]] void on_error(png_structp png, png_const_charp msg) {
    (void)png;
    throw IoError(std::string("PNG encoding failed: ") + msg);
}

} // namespace

std::vector<std::uint8_t> render_png(const GeoGrid& grid, RenderStyle style, std::uint16_t channel) {
    const std::uint32_t W = grid.width(), H = grid.height();
    int color_type = PNG_COLOR_TYPE_RGB;
    std::size_t bpp = 3;
    switch (style) {
    case RenderStyle::ClassMap:
        if (grid.channels() != 1) throw ArgumentError("classmap rendering needs a 1-channel mask");
        break;
    case RenderStyle::Grayscale:
        if (channel >= grid.channels()) throw ArgumentError("grayscale channel out of range");
        color_type = PNG_COLOR_TYPE_GRAY;
        bpp = 1;
        break;
    case RenderStyle::Rgb:
        if (grid.channels() < 3) throw ArgumentError("rgb rendering needs at least 3 channels");
        break;
    }

    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(W) * H * bpp);
    for (std::uint32_t r = 0; r < H; ++r) {
        for (std::uint32_t c = 0; c < W; ++c) {
            std::uint8_t* px = pixels.data() + (static_cast<std::size_t>(r) * W + c) * bpp;
            if (style == RenderStyle::ClassMap) {
                const float v = grid.at(0, r, c);
                if (!(v >= 0.0f && v < 5.0f) || v != std::floor(v))
                    throw ArgumentError("classmap value " + std::to_string(v) + " is not a class code");
                const auto& rgb = kPalette[static_cast<std::size_t>(v)];
                std::copy(rgb.begin(), rgb.end(), px);
            } else if (style == RenderStyle::Grayscale) {
                px[0] = to_byte(grid.at(channel, r, c));
            } else {
                for (std::uint16_t b = 0; b < 3; ++b) px[b] = to_byte(grid.at(b, r, c));
            }
        }
    }

    std::vector<std::uint8_t> out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, on_error, nullptr);
    if (!png) throw IoError("cannot create PNG writer");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("cannot create PNG info");
    }
    try {
        png_set_write_fn(png, &out, append_bytes, no_flush);
        png_set_IHDR(png, info, W, H, 8, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                     PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        for (std::uint32_t r = 0; r < H; ++r) png_write_row(png, pixels.data() + static_cast<std::size_t>(r) * W * bpp);
        png_write_end(png, nullptr);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
    png_destroy_write_struct(&png, &info);
    return out;
}

void save_png(const std::vector<std::uint8_t>& png, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(png.data()), static_cast<std::streamsize>(png.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

} // namespace sd
