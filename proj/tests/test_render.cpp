#include <doctest.h>

#include <png.h>

#include "sd/error.hpp"
#include "sd/render.hpp"

using namespace sd;

namespace {

struct Decoded {
    std::uint32_t width = 0, height = 0;
    std::vector<std::uint8_t> rgb;
};

Decoded decode(const std::vector<std::uint8_t>& bytes) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    REQUIRE(png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()));
    img.format = PNG_FORMAT_RGB;
    Decoded d{img.width, img.height, std::vector<std::uint8_t>(PNG_IMAGE_SIZE(img))};
    REQUIRE(png_image_finish_read(&img, nullptr, d.rgb.data(), 0, nullptr));
    return d;
}

GeoGrid line(std::uint16_t channels, std::vector<float> v) {
    GridSpec s;
    s.width = static_cast<std::uint32_t>(v.size() / channels);
    GeoGrid g(s, channels);
    g.values() = std::move(v);
    return g;
}

} // namespace

TEST_CASE("grayscale rounds half up") {
    const auto d = decode(render_png(line(1, {0.0f, 1.0f, 0.5f, 0.25f}), RenderStyle::Grayscale));
    REQUIRE(d.width == 4);
    CHECK(d.rgb[0] == 0);
    CHECK(d.rgb[3] == 255);
    CHECK(d.rgb[6] == 128);
    CHECK(d.rgb[9] == 64);
    CHECK(d.rgb[10] == 64);
}

TEST_CASE("rgb and class styles") {
    const auto d = decode(render_png(line(3, {1.0f, 0.0f, 0.0f, 1.0f, 0.0f, 0.0f}), RenderStyle::Rgb));
    CHECK(d.rgb[0] == 255);
    CHECK(d.rgb[1] == 0);
    CHECK(d.rgb[4] == 255);
    GeoGrid mask = line(1, {0, 1, 2, 3, 4});
    const auto c = decode(render_png(mask, RenderStyle::ClassMap));
    CHECK(c.width == 5);
    for (int a = 0; a < 5; ++a)
        for (int b = a + 1; b < 5; ++b)
            CHECK_FALSE((c.rgb[a * 3] == c.rgb[b * 3] && c.rgb[a * 3 + 1] == c.rgb[b * 3 + 1] &&
                         c.rgb[a * 3 + 2] == c.rgb[b * 3 + 2]));
    CHECK_THROWS_AS(render_png(mask, RenderStyle::Grayscale, 2), ArgumentError);
    CHECK_THROWS_AS(render_png(mask, RenderStyle::Rgb), ArgumentError);
    CHECK(render_style_from_string("classmap") == RenderStyle::ClassMap);
    CHECK_THROWS_AS(render_style_from_string("sepia"), ArgumentError);
}
