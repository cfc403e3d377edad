#include <doctest.h>

#include <sstream>

#include "sd/error.hpp"
#include "sd/grid.hpp"

using namespace sd;

namespace {

GridSpec small_spec() {
    GridSpec s;
    s.origin_x = 1000.0;
    s.origin_y = 2000.0;
    s.cell_size = 2.0;
    s.width = 3;
    s.height = 2;
    return s;
}

} // namespace

TEST_CASE("cell centers and lookup follow north-up orientation") {
    const GridSpec s = small_spec();
    CHECK(s.center_x(0) == 1001.0);
    CHECK(s.center_y(0) == 1999.0);
    CHECK(s.center_y(1) == 1997.0);
    auto cell = s.cell_of(1001.0, 1999.0);
    REQUIRE(cell);
    CHECK(cell->first == 0);
    CHECK(cell->second == 0);
    cell = s.cell_of(1005.9, 1996.1);
    REQUIRE(cell);
    CHECK(cell->first == 1);
    CHECK(cell->second == 2);
    CHECK_FALSE(s.cell_of(1006.0, 1999.0));
    CHECK_FALSE(s.cell_of(999.9, 1999.0));
    CHECK_FALSE(s.cell_of(1001.0, 2000.1));
}

TEST_CASE("invalid specs are rejected") {
    GridSpec s = small_spec();
    s.cell_size = 0.0;
    CHECK_THROWS_AS(s.validate(), ArgumentError);
    s = small_spec();
    s.width = 0;
    CHECK_THROWS_AS(s.validate(), ArgumentError);
}

TEST_CASE("f32 grid with nodata round-trips bit-exactly") {
    GeoGrid g(small_spec(), 2, DType::F32, {"a", "bb"});
    for (std::size_t i = 0; i < g.values().size(); ++i) g.values()[i] = 0.1f * static_cast<float>(i) - 0.3f;
    g.set_nodata(1, 2, true);

    std::stringstream ss;
    const auto written = write_grid(g, ss);
    // header 42 + names (1+1)+(1+2) + payload 2*6*4 + mask 6
    CHECK(written == 42 + 5 + 48 + 6);
    CHECK(ss.str().size() == written);
    const GeoGrid back = read_grid(ss);
    CHECK(back == g);
    CHECK(back.is_nodata(1, 2));
    CHECK_FALSE(back.is_nodata(0, 0));
    CHECK(back.channel_names() == std::vector<std::string>{"a", "bb"});
}

TEST_CASE("u8 grid stores bytes") {
    GeoGrid g(small_spec(), 1, DType::U8, {"class"});
    g.at(0, 0, 1) = 4.0f;
    g.at(0, 1, 2) = 255.0f;
    std::stringstream ss;
    CHECK(write_grid(g, ss) == 42 + 6 + 6);
    const GeoGrid back = read_grid(ss);
    CHECK(back.dtype() == DType::U8);
    CHECK(back == g);

    g.at(0, 0, 0) = 3.5f;
    std::stringstream bad;
    CHECK_THROWS_AS(write_grid(g, bad), ArgumentError);
}

TEST_CASE("reader reports malformed containers") {
    GeoGrid g(small_spec(), 1);
    std::stringstream ss;
    write_grid(g, ss);
    const std::string bytes = ss.str();

    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    std::istringstream in1(bad_magic);
    CHECK_THROWS_AS(read_grid(in1), FormatError);

    std::istringstream in2(bytes.substr(0, bytes.size() - 3));
    try {
        read_grid(in2);
        FAIL("expected a format error");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("truncated") != std::string::npos);
        CHECK(std::string(e.what()).find("expected 24 bytes, got 21") != std::string::npos);
    }

    std::string bad_version = bytes;
    bad_version[4] = 9;
    std::istringstream in3(bad_version);
    CHECK_THROWS_AS(read_grid(in3), FormatError);

    std::string bad_dtype = bytes;
    bad_dtype[6] = 7;
    std::istringstream in4(bad_dtype);
    CHECK_THROWS_AS(read_grid(in4), FormatError);
}

TEST_CASE("crop copies a window and shifts the origin") {
    GeoGrid g(small_spec(), 1);
    for (std::size_t i = 0; i < 6; ++i) g.values()[i] = static_cast<float>(i);
    const GeoGrid c = crop(g, {1, 1, 1, 2});
    CHECK(c.width() == 2);
    CHECK(c.height() == 1);
    CHECK(c.at(0, 0, 0) == 4.0f);
    CHECK(c.at(0, 0, 1) == 5.0f);
    CHECK(c.spec().origin_x == 1002.0);
    CHECK(c.spec().origin_y == 1998.0);
    CHECK_THROWS_AS(crop(g, {1, 2, 1, 2}), ArgumentError);
}
