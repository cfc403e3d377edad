#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "sd/error.hpp"
#include "sd/refmask.hpp"
#include "sd/rng.hpp"

using namespace sd;

namespace {

GridSpec grid(std::uint32_t w, std::uint32_t h) {
    GridSpec s;
    s.origin_y = static_cast<double>(h);
    s.width = w;
    s.height = h;
    return s;
}

Ring square(double x0, double y0, double x1, double y1) { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}; }

StandPolygon stand(int id, DevClass c, Ring ext, std::vector<Ring> holes = {}) {
    return {id, c, {std::move(ext), std::move(holes)}};
}

// Plain crossing-number test; the polygon's rings are treated as one even-odd set.
bool crossing_inside(double x, double y, const Polygon& poly) {
    bool in = false;
    auto ring_pass = [&](const Ring& r) {
        for (std::size_t i = 0, j = r.size() - 2; i + 1 < r.size(); j = i++) {
            if ((r[i].y > y) != (r[j].y > y) && x < (r[j].x - r[i].x) * (y - r[i].y) / (r[j].y - r[i].y) + r[i].x)
                in = !in;
        }
    };
    ring_pass(poly.exterior);
    for (const auto& h : poly.holes) ring_pass(h);
    return in;
}

Ring random_star(Rng& rng, double cx, double cy, double rmax) {
    Ring r;
    const int n = 5 + static_cast<int>(rng.below(5));
    for (int i = 0; i < n; ++i) {
        const double a = 6.283185307179586 * (i + rng.uniform(0.1, 0.9)) / n;
        const double rad = rng.uniform(0.5, 1.0) * rmax;
        r.push_back({cx + rad * std::cos(a), cy + rad * std::sin(a)});
    }
    r.push_back(r.front());
    return r;
}

Ring rotated(const Ring& r, std::size_t k) {
    Ring open(r.begin(), r.end() - 1), out;
    for (std::size_t i = 0; i < open.size(); ++i) out.push_back(open[(i + k) % open.size()]);
    out.push_back(out.front());
    return out;
}

} // namespace

TEST_CASE("class codes merge I and II") {
    CHECK(class_code(DevClass::I) == 1);
    CHECK(class_code(DevClass::II) == 1);
    CHECK(class_code(DevClass::V) == 4);
    CHECK(dev_class_from_string("III") == DevClass::III);
    CHECK_THROWS_AS(dev_class_from_string("VI"), ArgumentError);
    CHECK(to_string(dev_class_from_code(1)) == "II");
}

TEST_CASE("rasterization examples") {
    const GridSpec s = grid(4, 4);
    SUBCASE("square covering four centers") {
        const GeoGrid m = rasterize_stands({stand(1, DevClass::V, square(1, 1, 3, 3))}, s);
        CHECK(std::count(m.values().begin(), m.values().end(), 4.0f) == 4);
        CHECK(std::count(m.values().begin(), m.values().end(), 0.0f) == 12);
        CHECK(m.at(0, 1, 1) == 4.0f);
        CHECK(m.at(0, 0, 0) == 0.0f);
    }
    SUBCASE("class II maps to the merged code") {
        const GeoGrid m = rasterize_stands({stand(1, DevClass::II, square(0, 0, 4, 4))}, s);
        for (float v : m.values()) CHECK(v == 1.0f);
    }
    SUBCASE("hole reverts to NF") {
        const GeoGrid m = rasterize_stands({stand(1, DevClass::III, square(0, 0, 4, 4), {square(1, 1, 3, 3)})}, s);
        CHECK(m.at(0, 1, 1) == 0.0f);
        CHECK(m.at(0, 2, 2) == 0.0f);
        CHECK(m.at(0, 0, 0) == 2.0f);
        CHECK(m.at(0, 3, 1) == 2.0f);
    }
    SUBCASE("overlap: last listed wins with a warning") {
        std::vector<std::string> warnings;
        const GeoGrid m = rasterize_stands(
            {stand(10, DevClass::III, square(0, 0, 3, 4)), stand(11, DevClass::IV, square(2, 0, 4, 4))}, s, &warnings);
        CHECK(m.at(0, 0, 2) == 3.0f);
        CHECK(m.at(0, 0, 1) == 2.0f);
        REQUIRE(warnings.size() == 1);
        CHECK(warnings[0].find("10") != std::string::npos);
        CHECK(warnings[0].find("11") != std::string::npos);
    }
    SUBCASE("center on a shared edge goes to the first listed polygon") {
        const auto a = stand(1, DevClass::III, square(0, 0, 1.5, 4));
        const auto b = stand(2, DevClass::IV, square(1.5, 0, 4, 4));
        CHECK(rasterize_stands({a, b}, s).at(0, 2, 1) == 2.0f);
        CHECK(rasterize_stands({b, a}, s).at(0, 2, 1) == 3.0f);
    }
}

TEST_CASE("malformed rings name the stand") {
    Ring open = square(0, 0, 2, 2);
    open.pop_back();
    try {
        rasterize_stands({stand(42, DevClass::V, open)}, grid(4, 4));
        FAIL("expected geometry error");
    } catch (const GeometryError& e) {
        CHECK(std::string(e.what()).find("42") != std::string::npos);
    }
    const Ring bowtie{{0, 0}, {2, 2}, {2, 0}, {0, 2}, {0, 0}};
    CHECK_THROWS_AS(rasterize_stands({stand(1, DevClass::V, bowtie)}, grid(4, 4)), GeometryError);
}

TEST_CASE("class counts match a brute-force crossing oracle") {
    Rng rng(2024);
    const GridSpec s = grid(40, 30);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<StandPolygon> stands;
        const int n = 1 + static_cast<int>(rng.below(6));
        for (int k = 0; k < n; ++k) {
            const double cx = rng.uniform(0, 40), cy = rng.uniform(0, 30);
            Ring ext = random_star(rng, cx, cy, rng.uniform(4, 14));
            std::vector<Ring> holes;
            if (rng.uniform() < 0.4) holes.push_back(square(cx - 0.45, cy - 0.4, cx + 0.35, cy + 0.45));
            stands.push_back(stand(k + 1, static_cast<DevClass>(rng.below(6)), ext, holes));
        }
        const GeoGrid m = rasterize_stands(stands, s);
        std::vector<int> got(5, 0), want(5, 0);
        for (std::uint32_t r = 0; r < s.height; ++r) {
            for (std::uint32_t c = 0; c < s.width; ++c) {
                int code = 0;
                for (const auto& st : stands)
                    if (crossing_inside(s.center_x(c), s.center_y(r), st.polygon)) code = class_code(st.dev_class);
                ++want[code];
                ++got[static_cast<int>(m.at(0, r, c))];
            }
        }
        CHECK(got == want);

        std::vector<StandPolygon> rot = stands;
        for (auto& st : rot) st.polygon.exterior = rotated(st.polygon.exterior, 1 + rng.below(3));
        CHECK(rasterize_stands(rot, s) == m);
    }
}

TEST_CASE("one-hot planes partition the mask") {
    GeoGrid m(grid(5, 3), 1, DType::U8);
    for (std::size_t i = 0; i < m.values().size(); ++i) m.values()[i] = static_cast<float>(i % 5);
    const GeoGrid planes = one_hot(m);
    REQUIRE(planes.channels() == 5);
    for (std::uint32_t r = 0; r < 3; ++r)
        for (std::uint32_t c = 0; c < 5; ++c) {
            float sum = 0;
            for (std::uint16_t k = 0; k < 5; ++k) sum += planes.at(k, r, c);
            CHECK(sum == 1.0f);
        }
    CHECK(planes.at(3, 0, 3) == 1.0f);
    CHECK(planes.at(2, 0, 3) == 0.0f);
    CHECK(argmax_planes(planes).values() == m.values());
    m.values()[4] = 5.0f;
    CHECK_THROWS_AS(one_hot(m), DomainError);
}
