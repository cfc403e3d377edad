#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sd/rng.hpp"
#include "sd/vectorize.hpp"

using namespace sd;

namespace {

GeoGrid mask_of(std::uint32_t w, std::uint32_t h, const std::vector<int>& v, double cs = 1.0) {
    GridSpec s;
    s.origin_x = 1000.0;
    s.origin_y = 2000.0;
    s.cell_size = cs;
    s.width = w;
    s.height = h;
    GeoGrid g(s, 1, DType::U8);
    for (std::size_t i = 0; i < v.size(); ++i) g.values()[i] = static_cast<float>(v[i]);
    return g;
}

GeoGrid random_blobs(Rng& rng, std::uint32_t w, std::uint32_t h, double cs) {
    std::vector<int> v(static_cast<std::size_t>(w) * h);
    for (auto& x : v) x = static_cast<int>(rng.below(5));
    // a few smoothing passes give patches of varied size
    for (int pass = 0; pass < 3; ++pass) {
        std::vector<int> next = v;
        for (std::uint32_t r = 1; r + 1 < h; ++r)
            for (std::uint32_t c = 1; c + 1 < w; ++c) {
                int count[5] = {};
                for (int dr = -1; dr <= 1; ++dr)
                    for (int dc = -1; dc <= 1; ++dc) ++count[v[(r + dr) * w + c + dc]];
                next[r * w + c] = static_cast<int>(std::max_element(count, count + 5) - count);
            }
        v = next;
    }
    return mask_of(w, h, v, cs);
}

double net_area(const Polygon& p) {
    double a = signed_area(p.exterior);
    for (const auto& h : p.holes) a += signed_area(h);
    return a;
}

double total_area(const std::vector<StandOutPolygon>& polys) {
    double a = 0;
    for (const auto& p : polys) a += p.area_m2;
    return a;
}

} // namespace

TEST_CASE("component counts") {
    CHECK(components(mask_of(3, 3, std::vector<int>(9, 2))).regions.size() == 1);
    const GeoGrid checker = mask_of(2, 2, {1, 2, 2, 1});
    CHECK(components(checker, 4).regions.size() == 4);
    CHECK(components(checker, 8).regions.size() == 2);
    const RegionMap m = components(mask_of(3, 2, {0, 0, 1, 1, 0, 1}));
    REQUIRE(m.regions.size() == 3);
    CHECK(m.regions[0].dev_class == 0);
    CHECK(m.regions[0].pixel_count == 3);
    CHECK(m.regions[1].dev_class == 1);
    CHECK(m.labels[3] == m.regions[2].id);
}

TEST_CASE("masked pixels are excluded") {
    const GeoGrid g = mask_of(3, 1, {2, 2, 2});
    const std::vector<std::uint8_t> valid{1, 0, 1};
    const RegionMap m = components(g, 4, &valid);
    CHECK(m.regions.size() == 2);
    CHECK(m.labels[1] == -1);
    CHECK(regions_to_mask(m).is_nodata(0, 1));
}

TEST_CASE("polygon examples") {
    SUBCASE("single pixel") {
        const auto p = polygonize(components(mask_of(1, 1, {3})));
        REQUIRE(p.size() == 1);
        CHECK(p[0].area_m2 == 1.0);
        CHECK(p[0].perimeter_m == 4.0);
        CHECK(p[0].shape_index == doctest::Approx(4.0 / 3.14159265358979323846));
        CHECK(p[0].polygon.exterior.size() == 5);
        CHECK(signed_area(p[0].polygon.exterior) == 1.0);
        CHECK(p[0].polygon.exterior.front() == p[0].polygon.exterior.back());
    }
    SUBCASE("3x3 block") {
        const auto p = polygonize(components(mask_of(3, 3, std::vector<int>(9, 1))));
        CHECK(p[0].area_m2 == 9.0);
        CHECK(p[0].perimeter_m == 12.0);
        CHECK(p[0].polygon.exterior.size() == 5);
    }
    SUBCASE("donut") {
        std::vector<int> v(16, 2);
        v[5] = v[6] = v[9] = v[10] = 4;
        const auto p = polygonize(components(mask_of(4, 4, v, 2.0)));
        REQUIRE(p.size() == 2);
        CHECK(p[0].polygon.holes.size() == 1);
        CHECK(p[0].area_m2 == 48.0);
        CHECK(net_area(p[0].polygon) == 48.0);
        CHECK(signed_area(p[0].polygon.holes[0]) == -16.0);
        CHECK(p[1].area_m2 == 16.0);
    }
    SUBCASE("corner touch") {
        const GeoGrid diag = mask_of(2, 2, {1, 0, 0, 1});
        const auto four = polygonize(components(diag, 4));
        CHECK(four.size() == 4);
        const auto eight = polygonize(components(diag, 8));
        REQUIRE(eight.size() == 2);
        CHECK(eight[0].area_m2 == 2.0);
        CHECK(net_area(eight[0].polygon) == 2.0);
    }
}

TEST_CASE("areas are conserved on random masks") {
    Rng rng(12);
    for (int t = 0; t < 12; ++t) {
        const double cs = t % 2 ? 1.0 : 2.5;
        const GeoGrid g = random_blobs(rng, 30 + t, 25, cs);
        for (int conn : {4, 8}) {
            RegionMap m = components(g, conn);
            const double full = static_cast<double>(g.spec().pixel_count()) * cs * cs;
            auto polys = polygonize(m);
            CHECK(total_area(polys) == full);
            for (const auto& p : polys) {
                CHECK(net_area(p.polygon) == p.area_m2);
                CHECK(p.area_m2 == m.region(p.region_id).area_m2);
                CHECK(p.shape_index >= 1.0);
            }
            CHECK(components(regions_to_mask(m), conn).regions.size() == m.regions.size());

            const double mmu = 40.0 * cs * cs;
            mmu_filter(m, mmu);
            polys = polygonize(m);
            CHECK(total_area(polys) == full);
            for (const auto& r : m.regions) CHECK((r.flagged || r.area_m2 >= mmu));
            for (const auto& p : polys) CHECK(net_area(p.polygon) == p.area_m2);
        }
    }
}

TEST_CASE("minimum mapping unit") {
    SUBCASE("small region beside a large one is absorbed") {
        // 100 x 120 m at 1 m: a 1999 m2 region inside a 10000 m2 one
        std::vector<int> v(100 * 120, 3);
        int placed = 0;
        for (int r = 10; r < 120 && placed < 1999; ++r)
            for (int c = 10; c < 60 && placed < 1999; ++c, ++placed) v[r * 100 + c] = 4;
        GeoGrid g = mask_of(100, 120, v);
        RegionMap m = components(g);
        REQUIRE(m.regions.size() == 2);
        const double big = m.regions[0].area_m2;
        const auto log = mmu_filter(m, 2000.0);
        REQUIRE(log.size() == 1);
        CHECK(log[0].area_m2 == 1999.0);
        REQUIRE(m.regions.size() == 1);
        CHECK(m.regions[0].area_m2 == big + 1999.0);
        CHECK(m.regions[0].dev_class == 3);
    }
    SUBCASE("large regions are untouched") {
        RegionMap m = components(mask_of(2, 1, {1, 2}, 50.0));
        const auto before = m.regions;
        CHECK(mmu_filter(m, 2000.0).empty());
        CHECK(m.regions.size() == before.size());
        CHECK(m.regions[1].runs == before[1].runs);
    }
    SUBCASE("isolated undersized region is flagged") {
        RegionMap m = components(mask_of(3, 3, std::vector<int>(9, 2)));
        CHECK(mmu_filter(m, 2000.0).empty());
        CHECK(m.regions[0].flagged);
        CHECK(polygonize(m)[0].flag);
    }
    SUBCASE("longest shared boundary wins") {
        // region 2 (single column) touches class 1 along 1 edge and class 3 along 3 edges
        const GeoGrid g = mask_of(3, 3, {1, 1, 1, 3, 2, 3, 3, 3, 3}, 10.0);
        RegionMap m = components(g);
        const auto log = mmu_filter(m, 150.0);
        REQUIRE_FALSE(log.empty());
        CHECK(m.region(log[0].into).dev_class == 3);
        CHECK(log[0].shared_boundary_m == 30.0);
    }
}
