#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "sd/composite.hpp"
#include "sd/error.hpp"
#include "sd/rng.hpp"

using namespace sd;

namespace {

GridSpec grid(std::uint32_t w, std::uint32_t h, double cs = 1.0) {
    GridSpec s;
    s.origin_x = 100.0;
    s.origin_y = 900.0;
    s.cell_size = cs;
    s.width = w;
    s.height = h;
    return s;
}

Polygon rect_poly(double x0, double y0, double x1, double y1) {
    return {{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}, {}};
}

GeoGrid filled(const GridSpec& s, std::uint16_t ch, float base) {
    GeoGrid g(s, ch);
    for (std::size_t i = 0; i < g.values().size(); ++i) g.values()[i] = base + 0.001f * static_cast<float>(i % 97);
    return g;
}

} // namespace

TEST_CASE("channel scaling") {
    GeoGrid g(grid(3, 1), 1);
    g.at(0, 0, 0) = 255.0f;
    g.at(0, 0, 1) = 0.0f;
    g.at(0, 0, 2) = 375.0f;
    const GeoGrid sp = scale_channel(g, ChannelKind::Spectral);
    CHECK(sp.at(0, 0, 0) == 1.0f);
    CHECK(sp.at(0, 0, 1) == 0.0f);
    const GeoGrid dtm = scale_channel(g, ChannelKind::Dtm);
    CHECK(dtm.at(0, 0, 2) == 1.0f);
    const GeoGrid chm = scale_channel(g, ChannelKind::Chm);
    CHECK(chm.at(0, 0, 0) == 1.0f);
    CHECK_THROWS_AS(scale_channel(g, ChannelKind::Dtm, 0.0), ArgumentError);
}

TEST_CASE("stacking keeps channel order and slices back bit-exactly") {
    const GridSpec s = grid(5, 4);
    const GeoGrid spectral = filled(s, 4, 0.2f), chm = filled(s, 1, 0.5f), dtm = filled(s, 1, 0.7f);
    const Composite five = stack(spectral, chm, std::nullopt, CanopySource::Dap);
    CHECK(five.combo == Combo::RgbiDap);
    CHECK(five.grid.channels() == 5);
    const Composite six = stack(spectral, chm, dtm, CanopySource::Dap);
    CHECK(six.combo == Combo::RgbiDapDtm);
    REQUIRE(six.grid.channels() == 6);
    for (std::uint16_t c = 0; c < 4; ++c) CHECK(six.grid.extract(c).values() == spectral.extract(c).values());
    CHECK(six.grid.extract(4).values() == chm.values());
    CHECK(six.grid.extract(5).values() == dtm.values());
    CHECK(stack(spectral, chm, std::nullopt).combo == Combo::RgbiAls);
    CHECK(to_string(Combo::RgbiDapDtm) == "RGBI-DAP-DTM");
    CHECK(combo_from_string("RGBI-ALS") == Combo::RgbiAls);
}

TEST_CASE("misaligned inputs name the differing field") {
    const GeoGrid spectral = filled(grid(5, 4), 4, 0.2f);
    const GeoGrid chm = filled(grid(5, 4, 2.0), 1, 0.5f);
    try {
        stack(spectral, chm, std::nullopt);
        FAIL("expected alignment error");
    } catch (const AlignmentError& e) {
        CHECK(std::string(e.what()).find("cell_size") != std::string::npos);
    }
}

TEST_CASE("tiling") {
    SUBCASE("exact division") {
        const auto tiles = make_tiles(grid(1536, 1024), 512);
        CHECK(tiles.size() == 6);
        for (const auto& t : tiles) CHECK(t.coverage == 1.0);
        CHECK(tiles[4].lattice_row == 1);
        CHECK(tiles[4].lattice_col == 1);
    }
    SUBCASE("padded edges") {
        const auto tiles = make_tiles(grid(1000, 1000), 512);
        REQUIRE(tiles.size() == 4);
        CHECK(tiles[0].coverage == 1.0);
        CHECK(tiles[1].coverage == doctest::Approx(488.0 / 512.0));
        CHECK(tiles[3].coverage == doctest::Approx(488.0 * 488.0 / (512.0 * 512.0)));
        CHECK(tiles[3].window.n_rows == 512);
    }
    SUBCASE("coverage threshold drops a corner tile") {
        const auto tiles = make_tiles(grid(768, 768), 512, 0.5);
        CHECK(tiles.size() == 3);
        CHECK(tiles.back().id == 2);
    }
    SUBCASE("windows partition the grid") {
        const GridSpec s = grid(70, 45);
        std::vector<int> hits(s.pixel_count(), 0);
        for (const auto& t : make_tiles(s, 16))
            for (std::int64_t r = t.window.row0; r < t.window.row0 + t.window.n_rows; ++r)
                for (std::int64_t c = t.window.col0; c < t.window.col0 + t.window.n_cols; ++c)
                    if (r < s.height && c < s.width) ++hits[r * s.width + c];
        CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    }
}

TEST_CASE("municipality assignment by largest overlap") {
    const GridSpec s = grid(10, 10);
    const Tile tile = make_tiles(s, 10).front(); // x 100..110, y 890..900
    SUBCASE("contained") {
        CHECK(assign_municipality(tile, s, {{7, rect_poly(0, 0, 1000, 1000)}}) == 7);
    }
    SUBCASE("60/40 split") {
        CHECK(assign_municipality(tile, s, {{2, rect_poly(104, 0, 200, 1000)}, {1, rect_poly(0, 0, 104, 1000)}}) == 2);
    }
    SUBCASE("exact tie goes to the smallest id") {
        CHECK(assign_municipality(tile, s, {{5, rect_poly(105, 0, 200, 1000)}, {3, rect_poly(0, 0, 105, 1000)}}) == 3);
    }
    SUBCASE("no overlap") {
        CHECK_THROWS_AS(assign_municipality(tile, s, {{1, rect_poly(0, 0, 50, 50)}}), AssignmentError);
    }
}

TEST_CASE("validation pattern and fold plan") {
    SUBCASE("10x10 lattice has 16 validation tiles") {
        int n = 0;
        for (std::uint32_t r = 0; r < 10; ++r)
            for (std::uint32_t c = 0; c < 10; ++c) n += is_validation(r, c, {});
        CHECK(n == 16);
        CHECK(is_validation(0, 0, {}));
        CHECK(is_validation(6, 5, {}));
        CHECK_FALSE(is_validation(2, 0, {}));
    }
    SUBCASE("offset shifts the cluster") {
        const ValidationPattern p{5, {1, 3}};
        CHECK(is_validation(1, 3, p));
        CHECK(is_validation(2, 4, p));
        CHECK_FALSE(is_validation(0, 0, p));
    }
    SUBCASE("folds partition tiles per municipality") {
        const GridSpec s = grid(200, 100);
        auto tiles = make_tiles(s, 10); // 10 x 20 lattice
        std::vector<Municipality> m{{0, rect_poly(100, 800, 200, 900)}, {1, rect_poly(200, 800, 300, 900)}};
        assign_municipalities(tiles, s, m);
        const FoldPlan plan = plan_folds(tiles);
        REQUIRE(plan.folds.size() == 2);
        std::map<int, int> in_test;
        for (const auto& f : plan.folds) {
            std::set<int> all;
            for (const auto* v : {&f.train, &f.val, &f.test})
                for (int id : *v) CHECK(all.insert(id).second);
            CHECK(all.size() == tiles.size());
            for (int id : f.test) ++in_test[id];
            CHECK(f.test.size() == 100);
            CHECK(f.val.size() == 16);
        }
        CHECK(in_test.size() == tiles.size());
        for (const auto& [id, n] : in_test) CHECK(n == 1);
    }
    SUBCASE("a single municipality cannot be cross-validated") {
        auto tiles = make_tiles(grid(20, 20), 10);
        for (auto& t : tiles) t.municipality = 0;
        CHECK_THROWS_AS(plan_folds(tiles), PreconditionError);
    }
}

TEST_CASE("tile cutting pads outside the grid") {
    const GridSpec s = grid(6, 5);
    GeoGrid img = filled(s, 2, 0.1f);
    GeoGrid lab(s, 1, DType::U8);
    lab.at(0, 4, 5) = 3.0f;
    const TileData td = cut_tile(img, &lab, {4, 4, 4, 4});
    CHECK(td.valid[0] == 1);
    CHECK(td.valid[1] == 1);
    CHECK(td.valid[2] == 0);
    CHECK(td.valid[4] == 0);
    CHECK(td.image.at(1, 0, 1) == img.at(1, 4, 5));
    CHECK(td.labels->at(0, 0, 1) == 3.0f);
    CHECK(td.image.at(0, 3, 3) == 0.0f);
}
