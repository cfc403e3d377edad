#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <filesystem>

#include "sd/error.hpp"
#include "sd/formats.hpp"

using namespace sd;

TEST_CASE("grid spec json") {
    GridSpec s;
    s.origin_x = 500000.5;
    s.origin_y = 6700000.25;
    s.cell_size = 0.5;
    s.width = 7;
    s.height = 3;
    CHECK(parse_grid_spec(grid_spec_json(s)) == s);
    CHECK_THROWS_AS(parse_grid_spec("{\"origin_x\": 1}"), ParseError);
    CHECK_THROWS_AS(parse_grid_spec("not json"), ParseError);
}

TEST_CASE("stand map json") {
    const std::string text = R"({"stands":[
        {"id":7,"class":"II","exterior":[[0,0],[4,0],[4,4],[0,4],[0,0]],"holes":[[[1,1],[1,2],[2,2],[2,1],[1,1]]]},
        {"id":8,"class":"V","exterior":[[4,0],[8,0],[8,4],[4,4],[4,0]]}]})";
    const auto stands = parse_stands(text);
    REQUIRE(stands.size() == 2);
    CHECK(stands[0].stand_id == 7);
    CHECK(stands[0].dev_class == DevClass::II);
    CHECK(stands[0].polygon.holes.size() == 1);
    CHECK(stands[1].polygon.holes.empty());
    const auto again = parse_stands(stands_json(stands));
    CHECK(again[0].polygon.exterior == stands[0].polygon.exterior);
    CHECK(again[1].dev_class == DevClass::V);
    CHECK_THROWS_AS(parse_stands(R"({"stands":[{"id":1,"class":"VII","exterior":[]}]})"), ParseError);
}

TEST_CASE("municipalities, tiles and folds round-trip") {
    std::vector<Municipality> m{{0, {{{0, 0}, {1, 0}, {1, 1}, {0, 0}}, {}}}, {3, {{{1, 0}, {2, 0}, {2, 1}, {1, 0}}, {}}}};
    const auto mm = parse_municipalities(municipalities_json(m));
    REQUIRE(mm.size() == 2);
    CHECK(mm[1].id == 3);
    CHECK(mm[1].polygon.exterior == m[1].polygon.exterior);

    TileSet set;
    set.grid.width = 20;
    set.grid.height = 10;
    set.grid.origin_y = 10;
    set.tile_px = 10;
    set.pattern.offset = {1, 2};
    set.tiles = make_tiles(set.grid, 10);
    set.tiles[1].municipality = 3;
    set.tiles[1].split = Split::Validation;
    const TileSet back = parse_tiles(tiles_json(set));
    CHECK(back.grid == set.grid);
    CHECK(back.pattern.offset == set.pattern.offset);
    REQUIRE(back.tiles.size() == 2);
    CHECK(back.tiles[1].window == set.tiles[1].window);
    CHECK(back.tiles[1].municipality == 3);
    CHECK(back.tiles[1].split == Split::Validation);

    FoldPlan plan;
    plan.folds.push_back({2, {1, 4}, {5}, {0, 3}});
    const FoldPlan fp = parse_fold_plan(fold_plan_json(plan));
    CHECK(fp.folds[0].test_municipality == 2);
    CHECK(fp.folds[0].train == plan.folds[0].train);
    CHECK(fp.folds[0].test == plan.folds[0].test);
}

TEST_CASE("report serializations") {
    ConfusionMatrix cm(5);
    cm.at(0, 0) = 3;
    cm.at(1, 2) = 1;
    cm.at(2, 2) = 2;
    const MetricReport r = make_report(cm, "truth", "model");
    const std::string j = report_json(r);
    const auto parsed = nlohmann::json::parse(j);
    for (const char* key : {"oa", "mmcc", "miou", "mf1", "mua", "mpa", "per_class", "confusion"})
        CHECK(parsed.contains(key));
    CHECK(parsed["reference"] == "truth");
    CHECK(parsed["prediction"] == "model");
    CHECK(parsed["oa"].get<double>() == doctest::Approx(5.0 / 6.0));
    const std::string csv = report_csv(r);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    CHECK(csv.rfind("reference,prediction,", 0) == 0);
}

TEST_CASE("text files") {
    const auto path = std::filesystem::temp_directory_path() / "sd_formats_test.txt";
    write_text(path, "hello\n");
    CHECK(read_text(path) == "hello\n");
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_text(path), IoError);
}
