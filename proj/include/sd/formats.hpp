#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sd/composite.hpp"
#include "sd/grid.hpp"
#include "sd/metrics.hpp"
#include "sd/refmask.hpp"
#include "sd/vectorize.hpp"

namespace sd {

/// Grid description: {"origin_x", "origin_y", "cell_size", "width", "height"}.
std::string grid_spec_json(const GridSpec& spec);
GridSpec parse_grid_spec(const std::string& text);
GridSpec load_grid_spec(const std::filesystem::path& path);

/// Stand map {"stands": [{"id", "class", "exterior", "holes"}]}.
std::string stands_json(const std::vector<StandPolygon>& stands);
std::vector<StandPolygon> parse_stands(const std::string& text);

/// {"municipalities": [{"id", "exterior", "holes"}]}.
std::string municipalities_json(const std::vector<Municipality>& munis);
std::vector<Municipality> parse_municipalities(const std::string& text);

struct TileSet {
    GridSpec grid;
    std::uint32_t tile_px = 512;
    ValidationPattern pattern;
    std::vector<Tile> tiles;
};
std::string tiles_json(const TileSet& set);
TileSet parse_tiles(const std::string& text);

/// {"folds": [{"test_municipality", "train", "val", "test"}]}.
std::string fold_plan_json(const FoldPlan& plan);
FoldPlan parse_fold_plan(const std::string& text);

std::string report_json(const MetricReport& report);
/// Flat table: one header row and one value row.
std::string report_csv(const MetricReport& report);

/// Vectorized stands with area_m2, shape_index and flag per stand.
std::string stand_polygons_json(const std::vector<StandOutPolygon>& polys);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace sd
