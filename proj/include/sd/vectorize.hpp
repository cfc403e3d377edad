#pragma once

#include <cstdint>
#include <vector>

#include "sd/geometry.hpp"
#include "sd/grid.hpp"

namespace sd {

/// Horizontal pixel run [col0, col0 + length) on one row.
struct PixelRun {
    std::uint32_t row = 0;
    std::uint32_t col0 = 0;
    std::uint32_t length = 0;
    bool operator==(const PixelRun&) const = default;
};

struct Region {
    int id = 0;
    int dev_class = 0;
    std::size_t pixel_count = 0;
    double area_m2 = 0.0;
    std::vector<PixelRun> runs;
    bool flagged = false; ///< undersized with no neighbor to absorb it
};

/// Connected regions plus the per-pixel region id (-1 for masked pixels).
struct RegionMap {
    GridSpec spec;
    int connectivity = 4;
    std::vector<std::int32_t> labels;
    std::vector<Region> regions; ///< ascending id

    const Region& region(int id) const;
};

/// Same-class connected components (4- or 8-connectivity). Ids follow the
/// row-major order of each region's first pixel. Pixels with valid == 0 are
/// left out.
RegionMap components(const GeoGrid& mask, int connectivity = 4, const std::vector<std::uint8_t>* valid = nullptr);

/// Class mask of a region map; masked pixels become nodata.
GeoGrid regions_to_mask(const RegionMap& map);

struct StandOutPolygon {
    int region_id = 0;
    int dev_class = 0;
    Polygon polygon;
    double area_m2 = 0.0;
    double perimeter_m = 0.0;
    double shape_index = 0.0; ///< perimeter^2 / (4 pi area)
    bool flag = false;
};

/// Pixel-edge boundary rings in map coordinates. Exteriors run counter-
/// clockwise, holes clockwise; collinear vertices are dropped. Where two
/// region pixels touch only at a corner the ring passes through the corner
/// twice under 4-connectivity and crosses it under 8-connectivity.
std::vector<StandOutPolygon> polygonize(const RegionMap& map);

struct MergeRecord {
    int absorbed = 0;
    int into = 0;
    double area_m2 = 0.0;
    double shared_boundary_m = 0.0;
};

/// Absorbs regions smaller than min_area_m2, smallest first (ties by id),
/// into the edge-sharing neighbor with the longest shared boundary (ties:
/// larger neighbor, then lower id). Absorbed pixels take the neighbor's
/// class. Undersized regions with no neighbor are kept and flagged.
std::vector<MergeRecord> mmu_filter(RegionMap& map, double min_area_m2 = 2000.0);

} // namespace sd
