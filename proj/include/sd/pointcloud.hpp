#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <vector>

#include "sd/geometry.hpp"
#include "sd/grid.hpp"

namespace sd {

inline constexpr int kGroundClass = 2;

struct Point {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    int cls = 1;
    // Spectral bands on the 8-bit scale; meaningful only when the cloud has_spectral.
    float r = 0.0f, g = 0.0f, b = 0.0f, nir = 0.0f;
};

struct PointCloud {
    std::vector<Point> points;
    bool has_spectral = false;
    bool normalized = false;

    std::vector<Point> ground() const;
};

/// Point CSV with header "x,y,z,class" or "x,y,z,class,r,g,b,nir".
PointCloud read_points(std::istream& source);
PointCloud load_points(const std::filesystem::path& path);
void write_points(const PointCloud& cloud, std::ostream& sink);
void save_points(const PointCloud& cloud, const std::filesystem::path& path);

struct IdwOptions {
    std::size_t k = 10;
    double power = 2.0;
};

/// Height normalization: z minus the k-NN inverse-distance-weighted ground
/// elevation (2-D distances). A neighbor closer than 1e-9 m supplies the
/// ground elevation directly. Ground points are taken from `ground_source`,
/// which may be a different cloud than the one being normalized.
PointCloud normalize_heights(const PointCloud& cloud, const PointCloud& ground_source, const IdwOptions& opt = {});
PointCloud normalize_heights(const PointCloud& cloud, const IdwOptions& opt = {});

/// The 9 positions a point contributes under sub-circle replication: the
/// point itself plus 8 replicas at 0, 45, ..., 315 degrees on the circle.
std::vector<Vec2> subcircle_replicas(double x, double y, double radius);

/// Canopy height raster: per-cell maximum height over sub-circle replicas.
/// Cells that receive no replica are nodata.
GeoGrid rasterize_canopy_p2r(const PointCloud& cloud, const GridSpec& spec, double subcircle_radius = 0.15);

/// Nodata and negatives to 0, clamp to [0, cap], divide by cap.
GeoGrid finalize_height_grid(const GeoGrid& grid, double cap = 50.0);

/// Linear interpolation over the Delaunay triangulation of a cloud's ground
/// points; nearest ground elevation outside the hull. Lookups reuse a walk
/// hint, so one instance must not be queried from several threads at once.
class TinSurface {
  public:
    explicit TinSurface(const PointCloud& cloud);
    ~TinSurface();
    TinSurface(TinSurface&&) noexcept;
    double elevation(const Vec2& q) const;
    bool inside_hull(const Vec2& q) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// TIN terrain raster from ground points: linear interpolation inside the
/// Delaunay hull, nearest ground elevation outside it, negatives set to 0.
GeoGrid rasterize_terrain_tin(const PointCloud& cloud, const GridSpec& spec);

/// Per-cell band means, then iterative 3x3 mean gap filling. Cells still
/// empty once a pass fills nothing become 0.
GeoGrid rasterize_spectral(const PointCloud& cloud, const GridSpec& spec, int fill_kernel = 3);

} // namespace sd
