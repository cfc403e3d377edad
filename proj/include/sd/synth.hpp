#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sd/composite.hpp"
#include "sd/grid.hpp"
#include "sd/pointcloud.hpp"
#include "sd/refmask.hpp"

namespace sd {

struct SceneSpec {
    std::uint64_t seed = 0;
    double width_m = 384.0;
    double height_m = 256.0;
    double origin_x = 500000.0; ///< west edge
    double origin_y = 6700000.0; ///< north edge
    double cell_size = 1.0;
    std::uint32_t n_stands = 96;
    std::array<double, kNumClasses> class_mix{0.2, 0.2, 0.2, 0.2, 0.2}; ///< by mask code
    double als_density = 5.0;  ///< points per m^2
    double dap_density = 25.0; ///< points per m^2
    double dap_smoothing_radius = 1.5;
    std::uint32_t municipality_cols = 3;
    std::uint32_t municipality_rows = 2;

    void validate() const;
    GridSpec grid() const;
};

struct Scene {
    GridSpec grid;
    PointCloud als; ///< x, y, z, class
    PointCloud dap; ///< with spectral bands
    std::vector<StandPolygon> stands;
    std::vector<Municipality> municipalities;
    GeoGrid true_mask; ///< nearest-site class per cell center
    std::vector<double> stand_heights; ///< target canopy height per stand
};

/// Deterministic synthetic scene. Stands are the Voronoi cells of sites on a
/// jittered lattice; codes follow a diagonal pattern pushed through the
/// class-mix CDF, so any 3x3 block of stands holds every class of a uniform
/// mix. Canopy heights per class: NF 0, I-II 0-9, III 8-14, IV 13-20,
/// V 18-30 m. The DAP cloud samples a moving-max smoothed canopy and carries
/// class-correlated spectra. Municipalities are a rectangular partition
/// whose cuts are offset from round tile sizes.
Scene generate_scene(const SceneSpec& spec);

/// Class height interval [lo, hi] for a mask code.
std::array<double, 2> class_height_range(int code);

} // namespace sd
