#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sd/error.hpp"
#include "sd/geometry.hpp"
#include "sd/grid.hpp"

namespace sd {

enum class Combo { RgbiAls, RgbiDap, RgbiDapDtm };

std::string to_string(Combo combo);
Combo combo_from_string(const std::string& name);
inline std::uint16_t channel_count(Combo c) { return c == Combo::RgbiDapDtm ? 6 : 5; }

/// Channels R, G, B, NIR, CHM[, DTM], all in [0, 1].
struct Composite {
    GeoGrid grid;
    Combo combo = Combo::RgbiAls;
};

enum class ChannelKind { Spectral, Chm, Dtm };

inline constexpr double kSpectralMax = 255.0;
inline constexpr double kChmCap = 50.0;
inline constexpr double kDtmMax = 375.0;

/// spectral: v / 255; chm: clamp(v, 0, 50) / 50; dtm: clamp(v, 0, dtm_max) / dtm_max.
/// Nodata pixels become 0 and the mask is dropped.
GeoGrid scale_channel(const GeoGrid& grid, ChannelKind kind, double dtm_max = kDtmMax);

enum class CanopySource { Als, Dap };

/// Stacks scaled inputs into a 5- or 6-channel composite. A DTM forces the
/// RGBI-DAP-DTM combination.
Composite stack(const GeoGrid& spectral, const GeoGrid& chm, const std::optional<GeoGrid>& dtm,
                CanopySource source = CanopySource::Als);

enum class Split { Train, Validation };

struct Tile {
    int id = 0;
    std::uint32_t lattice_row = 0;
    std::uint32_t lattice_col = 0;
    GridWindow window;     ///< may extend past the grid on the south/east edges
    int municipality = -1; ///< -1 = unassigned
    Split split = Split::Train;
    double coverage = 1.0; ///< fraction of the window inside the grid
};

/// Square lattice anchored at the grid origin. Edge tiles are padded windows;
/// tiles below min_coverage are dropped; ids run row-major over kept tiles.
std::vector<Tile> make_tiles(const GridSpec& spec, std::uint32_t tile_px = 512, double min_coverage = 0.0);

/// Map-coordinate square covered by a tile window.
Rect tile_rect(const GridSpec& spec, const GridWindow& window);

struct Municipality {
    int id = 0;
    Polygon polygon;
};

class AssignmentError : public Error {
  public:
    using Error::Error;
};

/// Id of the municipality with the largest overlap with the tile square;
/// ties (within 1e-9 of the tile area) go to the smallest id.
int assign_municipality(const Tile& tile, const GridSpec& spec, const std::vector<Municipality>& municipalities);
void assign_municipalities(std::vector<Tile>& tiles, const GridSpec& spec,
                           const std::vector<Municipality>& municipalities);

struct ValidationPattern {
    std::uint32_t period = 5;
    std::pair<std::uint32_t, std::uint32_t> offset{0, 0}; ///< (row, col)
};

/// True when a lattice position falls inside the 2x2 validation cluster of its period block.
bool is_validation(std::uint32_t lattice_row, std::uint32_t lattice_col, const ValidationPattern& pattern);
void assign_splits(std::vector<Tile>& tiles, const ValidationPattern& pattern);

struct Fold {
    int test_municipality = 0;
    std::vector<int> train;
    std::vector<int> val;
    std::vector<int> test;
};

struct FoldPlan {
    std::vector<Fold> folds;
};

/// One fold per municipality (ascending id): test = its tiles, train/val =
/// the remaining tiles split by the global validation pattern.
FoldPlan plan_folds(const std::vector<Tile>& tiles, const ValidationPattern& pattern = {});

/// Pixel data of a tile window. Out-of-grid pixels are zero and flagged in `valid`.
struct TileData {
    GeoGrid image;                    ///< composite channels
    std::optional<GeoGrid> labels;    ///< class codes, when a mask was supplied
    std::vector<std::uint8_t> valid;  ///< 1 where the pixel is in-grid and not nodata
};

TileData cut_tile(const GeoGrid& image, const GeoGrid* labels, const GridWindow& window);

} // namespace sd
