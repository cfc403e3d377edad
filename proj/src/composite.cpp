#include "sd/composite.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace sd {

std::string to_string(Combo combo) {
    switch (combo) {
    case Combo::RgbiAls: return "RGBI-ALS";
    case Combo::RgbiDap: return "RGBI-DAP";
    case Combo::RgbiDapDtm: return "RGBI-DAP-DTM";
    }
    return "?";
}

Combo combo_from_string(const std::string& name) {
    if (name == "RGBI-ALS") return Combo::RgbiAls;
    if (name == "RGBI-DAP") return Combo::RgbiDap;
    if (name == "RGBI-DAP-DTM") return Combo::RgbiDapDtm;
    throw ArgumentError("unknown combo '" + name + "' (expected RGBI-ALS, RGBI-DAP or RGBI-DAP-DTM)");
}

GeoGrid scale_channel(const GeoGrid& grid, ChannelKind kind, double dtm_max) {
    if (!(dtm_max > 0.0)) throw ArgumentError("dtm_max must be > 0");
    GeoGrid out(grid.spec(), grid.channels(), DType::F32, grid.channel_names());
    const std::size_t n = grid.spec().pixel_count();
    const auto& mask = grid.nodata_mask();
    for (std::size_t i = 0; i < grid.values().size(); ++i) {
        double v = grid.values()[i];
        if ((mask && (*mask)[i % n]) || !std::isfinite(v)) v = 0.0;
        switch (kind) {
        case ChannelKind::Spectral: v = std::clamp(v / kSpectralMax, 0.0, 1.0); break;
        case ChannelKind::Chm: v = std::clamp(v, 0.0, kChmCap) / kChmCap; break;
        case ChannelKind::Dtm: v = std::clamp(v, 0.0, dtm_max) / dtm_max; break;
        }
        out.values()[i] = static_cast<float>(v);
    }
    return out;
}

namespace {

void require_aligned(const GridSpec& a, const GridSpec& b, const char* what) {
    auto fail = [&](const char* field) {
        throw AlignmentError(std::string(what) + " grid differs from spectral grid in " + field);
    };
    if (a.origin_x != b.origin_x) fail("origin_x");
    if (a.origin_y != b.origin_y) fail("origin_y");
    if (a.cell_size != b.cell_size) fail("cell_size");
    if (a.width != b.width) fail("width");
    if (a.height != b.height) fail("height");
}

void require_unit_range(const GeoGrid& g, const char* what) {
    for (float v : g.values()) {
        if (!(v >= 0.0f && v <= 1.0f)) throw ArgumentError(std::string(what) + " is not scaled to [0, 1]");
    }
}

} // namespace

Composite stack(const GeoGrid& spectral, const GeoGrid& chm, const std::optional<GeoGrid>& dtm,
                CanopySource source) {
    if (spectral.channels() != 4) throw ArgumentError("spectral input must have 4 channels (R, G, B, NIR)");
    if (chm.channels() != 1) throw ArgumentError("CHM input must have 1 channel");
    require_aligned(spectral.spec(), chm.spec(), "CHM");
    if (dtm) {
        if (dtm->channels() != 1) throw ArgumentError("DTM input must have 1 channel");
        require_aligned(spectral.spec(), dtm->spec(), "DTM");
    }
    require_unit_range(spectral, "spectral input");
    require_unit_range(chm, "CHM input");
    if (dtm) require_unit_range(*dtm, "DTM input");

    Composite comp;
    comp.combo = dtm ? Combo::RgbiDapDtm : (source == CanopySource::Als ? Combo::RgbiAls : Combo::RgbiDap);
    std::vector<std::string> names{"r", "g", "b", "nir", "chm"};
    if (dtm) names.push_back("dtm");
    comp.grid = GeoGrid(spectral.spec(), channel_count(comp.combo), DType::F32, names);
    auto put = [&](std::uint16_t c, std::span<const float> src) {
        auto dst = comp.grid.channel(c);
        std::copy(src.begin(), src.end(), dst.begin());
    };
    for (std::uint16_t c = 0; c < 4; ++c) put(c, spectral.channel(c));
    put(4, chm.channel(0));
    if (dtm) put(5, dtm->channel(0));
    return comp;
}

std::vector<Tile> make_tiles(const GridSpec& spec, std::uint32_t tile_px, double min_coverage) {
    spec.validate();
    if (tile_px < 1) throw ArgumentError("tile size must be >= 1 pixel");
    if (!(min_coverage >= 0.0 && min_coverage <= 1.0)) throw ArgumentError("min_coverage must lie in [0, 1]");
    const std::uint32_t rows = (spec.height + tile_px - 1) / tile_px;
    const std::uint32_t cols = (spec.width + tile_px - 1) / tile_px;
    std::vector<Tile> tiles;
    int next_id = 0;
    for (std::uint32_t r = 0; r < rows; ++r) {
        for (std::uint32_t c = 0; c < cols; ++c) {
            Tile t;
            t.lattice_row = r;
            t.lattice_col = c;
            t.window = {static_cast<std::int64_t>(r) * tile_px, static_cast<std::int64_t>(c) * tile_px, tile_px, tile_px};
            const std::uint64_t in_rows = std::min<std::uint64_t>(tile_px, spec.height - r * tile_px);
            const std::uint64_t in_cols = std::min<std::uint64_t>(tile_px, spec.width - c * tile_px);
            t.coverage = static_cast<double>(in_rows * in_cols) / (static_cast<double>(tile_px) * tile_px);
            if (t.coverage < min_coverage) continue;
            t.id = next_id++;
            tiles.push_back(t);
        }
    }
    return tiles;
}

Rect tile_rect(const GridSpec& spec, const GridWindow& w) {
    const double x0 = spec.origin_x + static_cast<double>(w.col0) * spec.cell_size;
    const double y1 = spec.origin_y - static_cast<double>(w.row0) * spec.cell_size;
    return {x0, y1 - w.n_rows * spec.cell_size, x0 + w.n_cols * spec.cell_size, y1};
}

int assign_municipality(const Tile& tile, const GridSpec& spec, const std::vector<Municipality>& municipalities) {
    const Rect rect = tile_rect(spec, tile.window);
    const double tol = 1e-9 * rect.area();
    int best_id = -1;
    double best_area = 0.0;
    for (const auto& m : municipalities) {
        const double a = overlap_area(m.polygon, rect);
        if (a <= tol) continue;
        if (best_id < 0 || a > best_area + tol || (std::abs(a - best_area) <= tol && m.id < best_id)) {
            best_id = m.id;
            best_area = a;
        }
    }
    if (best_id < 0) throw AssignmentError("tile " + std::to_string(tile.id) + " overlaps no municipality");
    return best_id;
}

void assign_municipalities(std::vector<Tile>& tiles, const GridSpec& spec,
                           const std::vector<Municipality>& municipalities) {
    for (auto& t : tiles) t.municipality = assign_municipality(t, spec, municipalities);
}

bool is_validation(std::uint32_t row, std::uint32_t col, const ValidationPattern& p) {
    const auto rr = (row + p.period - p.offset.first % p.period) % p.period;
    const auto cc = (col + p.period - p.offset.second % p.period) % p.period;
    return rr < 2 && cc < 2;
}

void assign_splits(std::vector<Tile>& tiles, const ValidationPattern& pattern) {
    if (pattern.period < 3) throw ArgumentError("validation period must be >= 3");
    for (auto& t : tiles)
        t.split = is_validation(t.lattice_row, t.lattice_col, pattern) ? Split::Validation : Split::Train;
}

FoldPlan plan_folds(const std::vector<Tile>& tiles_in, const ValidationPattern& pattern) {
    std::vector<Tile> tiles = tiles_in;
    assign_splits(tiles, pattern);
    std::set<int> ids;
    for (const auto& t : tiles) {
        if (t.municipality < 0)
            throw PreconditionError("tile " + std::to_string(t.id) + " has no municipality assigned");
        ids.insert(t.municipality);
    }
    if (ids.size() < 2) throw PreconditionError("fold planning needs at least 2 municipalities");
    FoldPlan plan;
    for (int m : ids) {
        Fold f;
        f.test_municipality = m;
        for (const auto& t : tiles) {
            if (t.municipality == m)
                f.test.push_back(t.id);
            else if (t.split == Split::Validation)
                f.val.push_back(t.id);
            else
                f.train.push_back(t.id);
        }
        plan.folds.push_back(std::move(f));
    }
    return plan;
}

TileData cut_tile(const GeoGrid& image, const GeoGrid* labels, const GridWindow& w) {
    if (labels && !(labels->spec() == image.spec())) throw AlignmentError("label grid does not match image grid");
    GridSpec spec = image.spec();
    spec.origin_x += static_cast<double>(w.col0) * spec.cell_size;
    spec.origin_y -= static_cast<double>(w.row0) * spec.cell_size;
    spec.width = w.n_cols;
    spec.height = w.n_rows;
    TileData out{GeoGrid(spec, image.channels(), DType::F32, image.channel_names()), std::nullopt,
                 std::vector<std::uint8_t>(spec.pixel_count(), 0)};
    if (labels) out.labels = GeoGrid(spec, 1, DType::U8, labels->channel_names());
    const auto& g = image.spec();
    for (std::uint32_t r = 0; r < w.n_rows; ++r) {
        const std::int64_t sr = w.row0 + r;
        if (sr < 0 || sr >= g.height) continue;
        for (std::uint32_t c = 0; c < w.n_cols; ++c) {
            const std::int64_t sc = w.col0 + c;
            if (sc < 0 || sc >= g.width) continue;
            const auto ur = static_cast<std::uint32_t>(sr), uc = static_cast<std::uint32_t>(sc);
            for (std::uint16_t ch = 0; ch < image.channels(); ++ch) out.image.at(ch, r, c) = image.at(ch, ur, uc);
            bool ok = !image.is_nodata(ur, uc);
            if (labels) {
                out.labels->at(0, r, c) = labels->at(0, ur, uc);
                ok = ok && !labels->is_nodata(ur, uc);
            }
            out.valid[static_cast<std::size_t>(r) * w.n_cols + c] = ok ? 1 : 0;
        }
    }
    return out;
}

} // namespace sd
