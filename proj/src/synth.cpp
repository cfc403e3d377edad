#include "sd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sd/error.hpp"
#include "sd/rng.hpp"

namespace sd {

void SceneSpec::validate() const {
    if (!(width_m > 0.0) || !(height_m > 0.0)) throw ArgumentError("scene extent must be positive");
    if (!(cell_size > 0.0)) throw ArgumentError("cell_size must be > 0");
    if (n_stands == 0) throw ArgumentError("scene needs at least one stand");
    if (!(als_density > 0.0) || !(dap_density > 0.0)) throw ArgumentError("point densities must be > 0");
    if (dap_smoothing_radius < 0.0) throw ArgumentError("dap_smoothing_radius must be >= 0");
    if (municipality_cols == 0 || municipality_rows == 0) throw ArgumentError("need at least one municipality");
    double sum = 0.0;
    for (double p : class_mix) {
        if (p < 0.0) throw ArgumentError("class proportions must be non-negative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ArgumentError("class proportions must sum to 1");
}

GridSpec SceneSpec::grid() const {
    GridSpec g;
    g.origin_x = origin_x;
    g.origin_y = origin_y;
    g.cell_size = cell_size;
    g.width = static_cast<std::uint32_t>(std::llround(width_m / cell_size));
    g.height = static_cast<std::uint32_t>(std::llround(height_m / cell_size));
    g.validate();
    return g;
}

std::array<double, 2> class_height_range(int code) {
    switch (code) {
    case 0: return {0.0, 0.0};
    case 1: return {0.0, 9.0};
    case 2: return {8.0, 14.0};
    case 3: return {13.0, 20.0};
    case 4: return {18.0, 30.0};
    default: throw DomainError("class code " + std::to_string(code) + " out of range");
    }
}

namespace {

constexpr double kFine = 0.25; // canopy raster resolution in meters

struct ClassLook {
    double spacing;      ///< mean tree spacing
    double crown_radius; ///< crown radius
    std::array<double, 4> color; ///< R, G, B, NIR
};

const std::array<ClassLook, kNumClasses> kLooks{{
    {0.0, 0.0, {150, 138, 115, 95}},
    {2.5, 1.3, {100, 128, 82, 175}},
    {3.5, 2.0, {72, 108, 66, 152}},
    {4.5, 2.6, {56, 92, 56, 136}},
    {6.0, 3.4, {42, 72, 46, 118}},
}};

/// Smooth low-relief terrain in local coordinates.
struct Terrain {
    double phase[4];
    explicit Terrain(Rng& rng) {
        for (double& p : phase) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    double operator()(double x, double y) const {
        constexpr double tau = 2.0 * std::numbers::pi;
        return 100.0 + 3.0 * std::sin(tau * x / 700.0 + phase[0]) * std::cos(tau * y / 650.0 + phase[1]) +
               1.5 * std::sin(tau * (x + y) / 900.0 + phase[2]) + 0.8 * std::cos(tau * (x - 0.5 * y) / 800.0 + phase[3]);
    }
};

struct SiteLattice {
    std::uint32_t nx = 1, ny = 1;
    double sx = 1.0, sy = 1.0;
    std::vector<Vec2> sites; // local coordinates, index j * nx + i

    /// Nearest site, ties to the lowest index.
    std::uint32_t nearest(double x, double y) const {
        const auto ci = static_cast<std::int64_t>(std::floor(x / sx));
        const auto cj = static_cast<std::int64_t>(std::floor(y / sy));
        std::uint32_t best = 0;
        double best_d = INFINITY;
        for (std::int64_t j = std::max<std::int64_t>(0, cj - 2); j <= std::min<std::int64_t>(ny - 1, cj + 2); ++j) {
            for (std::int64_t i = std::max<std::int64_t>(0, ci - 2); i <= std::min<std::int64_t>(nx - 1, ci + 2); ++i) {
                const auto k = static_cast<std::uint32_t>(j * nx + i);
                const double dx = x - sites[k].x, dy = y - sites[k].y;
                const double d = dx * dx + dy * dy;
                if (d < best_d || (d == best_d && k < best)) {
                    best_d = d;
                    best = k;
                }
            }
        }
        return best;
    }
};

/// Clip a convex polygon (open vertex list) to the half-plane n . p <= c.
std::vector<Vec2> clip_half_plane(const std::vector<Vec2>& poly, const Vec2& n, double c) {
    std::vector<Vec2> out;
    const std::size_t m = poly.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % m];
        const double fa = n.x * a.x + n.y * a.y - c;
        const double fb = n.x * b.x + n.y * b.y - c;
        if (fa <= 0.0) out.push_back(a);
        if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
            const double t = fa / (fa - fb);
            out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        }
    }
    return out;
}

int code_from_mix(double u, const std::array<double, kNumClasses>& mix) {
    double acc = 0.0;
    for (int k = 0; k < kNumClasses; ++k) {
        acc += mix[k];
        if (u < acc) return k;
    }
    for (int k = kNumClasses - 1; k >= 0; --k)
        if (mix[k] > 0.0) return k;
    return 0;
}

DevClass dev_class_for(int code, Rng& rng) {
    if (code == 1) return rng.below(2) == 0 ? DevClass::I : DevClass::II;
    return dev_class_from_code(code);
}

} // namespace

Scene generate_scene(const SceneSpec& spec) {
    spec.validate();
    const Rng root(spec.seed);
    Scene scene;
    scene.grid = spec.grid();
    const double W = spec.width_m, H = spec.height_m;

    // Stand sites and classes.
    Rng site_rng = root.split("sites");
    SiteLattice lat;
    lat.nx = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::lround(std::sqrt(spec.n_stands * W / H))));
    lat.ny = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::lround(static_cast<double>(spec.n_stands) / lat.nx)));
    lat.sx = W / lat.nx;
    lat.sy = H / lat.ny;
    for (std::uint32_t j = 0; j < lat.ny; ++j)
        for (std::uint32_t i = 0; i < lat.nx; ++i)
            lat.sites.push_back({(i + 0.5 + site_rng.uniform(-0.35, 0.35)) * lat.sx,
                                 (j + 0.5 + site_rng.uniform(-0.35, 0.35)) * lat.sy});
    const std::size_t n_sites = lat.sites.size();
    const auto shift = site_rng.below(5);
    std::vector<int> codes(n_sites);
    std::vector<double> heights(n_sites, 0.0);
    for (std::uint32_t j = 0; j < lat.ny; ++j) {
        for (std::uint32_t i = 0; i < lat.nx; ++i) {
            const double u = std::fmod((i + 2.0 * j + static_cast<double>(shift)) / 5.0 + 0.1, 1.0);
            const std::size_t k = static_cast<std::size_t>(j) * lat.nx + i;
            codes[k] = code_from_mix(u, spec.class_mix);
            const auto [lo, hi] = class_height_range(codes[k]);
            const double margin = 0.15 * (hi - lo);
            heights[k] = codes[k] == 0 ? 0.0 : site_rng.uniform(lo + margin, hi - margin);
        }
    }
    scene.stand_heights = heights;

    // Stand polygons in map coordinates (local y runs southward from the north edge).
    auto to_map = [&](const Vec2& p) { return Vec2{spec.origin_x + p.x, spec.origin_y - p.y}; };
    Rng class_rng = root.split("dev-class");
    for (std::size_t k = 0; k < n_sites; ++k) {
        std::vector<Vec2> cell{{0, 0}, {W, 0}, {W, H}, {0, H}};
        const Vec2 s = lat.sites[k];
        for (std::size_t o = 0; o < n_sites && !cell.empty(); ++o) {
            if (o == k) continue;
            const Vec2 t = lat.sites[o];
            const Vec2 n{t.x - s.x, t.y - s.y};
            const double c = 0.5 * ((t.x * t.x + t.y * t.y) - (s.x * s.x + s.y * s.y));
            cell = clip_half_plane(cell, n, c);
        }
        StandPolygon stand;
        stand.stand_id = static_cast<int>(k + 1);
        stand.dev_class = dev_class_for(codes[k], class_rng);
        Ring ring;
        for (const Vec2& p : cell) {
            const Vec2 q = to_map(p);
            if (ring.empty() || std::hypot(q.x - ring.back().x, q.y - ring.back().y) > 1e-9) ring.push_back(q);
        }
        while (ring.size() > 1 && std::hypot(ring.front().x - ring.back().x, ring.front().y - ring.back().y) <= 1e-9)
            ring.pop_back();
        if (ring.size() < 3) continue;
        ring.push_back(ring.front());
        if (signed_area(ring) < 0.0) std::reverse(ring.begin(), ring.end());
        stand.polygon.exterior = std::move(ring);
        scene.stands.push_back(std::move(stand));
    }

    // Reference mask by nearest site.
    const GridSpec& g = scene.grid;
    scene.true_mask = GeoGrid(g, 1, DType::U8, {"class"});
    for (std::uint32_t r = 0; r < g.height; ++r)
        for (std::uint32_t c = 0; c < g.width; ++c) {
            const double lx = g.center_x(c) - spec.origin_x;
            const double ly = spec.origin_y - g.center_y(r);
            scene.true_mask.at(0, r, c) = static_cast<float>(codes[lat.nearest(lx, ly)]);
        }

    // Municipalities: rectangular partition with cuts nudged off the even split.
    auto cuts = [](double extent, std::uint32_t n) {
        std::vector<double> v{0.0};
        for (std::uint32_t k = 1; k < n; ++k) {
            const double nudge = (k % 2 == 1 ? 1.0 : -1.0) * std::round(0.06 * extent / n);
            v.push_back(std::round(extent * k / n) + nudge);
        }
        v.push_back(extent);
        return v;
    };
    const auto xc = cuts(W, spec.municipality_cols);
    const auto yc = cuts(H, spec.municipality_rows);
    for (std::uint32_t mr = 0; mr < spec.municipality_rows; ++mr) {
        for (std::uint32_t mc = 0; mc < spec.municipality_cols; ++mc) {
            Municipality m;
            m.id = static_cast<int>(mr * spec.municipality_cols + mc);
            const Vec2 a = to_map({xc[mc], yc[mr + 1]}), b = to_map({xc[mc + 1], yc[mr]});
            m.polygon.exterior = {{a.x, a.y}, {b.x, a.y}, {b.x, b.y}, {a.x, b.y}, {a.x, a.y}};
            scene.municipalities.push_back(std::move(m));
        }
    }

    // Canopy surface on a fine raster.
    const auto fw = static_cast<std::uint32_t>(std::ceil(W / kFine));
    const auto fh = static_cast<std::uint32_t>(std::ceil(H / kFine));
    std::vector<std::uint32_t> fine_site(static_cast<std::size_t>(fw) * fh);
    for (std::uint32_t r = 0; r < fh; ++r)
        for (std::uint32_t c = 0; c < fw; ++c)
            fine_site[static_cast<std::size_t>(r) * fw + c] = lat.nearest((c + 0.5) * kFine, (r + 0.5) * kFine);
    std::vector<float> canopy(fine_site.size(), 0.0f);
    Rng tree_rng = root.split("trees");
    constexpr double kTreeLattice = 2.0;
    const auto tx = static_cast<std::uint32_t>(std::ceil(W / kTreeLattice));
    const auto ty = static_cast<std::uint32_t>(std::ceil(H / kTreeLattice));
    for (std::uint32_t j = 0; j < ty; ++j) {
        for (std::uint32_t i = 0; i < tx; ++i) {
            const double x = (i + 0.5) * kTreeLattice + tree_rng.uniform(-0.8, 0.8);
            const double y = (j + 0.5) * kTreeLattice + tree_rng.uniform(-0.8, 0.8);
            const double keep = tree_rng.uniform();
            const double hscale = tree_rng.uniform(0.85, 1.1);
            const double rscale = tree_rng.uniform(0.8, 1.2);
            if (x < 0 || y < 0 || x >= W || y >= H) continue;
            const std::uint32_t k = lat.nearest(x, y);
            const int code = codes[k];
            if (code == 0) continue;
            const ClassLook& look = kLooks[code];
            const double p_keep = std::min(1.0, (kTreeLattice / look.spacing) * (kTreeLattice / look.spacing));
            if (keep >= p_keep) continue;
            const auto [lo, hi] = class_height_range(code);
            const double th = std::clamp(heights[k] * hscale, std::max(lo, 0.5), hi);
            const double cr = look.crown_radius * rscale;
            const auto c0 = static_cast<std::int64_t>(std::floor((x - cr) / kFine));
            const auto c1 = static_cast<std::int64_t>(std::floor((x + cr) / kFine));
            const auto r0 = static_cast<std::int64_t>(std::floor((y - cr) / kFine));
            const auto r1 = static_cast<std::int64_t>(std::floor((y + cr) / kFine));
            for (std::int64_t r = std::max<std::int64_t>(0, r0); r <= std::min<std::int64_t>(fh - 1, r1); ++r) {
                for (std::int64_t c = std::max<std::int64_t>(0, c0); c <= std::min<std::int64_t>(fw - 1, c1); ++c) {
                    const std::size_t idx = static_cast<std::size_t>(r) * fw + static_cast<std::size_t>(c);
                    if (fine_site[idx] != k) continue;
                    const double dx = (c + 0.5) * kFine - x, dy = (r + 0.5) * kFine - y;
                    const double q = (dx * dx + dy * dy) / (cr * cr);
                    if (q > 1.0) continue;
                    const auto h = static_cast<float>(th * (1.0 - 0.6 * q));
                    canopy[idx] = std::max(canopy[idx], h);
                }
            }
        }
    }

    // DAP surface: moving maximum over a disc.
    std::vector<float> smooth = canopy;
    const auto rad = static_cast<std::int64_t>(std::floor(spec.dap_smoothing_radius / kFine));
    if (rad > 0) {
        std::vector<std::int64_t> half(rad + 1);
        for (std::int64_t d = 0; d <= rad; ++d)
            half[d] = static_cast<std::int64_t>(std::floor(std::sqrt(static_cast<double>(rad * rad - d * d))));
        for (std::int64_t r = 0; r < fh; ++r) {
            for (std::int64_t c = 0; c < fw; ++c) {
                float m = 0.0f;
                for (std::int64_t d = -rad; d <= rad; ++d) {
                    const std::int64_t rr = r + d;
                    if (rr < 0 || rr >= fh) continue;
                    const std::int64_t w = half[std::abs(d)];
                    const float* row = canopy.data() + static_cast<std::size_t>(rr) * fw;
                    for (std::int64_t cc = std::max<std::int64_t>(0, c - w); cc <= std::min<std::int64_t>(fw - 1, c + w); ++cc)
                        m = std::max(m, row[cc]);
                }
                smooth[static_cast<std::size_t>(r) * fw + static_cast<std::size_t>(c)] = m;
            }
        }
    }

    Rng terrain_rng = root.split("terrain");
    const Terrain terrain(terrain_rng);
    auto fine_index = [&](double x, double y) {
        const auto c = std::min<std::uint32_t>(fw - 1, static_cast<std::uint32_t>(x / kFine));
        const auto r = std::min<std::uint32_t>(fh - 1, static_cast<std::uint32_t>(y / kFine));
        return static_cast<std::size_t>(r) * fw + c;
    };

    // ALS: first returns on the canopy, partial penetration to the ground.
    Rng als_rng = root.split("als");
    const auto n_als = static_cast<std::size_t>(std::llround(spec.als_density * W * H));
    scene.als.points.reserve(n_als);
    for (std::size_t i = 0; i < n_als; ++i) {
        const double x = als_rng.uniform(0.0, W), y = als_rng.uniform(0.0, H);
        const double u = als_rng.uniform();
        const double noise = 0.05 * als_rng.normal();
        const double gz = terrain(x, y);
        const float h = canopy[fine_index(x, y)];
        Point p;
        const Vec2 m = to_map({x, y});
        p.x = m.x;
        p.y = m.y;
        if (h > 0.2f && u < 0.75) {
            p.z = gz + h + noise;
            p.cls = 1;
        } else {
            p.z = gz;
            p.cls = kGroundClass;
        }
        scene.als.points.push_back(p);
    }

    // Per-stand spectral signature.
    Rng look_rng = root.split("spectra");
    std::vector<std::array<double, 4>> stand_color(n_sites);
    for (std::size_t k = 0; k < n_sites; ++k)
        for (int b = 0; b < 4; ++b) stand_color[k][b] = kLooks[codes[k]].color[b] + 6.0 * look_rng.normal();

    // DAP: smoothed surface with spectra; ground only where the surface is open.
    Rng dap_rng = root.split("dap");
    const auto n_dap = static_cast<std::size_t>(std::llround(spec.dap_density * W * H));
    scene.dap.has_spectral = true;
    scene.dap.points.reserve(n_dap);
    const auto& ground_color = kLooks[0].color;
    for (std::size_t i = 0; i < n_dap; ++i) {
        const double x = dap_rng.uniform(0.0, W), y = dap_rng.uniform(0.0, H);
        const double n_z = dap_rng.normal();
        double n_b[4];
        for (double& v : n_b) v = dap_rng.normal();
        const std::size_t fi = fine_index(x, y);
        const std::uint32_t k = fine_site[fi];
        const double hs = smooth[fi];
        const double gz = terrain(x, y);
        Point p;
        const Vec2 m = to_map({x, y});
        p.x = m.x;
        p.y = m.y;
        std::array<double, 4> col;
        if (hs > 0.3) {
            p.z = gz + hs + 0.15 * n_z;
            p.cls = 1;
            const double lit = 0.85 + 0.15 * std::clamp(static_cast<double>(canopy[fi]) / hs, 0.0, 1.0);
            for (int b = 0; b < 4; ++b) col[b] = stand_color[k][b] * lit;
        } else {
            p.z = gz + 0.02 * n_z;
            p.cls = kGroundClass;
            const double w = codes[k] == 0 ? 1.0 : 0.5;
            for (int b = 0; b < 4; ++b) col[b] = w * stand_color[k][b] + (1.0 - w) * ground_color[b];
        }
        for (int b = 0; b < 4; ++b) col[b] = std::clamp(std::round(col[b] + 10.0 * n_b[b]), 0.0, 255.0);
        p.r = static_cast<float>(col[0]);
        p.g = static_cast<float>(col[1]);
        p.b = static_cast<float>(col[2]);
        p.nir = static_cast<float>(col[3]);
        scene.dap.points.push_back(p);
    }
    return scene;
}

} // namespace sd
