#include "sd/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <queue>
#include <unordered_map>

#include "sd/error.hpp"

namespace sd {

const Region& RegionMap::region(int id) const {
    auto it = std::lower_bound(regions.begin(), regions.end(), id, [](const Region& r, int v) { return r.id < v; });
    if (it == regions.end() || it->id != id) throw ArgumentError("no region with id " + std::to_string(id));
    return *it;
}

namespace {

/// Rebuilds run lists and pixel counts from the label raster.
void rebuild_regions(RegionMap& map, const std::vector<int>& classes) {
    const std::uint32_t W = map.spec.width, H = map.spec.height;
    const double cell_area = map.spec.cell_size * map.spec.cell_size;
    std::map<int, Region> by_id;
    for (std::uint32_t r = 0; r < H; ++r) {
        std::uint32_t c = 0;
        while (c < W) {
            const std::int32_t id = map.labels[static_cast<std::size_t>(r) * W + c];
            std::uint32_t e = c + 1;
            while (e < W && map.labels[static_cast<std::size_t>(r) * W + e] == id) ++e;
            if (id >= 0) {
                Region& reg = by_id[id];
                reg.id = id;
                reg.dev_class = classes[id];
                reg.runs.push_back({r, c, e - c});
                reg.pixel_count += e - c;
            }
            c = e;
        }
    }
    std::vector<Region> out;
    out.reserve(by_id.size());
    for (auto& [id, reg] : by_id) {
        reg.area_m2 = static_cast<double>(reg.pixel_count) * cell_area;
        out.push_back(std::move(reg));
    }
    map.regions = std::move(out);
}

} // namespace

RegionMap components(const GeoGrid& mask, int connectivity, const std::vector<std::uint8_t>* valid) {
    if (connectivity != 4 && connectivity != 8) throw ArgumentError("connectivity must be 4 or 8");
    if (mask.channels() != 1) throw ShapeError("class mask must have one channel");
    const std::uint32_t W = mask.width(), H = mask.height();
    const std::size_t n = mask.spec().pixel_count();
    if (valid && valid->size() != n) throw ShapeError("valid mask size differs from the class mask");

    RegionMap map;
    map.spec = mask.spec();
    map.connectivity = connectivity;
    map.labels.assign(n, -1);
    auto usable = [&](std::size_t i, std::uint32_t r, std::uint32_t c) {
        return (!valid || (*valid)[i]) && !mask.is_nodata(r, c);
    };
    std::vector<int> classes;
    std::vector<std::size_t> stack;
    for (std::uint32_t r = 0; r < H; ++r) {
        for (std::uint32_t c = 0; c < W; ++c) {
            const std::size_t start = static_cast<std::size_t>(r) * W + c;
            if (map.labels[start] >= 0 || !usable(start, r, c)) continue;
            const int id = static_cast<int>(classes.size());
            const float cls = mask.values()[start];
            classes.push_back(static_cast<int>(cls));
            map.labels[start] = id;
            stack.assign(1, start);
            while (!stack.empty()) {
                const std::size_t i = stack.back();
                stack.pop_back();
                const auto pr = static_cast<std::int64_t>(i / W), pc = static_cast<std::int64_t>(i % W);
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        if ((dr == 0 && dc == 0) || (connectivity == 4 && dr != 0 && dc != 0)) continue;
                        const std::int64_t nr = pr + dr, nc = pc + dc;
                        if (nr < 0 || nc < 0 || nr >= H || nc >= W) continue;
                        const std::size_t j = static_cast<std::size_t>(nr) * W + static_cast<std::size_t>(nc);
                        if (map.labels[j] >= 0 || mask.values()[j] != cls ||
                            !usable(j, static_cast<std::uint32_t>(nr), static_cast<std::uint32_t>(nc)))
                            continue;
                        map.labels[j] = id;
                        stack.push_back(j);
                    }
                }
            }
        }
    }
    rebuild_regions(map, classes);
    return map;
}

GeoGrid regions_to_mask(const RegionMap& map) {
    GeoGrid mask(map.spec, 1, DType::U8, {"class"});
    bool any_masked = false;
    std::vector<std::uint8_t> nodata(map.spec.pixel_count(), 1);
    for (const Region& reg : map.regions) {
        for (const PixelRun& run : reg.runs) {
            for (std::uint32_t c = run.col0; c < run.col0 + run.length; ++c) {
                mask.at(0, run.row, c) = static_cast<float>(reg.dev_class);
                nodata[static_cast<std::size_t>(run.row) * map.spec.width + c] = 0;
            }
        }
    }
    for (auto v : nodata) any_masked |= v != 0;
    if (any_masked) mask.set_nodata_mask(std::move(nodata));
    return mask;
}

namespace {

struct Corner {
    std::int64_t col, row;
    bool operator==(const Corner&) const = default;
};

struct Edge {
    Corner from, to;
};

// Direction index: 0 east, 1 south, 2 west, 3 north (corner space, rows grow southward).
int direction(const Edge& e) {
    if (e.to.col > e.from.col) return 0;
    if (e.to.row > e.from.row) return 1;
    if (e.to.col < e.from.col) return 2;
    return 3;
}

/// Traces all rings of one region from its directed boundary edges.
std::vector<std::vector<Corner>> trace_rings(const std::vector<Edge>& edges, std::int64_t stride, int connectivity) {
    std::unordered_multimap<std::int64_t, std::size_t> outgoing;
    outgoing.reserve(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) outgoing.emplace(edges[i].from.row * stride + edges[i].from.col, i);
    std::vector<char> used(edges.size(), 0);
    std::vector<std::vector<Corner>> rings;
    for (std::size_t s = 0; s < edges.size(); ++s) {
        if (used[s]) continue;
        std::vector<Corner> ring;
        std::size_t cur = s;
        while (true) {
            used[cur] = 1;
            ring.push_back(edges[cur].from);
            const Corner at = edges[cur].to;
            const int din = direction(edges[cur]);
            std::size_t next = edges.size();
            int best_rank = 4;
            auto [lo, hi] = outgoing.equal_range(at.row * stride + at.col);
            for (auto it = lo; it != hi; ++it) {
                if (used[it->second] && it->second != s) continue;
                // Rank turns: under 4-connectivity prefer left, under 8 prefer right.
                const int turn = (direction(edges[it->second]) - din + 4) % 4; // 1 right, 3 left, 0 straight
                const int rank = connectivity == 4 ? (turn == 3 ? 0 : turn == 0 ? 1 : 2) : (turn == 1 ? 0 : turn == 0 ? 1 : 2);
                if (rank < best_rank) {
                    best_rank = rank;
                    next = it->second;
                }
            }
            if (next == edges.size()) throw GeometryError("open boundary while tracing region");
            if (next == s) break;
            cur = next;
        }
        // Drop collinear vertices.
        std::vector<Corner> simple;
        const std::size_t n = ring.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Corner& a = ring[(i + n - 1) % n];
            const Corner& b = ring[i];
            const Corner& c = ring[(i + 1) % n];
            const bool collinear = (b.col - a.col) * (c.row - b.row) == (b.row - a.row) * (c.col - b.col);
            if (!collinear) simple.push_back(b);
        }
        rings.push_back(std::move(simple));
    }
    return rings;
}

std::int64_t twice_area(const std::vector<Corner>& ring) {
    // Map y runs opposite to the row index, hence the sign flip.
    std::int64_t s = 0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const Corner& a = ring[i];
        const Corner& b = ring[(i + 1) % ring.size()];
        s += a.col * b.row - b.col * a.row;
    }
    return -s;
}

} // namespace

std::vector<StandOutPolygon> polygonize(const RegionMap& map) {
    const std::uint32_t W = map.spec.width, H = map.spec.height;
    std::unordered_map<int, std::size_t> index;
    for (std::size_t k = 0; k < map.regions.size(); ++k) index[map.regions[k].id] = k;
    std::vector<std::vector<Edge>> edges(map.regions.size());

    auto label = [&](std::int64_t r, std::int64_t c) -> std::int32_t {
        if (r < 0 || c < 0 || r >= H || c >= W) return -1;
        return map.labels[static_cast<std::size_t>(r) * W + static_cast<std::size_t>(c)];
    };
    for (std::int64_t r = 0; r < H; ++r) {
        for (std::int64_t c = 0; c < W; ++c) {
            const std::int32_t id = label(r, c);
            if (id < 0) continue;
            auto& list = edges[index.at(id)];
            // Region kept on the left in map orientation: counter-clockwise around each pixel.
            if (label(r, c - 1) != id) list.push_back({{c, r}, {c, r + 1}});
            if (label(r + 1, c) != id) list.push_back({{c, r + 1}, {c + 1, r + 1}});
            if (label(r, c + 1) != id) list.push_back({{c + 1, r + 1}, {c + 1, r}});
            if (label(r - 1, c) != id) list.push_back({{c + 1, r}, {c, r}});
        }
    }

    const double cs = map.spec.cell_size;
    auto to_map = [&](const std::vector<Corner>& ring) {
        Ring out;
        out.reserve(ring.size() + 1);
        for (const Corner& k : ring)
            out.push_back({map.spec.origin_x + static_cast<double>(k.col) * cs,
                           map.spec.origin_y - static_cast<double>(k.row) * cs});
        out.push_back(out.front());
        return out;
    };

    std::vector<StandOutPolygon> result;
    result.reserve(map.regions.size());
    for (std::size_t k = 0; k < map.regions.size(); ++k) {
        const Region& reg = map.regions[k];
        StandOutPolygon sp;
        sp.region_id = reg.id;
        sp.dev_class = reg.dev_class;
        sp.flag = reg.flagged;
        sp.area_m2 = reg.area_m2;
        std::int64_t perimeter_edges = static_cast<std::int64_t>(edges[k].size());
        bool have_exterior = false;
        for (auto& ring : trace_rings(edges[k], static_cast<std::int64_t>(W) + 1, map.connectivity)) {
            if (twice_area(ring) > 0) {
                if (have_exterior) throw GeometryError("region " + std::to_string(reg.id) + " has several exteriors");
                sp.polygon.exterior = to_map(ring);
                have_exterior = true;
            } else {
                sp.polygon.holes.push_back(to_map(ring));
            }
        }
        sp.perimeter_m = static_cast<double>(perimeter_edges) * cs;
        sp.shape_index = sp.perimeter_m * sp.perimeter_m / (4.0 * std::numbers::pi * sp.area_m2);
        result.push_back(std::move(sp));
    }
    return result;
}

std::vector<MergeRecord> mmu_filter(RegionMap& map, double min_area_m2) {
    if (!(min_area_m2 >= 0.0)) throw ArgumentError("min_area_m2 must be >= 0");
    const std::uint32_t W = map.spec.width, H = map.spec.height;
    const double cs = map.spec.cell_size;
    const double cell_area = cs * cs;

    int max_id = -1;
    for (const Region& r : map.regions) max_id = std::max(max_id, r.id);
    const std::size_t n = static_cast<std::size_t>(max_id + 1);
    std::vector<std::size_t> pixels(n, 0);
    std::vector<int> classes(n, 0);
    std::vector<char> alive(n, 0), flagged(n, 0);
    for (const Region& r : map.regions) {
        pixels[r.id] = r.pixel_count;
        classes[r.id] = r.dev_class;
        alive[r.id] = 1;
        flagged[r.id] = r.flagged;
    }

    // Shared boundary lengths in pixel edges.
    std::vector<std::map<int, std::int64_t>> shared(n);
    for (std::uint32_t r = 0; r < H; ++r) {
        for (std::uint32_t c = 0; c < W; ++c) {
            const std::int32_t a = map.labels[static_cast<std::size_t>(r) * W + c];
            if (a < 0) continue;
            if (c + 1 < W) {
                const std::int32_t b = map.labels[static_cast<std::size_t>(r) * W + c + 1];
                if (b >= 0 && b != a) ++shared[a][b], ++shared[b][a];
            }
            if (r + 1 < H) {
                const std::int32_t b = map.labels[static_cast<std::size_t>(r + 1) * W + c];
                if (b >= 0 && b != a) ++shared[a][b], ++shared[b][a];
            }
        }
    }

    // Union-find style redirection from absorbed ids to their current owner.
    std::vector<int> owner(n);
    for (std::size_t i = 0; i < n; ++i) owner[i] = static_cast<int>(i);
    auto find = [&](int id) {
        while (owner[id] != id) id = owner[id] = owner[owner[id]];
        return id;
    };

    using Key = std::pair<std::size_t, int>; // (pixels, id), smallest first
    std::priority_queue<Key, std::vector<Key>, std::greater<>> queue;
    for (std::size_t id = 0; id < n; ++id)
        if (alive[id] && static_cast<double>(pixels[id]) * cell_area < min_area_m2) queue.push({pixels[id], static_cast<int>(id)});

    std::vector<MergeRecord> log;
    while (!queue.empty()) {
        const auto [px, id] = queue.top();
        queue.pop();
        if (!alive[id] || pixels[id] != px || flagged[id]) continue;
        if (static_cast<double>(px) * cell_area >= min_area_m2) continue;
        int target = -1;
        std::int64_t best_len = 0;
        for (const auto& [nb, len] : shared[id]) {
            const bool better = len > best_len ||
                                (len == best_len && target >= 0 &&
                                 (pixels[nb] > pixels[target] || (pixels[nb] == pixels[target] && nb < target)));
            if (target < 0 || better) {
                target = nb;
                best_len = len;
            }
        }
        if (target < 0) {
            flagged[id] = 1;
            continue;
        }
        log.push_back({id, target, static_cast<double>(px) * cell_area, static_cast<double>(best_len) * cs});
        owner[id] = target;
        alive[id] = 0;
        pixels[target] += px;
        pixels[id] = 0;
        for (const auto& [nb, len] : shared[id]) {
            shared[nb].erase(id);
            if (nb == target) continue;
            shared[nb][target] += len;
            shared[target][nb] += len;
        }
        shared[target].erase(id);
        shared[id].clear();
        if (static_cast<double>(pixels[target]) * cell_area < min_area_m2) queue.push({pixels[target], target});
    }

    for (auto& l : map.labels)
        if (l >= 0) l = find(l);
    rebuild_regions(map, classes);
    for (Region& r : map.regions) r.flagged = flagged[r.id] != 0;
    return log;
}

} // namespace sd
