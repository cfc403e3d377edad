#include "sd/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "sd/error.hpp"

namespace sd {

namespace {

// > 0 when d lies strictly inside the circumcircle of counter-clockwise (a, b, c).
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;
    return ad * (bdx * cdy - cdx * bdy) + bd * (cdx * ady - adx * cdy) + cd * (adx * bdy - bdx * ady);
}

} // namespace

Delaunay::Delaunay(const std::vector<Vec2>& points) {
    std::vector<std::uint32_t> order(points.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return points[a].x < points[b].x || (points[a].x == points[b].x && points[a].y < points[b].y);
    });
    order.erase(std::unique(order.begin(), order.end(),
                            [&](std::uint32_t a, std::uint32_t b) { return points[a] == points[b]; }),
                order.end());
    if (order.size() < 3) throw GeometryError("triangulation needs at least 3 distinct points");

    Rect box{1e300, 1e300, -1e300, -1e300};
    for (auto i : order) {
        box.xmin = std::min(box.xmin, points[i].x);
        box.ymin = std::min(box.ymin, points[i].y);
        box.xmax = std::max(box.xmax, points[i].x);
        box.ymax = std::max(box.ymax, points[i].y);
    }
    shift_ = {0.5 * (box.xmin + box.xmax), 0.5 * (box.ymin + box.ymax)};

    n_real_ = static_cast<std::int32_t>(order.size());
    pts_.reserve(order.size() + 1);
    input_id_ = order;
    for (auto i : order) pts_.push_back({points[i].x - shift_.x, points[i].y - shift_.y});
    pts_.push_back({0.0, 0.0}); // placeholder for the vertex at infinity

    // seed triangle: the first two points and the first point off their line
    std::int32_t third = -1;
    for (std::int32_t v = 2; v < n_real_; ++v) {
        if (orient(pts_[0], pts_[1], pts_[v]) != 0.0) {
            third = v;
            break;
        }
    }
    if (third < 0) throw GeometryError("all triangulation points are collinear");

    std::int32_t a = 0, b = 1, c = third;
    if (orient(pts_[a], pts_[b], pts_[c]) < 0.0) std::swap(b, c);
    const std::int32_t g = n_real_;
    tris_.reserve(order.size() * 2 + 8);
    // seed triangle and one ghost per edge; a ghost (u, v, inf) has the hull on the right of u->v
    tris_.push_back({{a, b, c}, {2, 3, 1}});
    tris_.push_back({{b, a, g}, {3, 2, 0}});
    tris_.push_back({{c, b, g}, {1, 3, 0}});
    tris_.push_back({{a, c, g}, {2, 1, 0}});
    alive_.assign(4, 1);
    last_ = 0;
    for (std::int32_t v = 2; v < n_real_; ++v)
        if (v != third) insert(v);
}

bool Delaunay::is_ghost(const Triangle& t) const {
    return t.v[0] == n_real_ || t.v[1] == n_real_ || t.v[2] == n_real_;
}

bool Delaunay::circumcircle_contains(const Triangle& t, const Vec2& q) const {
    if (!is_ghost(t)) return incircle(pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]], q) > 0.0;
    // ghost (u, v, inf): open half-plane left of u->v plus the open segment uv
    int k = 0;
    while (t.v[k] != n_real_) ++k;
    const Vec2& u = pts_[t.v[(k + 1) % 3]];
    const Vec2& v = pts_[t.v[(k + 2) % 3]];
    const double o = orient(u, v, q);
    if (o != 0.0) return o > 0.0;
    const double d = (q.x - u.x) * (v.x - u.x) + (q.y - u.y) * (v.y - u.y);
    const double len = (v.x - u.x) * (v.x - u.x) + (v.y - u.y) * (v.y - u.y);
    return d > 0.0 && d < len;
}

std::int32_t Delaunay::walk(std::int32_t t, const Vec2& p) const {
    const std::size_t cap = tris_.size() + 16;
    for (std::size_t step = 0; step < cap; ++step) {
        const Triangle& tri = tris_[t];
        std::int32_t next = -1;
        if (is_ghost(tri)) {
            int k = 0;
            while (tri.v[k] != n_real_) ++k;
            if (orient(pts_[tri.v[(k + 1) % 3]], pts_[tri.v[(k + 2) % 3]], p) > 0.0) return t;
            next = tri.nb[k];
        } else {
            for (int i = 0; i < 3; ++i) {
                const Vec2& a = pts_[tri.v[(i + 1) % 3]];
                const Vec2& b = pts_[tri.v[(i + 2) % 3]];
                if (orient(a, b, p) < 0.0) {
                    next = tri.nb[i];
                    break;
                }
            }
        }
        if (next < 0) return t;
        t = next;
    }
    // Walk failed to settle (round-off); fall back to a scan.
    std::int32_t best = -1;
    double best_score = -1e300;
    for (std::size_t i = 0; i < tris_.size(); ++i) {
        if (!alive_[i] || is_ghost(tris_[i])) continue;
        const Triangle& tri = tris_[i];
        double worst = 1e300;
        for (int k = 0; k < 3; ++k)
            worst = std::min(worst, orient(pts_[tri.v[(k + 1) % 3]], pts_[tri.v[(k + 2) % 3]], p));
        if (worst > best_score) {
            best_score = worst;
            best = static_cast<std::int32_t>(i);
        }
    }
    return best;
}

void Delaunay::insert(std::int32_t vid) {
    const Vec2 q = pts_[vid];
    const std::int32_t start = walk(last_, q);

    std::vector<std::int32_t> cavity{start};
    std::unordered_map<std::int32_t, bool> seen{{start, true}};
    for (std::size_t i = 0; i < cavity.size(); ++i) {
        const Triangle& t = tris_[cavity[i]];
        for (int k = 0; k < 3; ++k) {
            const std::int32_t nb = t.nb[k];
            if (nb < 0 || seen.count(nb)) continue;
            const bool inside = circumcircle_contains(tris_[nb], q);
            seen[nb] = inside;
            if (inside) cavity.push_back(nb);
        }
    }

    struct Edge {
        std::int32_t a, b, outer;
    };
    std::vector<Edge> boundary;
    for (auto ti : cavity) {
        const Triangle& t = tris_[ti];
        for (int k = 0; k < 3; ++k) {
            const std::int32_t nb = t.nb[k];
            if (nb >= 0) {
                auto it = seen.find(nb);
                if (it != seen.end() && it->second) continue;
            }
            boundary.push_back({t.v[(k + 1) % 3], t.v[(k + 2) % 3], nb});
        }
    }

    for (auto ti : cavity) {
        alive_[ti] = 0;
        free_.push_back(ti);
    }

    std::unordered_map<std::int32_t, std::int32_t> by_start, by_end;
    std::vector<std::int32_t> created;
    created.reserve(boundary.size());
    for (const Edge& e : boundary) {
        std::int32_t id;
        Triangle t{{e.a, e.b, vid}, {-1, -1, e.outer}};
        if (!free_.empty()) {
            id = free_.back();
            free_.pop_back();
            tris_[id] = t;
            alive_[id] = 1;
        } else {
            id = static_cast<std::int32_t>(tris_.size());
            tris_.push_back(t);
            alive_.push_back(1);
        }
        created.push_back(id);
        if (e.outer >= 0) {
            Triangle& o = tris_[e.outer];
            for (int k = 0; k < 3; ++k) {
                if (o.v[(k + 1) % 3] == e.b && o.v[(k + 2) % 3] == e.a) o.nb[k] = id;
            }
        }
        by_start[e.a] = id;
        by_end[e.b] = id;
    }
    // Triangle (a, b, q): edge (b, q) opposite a is shared with the triangle starting at b;
    // edge (q, a) opposite b is shared with the triangle ending at a.
    for (auto id : created) {
        Triangle& t = tris_[id];
        t.nb[0] = by_start.at(t.v[1]);
        t.nb[1] = by_end.at(t.v[0]);
    }
    last_ = created.front();
}

bool Delaunay::is_real(const Triangle& t) const { return !is_ghost(t); }

std::vector<std::array<std::uint32_t, 3>> Delaunay::triangles() const {
    std::vector<std::array<std::uint32_t, 3>> out;
    for (std::size_t i = 0; i < tris_.size(); ++i) {
        if (!alive_[i] || !is_real(tris_[i])) continue;
        const auto& v = tris_[i].v;
        out.push_back({input_id_[v[0]], input_id_[v[1]], input_id_[v[2]]});
    }
    return out;
}

std::optional<Delaunay::Hit> Delaunay::locate(const Vec2& p) const {
    std::int32_t hint = last_;
    return locate(p, hint);
}

std::optional<Delaunay::Hit> Delaunay::locate(const Vec2& p_in, std::int32_t& hint) const {
    if (hint < 0 || hint >= static_cast<std::int32_t>(tris_.size()) || !alive_[hint]) hint = last_;
    const Vec2 p{p_in.x - shift_.x, p_in.y - shift_.y};
    const std::int32_t t = walk(hint, p);
    if (t < 0) return std::nullopt;
    hint = t;
    const Triangle& tri = tris_[t];
    if (!is_real(tri)) return std::nullopt;
    const Vec2& a = pts_[tri.v[0]];
    const Vec2& b = pts_[tri.v[1]];
    const Vec2& c = pts_[tri.v[2]];
    const double area = orient(a, b, c);
    Hit h;
    h.w[0] = orient(b, c, p) / area;
    h.w[1] = orient(c, a, p) / area;
    h.w[2] = 1.0 - h.w[0] - h.w[1];
    for (int k = 0; k < 3; ++k) h.v[k] = input_id_[tri.v[k]];
    return h;
}

} // namespace sd
