#include "sd/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace sd {

bool ring_is_closed(const Ring& ring) { return ring.size() >= 4 && ring.front() == ring.back(); }

double signed_area(const Ring& ring) {
    if (ring.size() < 3) return 0.0;
    // Anchored at the first vertex to limit cancellation for offset coordinates.
    const Vec2 o = ring.front();
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        const double ax = ring[i].x - o.x, ay = ring[i].y - o.y;
        const double bx = ring[i + 1].x - o.x, by = ring[i + 1].y - o.y;
        s += ax * by - bx * ay;
    }
    return 0.5 * s;
}

double ring_length(const Ring& ring) {
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i)
        len += std::hypot(ring[i + 1].x - ring[i].x, ring[i + 1].y - ring[i].y);
    return len;
}

double polygon_area(const Polygon& poly) {
    double a = std::abs(signed_area(poly.exterior));
    for (const auto& h : poly.holes) a -= std::abs(signed_area(h));
    return a;
}

namespace {

bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    if (orient(a, b, p) != 0.0) return false;
    return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) && p.y >= std::min(a.y, b.y) &&
           p.y <= std::max(a.y, b.y);
}

} // namespace

Location locate_in_ring(const Vec2& p, const Ring& ring) {
    bool inside = false;
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const Vec2& a = ring[i];
        const Vec2& b = ring[i + 1];
        if (on_segment(p, a, b)) return Location::Boundary;
        if ((a.y > p.y) != (b.y > p.y)) {
            const double t = (p.y - a.y) / (b.y - a.y);
            const double xi = a.x + t * (b.x - a.x);
            if (p.x < xi) inside = !inside;
        }
    }
    return inside ? Location::Inside : Location::Outside;
}

Location locate_in_polygon(const Vec2& p, const Polygon& poly) {
    const Location ext = locate_in_ring(p, poly.exterior);
    if (ext != Location::Inside) return ext;
    for (const auto& h : poly.holes) {
        const Location l = locate_in_ring(p, h);
        if (l == Location::Boundary) return Location::Boundary;
        if (l == Location::Inside) return Location::Outside;
    }
    return Location::Inside;
}

Rect bounding_box(const Ring& ring) {
    Rect r{1e300, 1e300, -1e300, -1e300};
    for (const auto& v : ring) {
        r.xmin = std::min(r.xmin, v.x);
        r.ymin = std::min(r.ymin, v.y);
        r.xmax = std::max(r.xmax, v.x);
        r.ymax = std::max(r.ymax, v.y);
    }
    return r;
}

namespace {

template <typename Inside, typename Cross>
std::vector<Vec2> clip_edge(const std::vector<Vec2>& in, Inside inside, Cross cross) {
    std::vector<Vec2> out;
    if (in.empty()) return out;
    Vec2 prev = in.back();
    bool prev_in = inside(prev);
    for (const auto& cur : in) {
        const bool cur_in = inside(cur);
        if (cur_in) {
            if (!prev_in) out.push_back(cross(prev, cur));
            out.push_back(cur);
        } else if (prev_in) {
            out.push_back(cross(prev, cur));
        }
        prev = cur;
        prev_in = cur_in;
    }
    return out;
}

} // namespace

Ring clip_ring(const Ring& ring, const Rect& rect) {
    std::vector<Vec2> pts(ring.begin(), ring.end());
    if (ring_is_closed(ring)) pts.pop_back();
    auto at_x = [](double x) {
        return [x](const Vec2& a, const Vec2& b) {
            const double t = (x - a.x) / (b.x - a.x);
            return Vec2{x, a.y + t * (b.y - a.y)};
        };
    };
    auto at_y = [](double y) {
        return [y](const Vec2& a, const Vec2& b) {
            const double t = (y - a.y) / (b.y - a.y);
            return Vec2{a.x + t * (b.x - a.x), y};
        };
    };
    pts = clip_edge(pts, [&](const Vec2& v) { return v.x >= rect.xmin; }, at_x(rect.xmin));
    pts = clip_edge(pts, [&](const Vec2& v) { return v.x <= rect.xmax; }, at_x(rect.xmax));
    pts = clip_edge(pts, [&](const Vec2& v) { return v.y >= rect.ymin; }, at_y(rect.ymin));
    pts = clip_edge(pts, [&](const Vec2& v) { return v.y <= rect.ymax; }, at_y(rect.ymax));
    if (!pts.empty()) pts.push_back(pts.front());
    return pts;
}

double overlap_area(const Polygon& poly, const Rect& rect) {
    double a = std::abs(signed_area(clip_ring(poly.exterior, rect)));
    for (const auto& h : poly.holes) a -= std::abs(signed_area(clip_ring(h, rect)));
    return std::max(a, 0.0);
}

namespace {

bool segments_touch(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double d1 = orient(c, d, a), d2 = orient(c, d, b), d3 = orient(a, b, c), d4 = orient(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    return on_segment(a, c, d) || on_segment(b, c, d) || on_segment(c, a, b) || on_segment(d, a, b);
}

} // namespace

bool ring_self_intersects(const Ring& ring) {
    const std::size_t m = ring.size() < 2 ? 0 : ring.size() - 1; // edge count
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const bool adjacent = j == i + 1 || (i == 0 && j == m - 1);
            if (adjacent) {
                // Adjacent edges (a, b), (b, c) conflict only when c folds back onto (a, b).
                const bool wrap = !(j == i + 1);
                const Vec2& a = wrap ? ring[m - 1] : ring[i];
                const Vec2& b = wrap ? ring[0] : ring[i + 1];
                const Vec2& c = wrap ? ring[1] : ring[j + 1];
                const double dot = (b.x - a.x) * (c.x - b.x) + (b.y - a.y) * (c.y - b.y);
                if (orient(a, b, c) == 0.0 && dot < 0.0) return true;
                continue;
            }
            if (segments_touch(ring[i], ring[i + 1], ring[j], ring[j + 1])) return true;
        }
    }
    return false;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Vec2> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && orient(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
        while (k >= t && orient(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
        hull[k++] = pts[i - 1];
    }
    hull.resize(k - 1);
    return hull;
}

} // namespace sd
