#pragma once

#include <vector>

namespace sd {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Vec2&) const = default;
};

/// Closed ring: first vertex repeated as last.
using Ring = std::vector<Vec2>;

struct Polygon {
    Ring exterior;
    std::vector<Ring> holes;
};

struct Rect {
    double xmin, ymin, xmax, ymax;
    double area() const { return (xmax - xmin) * (ymax - ymin); }
};

enum class Location { Outside, Inside, Boundary };

bool ring_is_closed(const Ring& ring);

/// Shoelace signed area; positive for counter-clockwise rings.
double signed_area(const Ring& ring);
double ring_length(const Ring& ring);

/// Net area: |exterior| minus |holes|.
double polygon_area(const Polygon& poly);

/// Even-odd containment of p in a closed ring, with exact on-edge detection.
Location locate_in_ring(const Vec2& p, const Ring& ring);

/// Holes subtract; a point on any ring edge is Boundary.
Location locate_in_polygon(const Vec2& p, const Polygon& poly);

Rect bounding_box(const Ring& ring);

/// Sutherland-Hodgman clip of a (possibly concave) ring against a rectangle.
Ring clip_ring(const Ring& ring, const Rect& rect);

/// Area of the intersection of a polygon (with holes) and a rectangle.
double overlap_area(const Polygon& poly, const Rect& rect);

/// True when two non-adjacent edges of a closed ring touch or cross. O(n^2).
bool ring_self_intersects(const Ring& ring);

/// Convex hull (counter-clockwise, not closed, collinear points dropped).
std::vector<Vec2> convex_hull(std::vector<Vec2> pts);

inline double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

} // namespace sd
