#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sd/delaunay.hpp"
#include "sd/error.hpp"
#include "sd/geometry.hpp"
#include "sd/kdtree.hpp"
#include "sd/rng.hpp"

using namespace sd;

namespace {

Ring square(double x0, double y0, double side) {
    return {{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}, {x0, y0}};
}

} // namespace

TEST_CASE("shoelace area and orientation") {
    Ring r = square(0, 0, 2);
    CHECK(signed_area(r) == 4.0);
    std::reverse(r.begin(), r.end());
    CHECK(signed_area(r) == -4.0);
    CHECK(ring_length(r) == 8.0);
    Polygon donut{square(0, 0, 4), {square(1, 1, 2)}};
    CHECK(polygon_area(donut) == 12.0);
}

TEST_CASE("point location distinguishes inside, outside and boundary") {
    const Polygon donut{square(0, 0, 4), {square(1, 1, 2)}};
    CHECK(locate_in_polygon({0.5, 0.5}, donut) == Location::Inside);
    CHECK(locate_in_polygon({2.0, 2.0}, donut) == Location::Outside);
    CHECK(locate_in_polygon({5.0, 2.0}, donut) == Location::Outside);
    CHECK(locate_in_polygon({4.0, 2.0}, donut) == Location::Boundary);
    CHECK(locate_in_polygon({1.0, 2.0}, donut) == Location::Boundary);
    CHECK(locate_in_polygon({0.0, 0.0}, donut) == Location::Boundary);
}

TEST_CASE("rectangle clipping gives overlap areas") {
    const Polygon p{square(0, 0, 10), {}};
    CHECK(overlap_area(p, {6, 0, 16, 10}) == doctest::Approx(40.0));
    CHECK(overlap_area(p, {20, 20, 30, 30}) == 0.0);
    const Polygon tri{{{0, 0}, {4, 0}, {0, 4}, {0, 0}}, {}};
    CHECK(overlap_area(tri, {0, 0, 2, 2}) == doctest::Approx(4.0));
    CHECK(overlap_area(tri, {0, 0, 10, 10}) == doctest::Approx(8.0));
}

TEST_CASE("self-intersection detection") {
    CHECK_FALSE(ring_self_intersects(square(0, 0, 1)));
    const Ring bowtie{{0, 0}, {2, 2}, {2, 0}, {0, 2}, {0, 0}};
    CHECK(ring_self_intersects(bowtie));
}

TEST_CASE("kd-tree nearest neighbors match brute force") {
    Rng rng(11);
    std::vector<Vec2> pts(500);
    for (auto& p : pts) p = {rng.uniform(0, 100), rng.uniform(0, 100)};
    const KdTree2 tree(pts);
    for (int q = 0; q < 50; ++q) {
        const Vec2 c{rng.uniform(-10, 110), rng.uniform(-10, 110)};
        std::vector<std::pair<double, std::size_t>> all;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double dx = pts[i].x - c.x, dy = pts[i].y - c.y;
            all.push_back({dx * dx + dy * dy, i});
        }
        std::sort(all.begin(), all.end());
        const auto hits = tree.nearest(c, 10);
        REQUIRE(hits.size() == 10);
        for (std::size_t k = 0; k < 10; ++k) CHECK(hits[k].index == all[k].second);
    }
}

TEST_CASE("Delaunay triangulation satisfies the empty-circumcircle property") {
    Rng rng(5);
    std::vector<Vec2> pts(200);
    for (auto& p : pts) p = {rng.uniform(0, 50), rng.uniform(0, 50)};
    const Delaunay tin(pts);
    const auto tris = tin.triangles();
    double area = 0.0;
    for (const auto& t : tris) {
        const Vec2 &a = pts[t[0]], &b = pts[t[1]], &c = pts[t[2]];
        area += 0.5 * std::abs(orient(a, b, c));
        // incircle determinant with the triangle oriented counter-clockwise
        const bool ccw = orient(a, b, c) > 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i == t[0] || i == t[1] || i == t[2]) continue;
            const Vec2& d = pts[i];
            const double adx = a.x - d.x, ady = a.y - d.y, bdx = b.x - d.x, bdy = b.y - d.y, cdx = c.x - d.x,
                         cdy = c.y - d.y;
            double det = (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) -
                         (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady) +
                         (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
            if (!ccw) det = -det;
            CHECK(det <= 1e-6);
        }
    }
    // triangles tile the convex hull
    Ring hull;
    for (const Vec2& p : convex_hull(pts)) hull.push_back(p);
    hull.push_back(hull.front());
    CHECK(area == doctest::Approx(signed_area(hull)).epsilon(1e-9));
}

TEST_CASE("Delaunay locate returns barycentric weights") {
    const std::vector<Vec2> pts{{0, 0}, {3, 0}, {0, 3}};
    const Delaunay tin(pts);
    const auto hit = tin.locate({1, 1});
    REQUIRE(hit);
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
        CHECK(hit->w[k] == doctest::Approx(1.0 / 3.0));
        sum += hit->w[k];
    }
    CHECK(sum == doctest::Approx(1.0));
    CHECK_FALSE(tin.locate({5, 5}));
}

TEST_CASE("degenerate triangulation inputs are rejected") {
    CHECK_THROWS_AS(Delaunay(std::vector<Vec2>{{0, 0}, {1, 1}}), GeometryError);
    CHECK_THROWS_AS(Delaunay(std::vector<Vec2>{{0, 0}, {1, 1}, {2, 2}, {3, 3}}), GeometryError);
    CHECK_THROWS_AS(Delaunay(std::vector<Vec2>{{0, 0}, {0, 0}, {1, 1}}), GeometryError);
}

TEST_CASE("cocircular grid points triangulate deterministically") {
    std::vector<Vec2> pts;
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) pts.push_back({static_cast<double>(x), static_cast<double>(y)});
    const auto a = Delaunay(pts).triangles();
    CHECK(a.size() == 18);
    const auto b = Delaunay(pts).triangles();
    CHECK(a == b);
}
