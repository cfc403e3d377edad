#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "sd/geometry.hpp"

namespace sd {

/// Incremental (Bowyer-Watson) Delaunay triangulation with a symbolic vertex
/// at infinity, so the result always covers the exact convex hull.
///
/// Points are inserted in lexicographic (x, y) order; duplicates keep their
/// first occurrence. Cocircular configurations resolve by that insertion
/// order, which makes the result deterministic.
class Delaunay {
  public:
    explicit Delaunay(const std::vector<Vec2>& points);

    struct Triangle {
        std::array<std::int32_t, 3> v;  ///< counter-clockwise vertex ids
        std::array<std::int32_t, 3> nb; ///< nb[i] is across the edge opposite v[i]; -1 if none
    };

    /// Finite triangles, with vertex ids into the input point list.
    std::vector<std::array<std::uint32_t, 3>> triangles() const;

    struct Hit {
        std::array<std::uint32_t, 3> v; ///< input point ids
        std::array<double, 3> w;        ///< barycentric weights
    };

    /// Triangle containing p with barycentric weights, or nullopt when p is
    /// outside the triangulated hull.
    std::optional<Hit> locate(const Vec2& p) const;

    /// As locate(p), walking from and updating a caller-owned hint; rasterizing
    /// in scan order with one hint per thread keeps walks short.
    std::optional<Hit> locate(const Vec2& p, std::int32_t& hint) const;

    std::size_t vertex_count() const { return input_id_.size(); }

  private:
    void insert(std::int32_t vid);
    std::int32_t walk(std::int32_t start, const Vec2& p) const;
    bool is_real(const Triangle& t) const;
    bool is_ghost(const Triangle& t) const;
    bool circumcircle_contains(const Triangle& t, const Vec2& q) const;

    std::vector<Vec2> pts_;             // translated; the last entry stands for the vertex at infinity
    std::vector<std::uint32_t> input_id_; // internal vertex -> input point id
    std::vector<Triangle> tris_;
    std::vector<std::uint8_t> alive_;
    std::vector<std::int32_t> free_;
    Vec2 shift_;
    std::int32_t n_real_ = 0;
    std::int32_t last_ = 0;
};

} // namespace sd
