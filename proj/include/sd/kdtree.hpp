#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sd/geometry.hpp"

namespace sd {

/// Static 2-D k-d tree over a point set. Neighbor results are ordered by
/// (distance, index) so equal distances resolve deterministically.
class KdTree2 {
  public:
    explicit KdTree2(std::vector<Vec2> points);

    struct Hit {
        std::uint32_t index;
        double dist2;
    };

    std::vector<Hit> nearest(const Vec2& q, std::size_t k) const;
    Hit nearest(const Vec2& q) const;

    std::size_t size() const { return pts_.size(); }
    const Vec2& point(std::uint32_t i) const { return pts_[i]; }

  private:
    void build(std::uint32_t lo, std::uint32_t hi, int depth);
    void search(std::uint32_t lo, std::uint32_t hi, int depth, const Vec2& q, std::size_t k,
                std::vector<Hit>& heap) const;

    std::vector<Vec2> pts_;
    std::vector<std::uint32_t> order_;
};

} // namespace sd
