#include "sd/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace sd {

namespace {

bool closer(const KdTree2::Hit& a, const KdTree2::Hit& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
}

double coord(const Vec2& v, int axis) { return axis == 0 ? v.x : v.y; }

} // namespace

KdTree2::KdTree2(std::vector<Vec2> points) : pts_(std::move(points)), order_(pts_.size()) {
    std::iota(order_.begin(), order_.end(), 0u);
    if (!order_.empty()) build(0, static_cast<std::uint32_t>(order_.size()), 0);
}

void KdTree2::build(std::uint32_t lo, std::uint32_t hi, int depth) {
    if (hi - lo <= 1) return;
    const std::uint32_t mid = lo + (hi - lo) / 2;
    const int axis = depth & 1;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                     [&](std::uint32_t a, std::uint32_t b) {
                         const double ca = coord(pts_[a], axis), cb = coord(pts_[b], axis);
                         return ca < cb || (ca == cb && a < b);
                     });
    build(lo, mid, depth + 1);
    build(mid + 1, hi, depth + 1);
}

void KdTree2::search(std::uint32_t lo, std::uint32_t hi, int depth, const Vec2& q, std::size_t k,
                     std::vector<Hit>& heap) const {
    if (lo >= hi) return;
    const std::uint32_t mid = lo + (hi - lo) / 2;
    const std::uint32_t idx = order_[mid];
    const Vec2& p = pts_[idx];
    const double dx = p.x - q.x, dy = p.y - q.y;
    const Hit h{idx, dx * dx + dy * dy};
    if (heap.size() < k) {
        heap.push_back(h);
        std::push_heap(heap.begin(), heap.end(), closer);
    } else if (closer(h, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.back() = h;
        std::push_heap(heap.begin(), heap.end(), closer);
    }
    const int axis = depth & 1;
    const double diff = coord(q, axis) - coord(p, axis);
    const bool left_first = diff <= 0.0;
    if (left_first)
        search(lo, mid, depth + 1, q, k, heap);
    else
        search(mid + 1, hi, depth + 1, q, k, heap);
    // <= keeps equal-distance candidates on the far side reachable for the index tie-break.
    if (heap.size() < k || diff * diff <= heap.front().dist2) {
        if (left_first)
            search(mid + 1, hi, depth + 1, q, k, heap);
        else
            search(lo, mid, depth + 1, q, k, heap);
    }
}

std::vector<KdTree2::Hit> KdTree2::nearest(const Vec2& q, std::size_t k) const {
    std::vector<Hit> heap;
    k = std::min(k, pts_.size());
    if (k == 0) return heap;
    heap.reserve(k + 1);
    search(0, static_cast<std::uint32_t>(order_.size()), 0, q, k, heap);
    std::sort_heap(heap.begin(), heap.end(), closer);
    return heap;
}

KdTree2::Hit KdTree2::nearest(const Vec2& q) const { return nearest(q, 1).front(); }

} // namespace sd
