#pragma once

#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

namespace sd {

template <typename T>
struct Tensor {
    std::vector<std::uint32_t> shape;
    std::vector<T> values;

    Tensor() = default;
    explicit Tensor(std::vector<std::uint32_t> dims, T fill = T(0))
        : shape(std::move(dims)), values(element_count(shape), fill) {}

    static std::size_t element_count(const std::vector<std::uint32_t>& dims) {
        return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
    }
    std::size_t size() const { return values.size(); }
    T* data() { return values.data(); }
    const T* data() const { return values.data(); }

    bool operator==(const Tensor&) const = default;
};

} // namespace sd
