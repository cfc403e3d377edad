#include "sd/refmask.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "sd/error.hpp"

namespace sd {

int class_code(DevClass c) {
    switch (c) {
    case DevClass::NF: return 0;
    case DevClass::I:
    case DevClass::II: return 1;
    case DevClass::III: return 2;
    case DevClass::IV: return 3;
    case DevClass::V: return 4;
    }
    return 0;
}

DevClass dev_class_from_string(const std::string& s) {
    if (s == "NF") return DevClass::NF;
    if (s == "I") return DevClass::I;
    if (s == "II") return DevClass::II;
    if (s == "III") return DevClass::III;
    if (s == "IV") return DevClass::IV;
    if (s == "V") return DevClass::V;
    throw ArgumentError("unknown development class '" + s + "'");
}

std::string to_string(DevClass c) {
    static const char* names[] = {"NF", "I", "II", "III", "IV", "V"};
    return names[static_cast<int>(c)];
}

DevClass dev_class_from_code(int code) {
    static const DevClass table[] = {DevClass::NF, DevClass::II, DevClass::III, DevClass::IV, DevClass::V};
    if (code < 0 || code >= kNumClasses) throw DomainError("class code " + std::to_string(code) + " out of range");
    return table[code];
}

void validate_stand(const StandPolygon& s) {
    auto check = [&](const Ring& ring, const char* which) {
        if (!ring_is_closed(ring))
            throw GeometryError("stand " + std::to_string(s.stand_id) + ": " + which + " ring is not closed");
        for (const auto& v : ring) {
            if (!std::isfinite(v.x) || !std::isfinite(v.y))
                throw GeometryError("stand " + std::to_string(s.stand_id) + ": non-finite vertex");
        }
        if (ring.size() <= 4097 && ring_self_intersects(ring))
            throw GeometryError("stand " + std::to_string(s.stand_id) + ": " + which + " ring self-intersects");
    };
    check(s.polygon.exterior, "exterior");
    for (const auto& h : s.polygon.holes) check(h, "hole");
}

GeoGrid rasterize_stands(const std::vector<StandPolygon>& stands, const GridSpec& spec,
                         std::vector<std::string>* warnings) {
    spec.validate();
    for (const auto& s : stands) validate_stand(s);

    const std::size_t n = spec.pixel_count();
    std::vector<std::int32_t> strict_owner(n, -1), edge_owner(n, -1);
    std::map<std::pair<int, int>, std::size_t> overlaps; // (earlier stand, later stand) -> cells

    for (std::size_t si = 0; si < stands.size(); ++si) {
        const Rect box = bounding_box(stands[si].polygon.exterior);
        const double cs = spec.cell_size;
        const auto c0 = static_cast<std::int64_t>(std::max(0.0, std::floor((box.xmin - spec.origin_x) / cs - 0.5)));
        const auto c1 = static_cast<std::int64_t>(
            std::min<double>(spec.width - 1, std::ceil((box.xmax - spec.origin_x) / cs - 0.5)));
        const auto r0 = static_cast<std::int64_t>(std::max(0.0, std::floor((spec.origin_y - box.ymax) / cs - 0.5)));
        const auto r1 = static_cast<std::int64_t>(
            std::min<double>(spec.height - 1, std::ceil((spec.origin_y - box.ymin) / cs - 0.5)));
        for (std::int64_t r = r0; r <= r1; ++r) {
            for (std::int64_t c = c0; c <= c1; ++c) {
                const Vec2 p{spec.center_x(c), spec.center_y(r)};
                const Location loc = locate_in_polygon(p, stands[si].polygon);
                const std::size_t i = static_cast<std::size_t>(r) * spec.width + static_cast<std::size_t>(c);
                if (loc == Location::Inside) {
                    if (strict_owner[i] >= 0)
                        ++overlaps[{stands[strict_owner[i]].stand_id, stands[si].stand_id}];
                    strict_owner[i] = static_cast<std::int32_t>(si);
                } else if (loc == Location::Boundary && edge_owner[i] < 0) {
                    edge_owner[i] = static_cast<std::int32_t>(si);
                }
            }
        }
    }
    if (warnings) {
        for (const auto& [pair, cells] : overlaps) {
            warnings->push_back("stands " + std::to_string(pair.first) + " and " + std::to_string(pair.second) +
                                " overlap on " + std::to_string(cells) + " cell centers; stand " +
                                std::to_string(pair.second) + " (listed later) wins");
        }
    }

    GeoGrid mask(spec, 1, DType::U8, {"class"});
    auto out = mask.channel(0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::int32_t owner = strict_owner[i] >= 0 ? strict_owner[i] : edge_owner[i];
        out[i] = owner >= 0 ? static_cast<float>(class_code(stands[owner].dev_class)) : 0.0f;
    }
    return mask;
}

void validate_mask(const GeoGrid& mask, int n_classes) {
    if (mask.channels() != 1) throw ShapeError("class mask must have exactly one channel");
    for (float v : mask.values()) {
        if (!(v >= 0.0f && v < static_cast<float>(n_classes)) || v != std::floor(v))
            throw DomainError("class code " + std::to_string(v) + " outside [0, " + std::to_string(n_classes - 1) + "]");
    }
}

GeoGrid one_hot(const GeoGrid& mask) {
    validate_mask(mask);
    GeoGrid planes(mask.spec(), kNumClasses, DType::U8, {"NF", "I-II", "III", "IV", "V"});
    const auto src = mask.channel(0);
    for (std::uint16_t k = 0; k < kNumClasses; ++k) {
        auto dst = planes.channel(k);
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] == static_cast<float>(k) ? 1.0f : 0.0f;
    }
    if (mask.has_nodata()) planes.set_nodata_mask(*mask.nodata_mask());
    return planes;
}

GeoGrid argmax_planes(const GeoGrid& planes) {
    GeoGrid mask(planes.spec(), 1, DType::U8, {"class"});
    auto out = mask.channel(0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int best = 0;
        float bv = planes.channel(0)[i];
        for (std::uint16_t k = 1; k < planes.channels(); ++k) {
            if (planes.channel(k)[i] > bv) {
                bv = planes.channel(k)[i];
                best = k;
            }
        }
        out[i] = static_cast<float>(best);
    }
    if (planes.has_nodata()) mask.set_nodata_mask(*planes.nodata_mask());
    return mask;
}

} // namespace sd
