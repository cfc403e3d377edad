#pragma once

#include <string>
#include <vector>

#include "sd/geometry.hpp"
#include "sd/grid.hpp"

namespace sd {

/// Development classes as interpreted in the stand map.
enum class DevClass { NF, I, II, III, IV, V };

inline constexpr int kNumClasses = 5;

/// Mask code: NF=0, I and II merged to 1, III=2, IV=3, V=4.
int class_code(DevClass c);
DevClass dev_class_from_string(const std::string& s);
std::string to_string(DevClass c);
/// Representative class for a mask code (code 1 maps to II).
DevClass dev_class_from_code(int code);

struct StandPolygon {
    int stand_id = 0;
    DevClass dev_class = DevClass::NF;
    Polygon polygon;
};

/// Checks closure and simplicity of every ring; throws GeometryError naming the stand.
void validate_stand(const StandPolygon& stand);

/// Class mask (u8, 1 channel) from stand polygons by cell-center containment.
///
/// Even-odd rule with holes subtracting. Centers in no polygon are NF.
/// Centers strictly inside several polygons take the last-listed one and a
/// warning is appended. A center lying only on polygon edges takes the first
/// listed polygon owning that edge.
GeoGrid rasterize_stands(const std::vector<StandPolygon>& stands, const GridSpec& spec,
                         std::vector<std::string>* warnings = nullptr);

/// Five binary planes in code order. Throws DomainError for codes > 4.
GeoGrid one_hot(const GeoGrid& mask);

/// Per-pixel argmax over planes, ties to the lowest code.
GeoGrid argmax_planes(const GeoGrid& planes);

void validate_mask(const GeoGrid& mask, int n_classes = kNumClasses);

} // namespace sd
