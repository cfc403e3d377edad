#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sd/grid.hpp"

namespace sd {

enum class RenderStyle { ClassMap, Grayscale, Rgb };

RenderStyle render_style_from_string(const std::string& name);

/// PNG bytes for a grid. ClassMap colors mask codes 0..4 with the fixed
/// development-class palette; Grayscale maps [0, 1] to 0..255 rounding half
/// up (channel `channel`); Rgb takes channels 0..2 the same way.
std::vector<std::uint8_t> render_png(const GeoGrid& grid, RenderStyle style, std::uint16_t channel = 0);

void save_png(const std::vector<std::uint8_t>& png, const std::filesystem::path& path);

} // namespace sd
