#pragma once

#include <filesystem>
#include <iosfwd>

#include "sd/unet.hpp"

namespace sd {

/// SDNN model container: config, then named f32 tensors in architecture
/// order. Optimizer moments are not stored.
void write_model(const ModelParams<float>& params, std::ostream& sink);
ModelParams<float> read_model(std::istream& source);

void save_model(const ModelParams<float>& params, const std::filesystem::path& path);
ModelParams<float> load_model(const std::filesystem::path& path);

} // namespace sd
