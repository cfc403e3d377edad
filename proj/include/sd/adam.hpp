#pragma once

#include <cstdint>

#include "sd/unet.hpp"

namespace sd {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Bias-corrected Adam update at step t (t >= 1). Moment buffers live in
/// params.adam and start at zero. Throws TrainingError naming the first
/// tensor with a non-finite gradient; params are untouched in that case.
template <typename T>
void adam_step(ModelParams<T>& params, const Gradients<T>& grads, std::uint64_t t, const AdamConfig& cfg);

} // namespace sd
