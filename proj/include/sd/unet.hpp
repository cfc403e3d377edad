#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sd/loss.hpp"
#include "sd/rng.hpp"
#include "sd/tensor.hpp"

namespace sd {

struct UNetConfig {
    std::uint32_t in_channels = 5;
    std::uint32_t n_classes = 5;
    std::uint32_t base_filters = 16;
    std::uint32_t kernel_size = 3;
    std::uint32_t depth = 4;
    float dropout = 0.0f;

    void validate() const;
    bool operator==(const UNetConfig&) const = default;
};

/// One convolution of the fixed architecture, in parameter order.
struct ConvLayer {
    std::string name;
    std::uint32_t in = 0;
    std::uint32_t out = 0;
    std::uint32_t kernel = 0;
};

/// Encoder levels of two same-padded convs + ReLU, dropout, 2x2 max-pool;
/// filters double per level. Two-conv bottleneck. Each decoder level is a
/// nearest 2x upsample, a conv, skip concatenation and two convs. A final
/// 1x1 conv feeds a per-pixel softmax.
std::vector<ConvLayer> unet_layout(const UNetConfig& cfg);

template <typename T>
struct AdamState {
    std::vector<std::vector<T>> m;
    std::vector<std::vector<T>> v;
    std::uint64_t step = 0;
};

/// Named weight/bias tensors in architecture order (conv weights are
/// [out, in, k, k], biases [out]) plus the optimizer moments.
template <typename T>
struct ModelParams {
    UNetConfig cfg;
    std::vector<std::string> names;
    std::vector<Tensor<T>> tensors;
    AdamState<T> adam;

    std::size_t parameter_count() const;
    bool same_weights(const ModelParams& o) const { return cfg == o.cfg && names == o.names && tensors == o.tensors; }
};

/// He-scaled normal weights from the stream, zero biases.
template <typename T>
ModelParams<T> init_params(const UNetConfig& cfg, Rng& rng);

template <typename To, typename From>
ModelParams<To> cast_params(const ModelParams<From>& p);

/// Batch forward: input [B, C_in, H, W] -> class probabilities [B, n_classes, H, W].
/// Dropout is drawn from `rng` only when training.
template <typename T>
Tensor<T> unet_forward(const ModelParams<T>& params, const Tensor<T>& batch, bool training, Rng* rng = nullptr);

/// Gradients aligned with params.tensors.
template <typename T>
using Gradients = std::vector<std::vector<T>>;

template <typename T>
struct BatchResult {
    double loss = 0.0;
    SoftCounts counts;
    Tensor<T> probs;
    Gradients<T> grads;
};

/// Forward pass plus reverse-mode gradients of the batch-pooled focal
/// Tversky loss. Samples may be processed on `threads` workers; per-sample
/// gradients are reduced in sample order, so results do not depend on the
/// thread count.
template <typename T>
BatchResult<T> loss_and_gradients(const ModelParams<T>& params, const Tensor<T>& batch, const Labels& labels,
                                  const LossConfig& loss_cfg, bool training = false, Rng* rng = nullptr,
                                  unsigned threads = 1);

} // namespace sd
