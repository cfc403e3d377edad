#pragma once

#include <cstdint>
#include <vector>

#include "sd/tensor.hpp"

namespace sd {

struct LossConfig {
    double alpha = 0.5; ///< false-positive weight; beta = 1 - alpha
    double gamma = 1.0; ///< focal exponent, loss uses 1/gamma
    double epsilon = 1e-6;

    double beta() const { return 1.0 - alpha; }
    void validate() const;
};

/// Per-pixel targets for a batch [B, H, W]: class codes and a validity mask.
/// Invalid (nodata/padded) pixels are excluded from every sum.
struct Labels {
    std::uint32_t batch = 0, height = 0, width = 0;
    std::vector<std::uint8_t> codes;
    std::vector<std::uint8_t> valid;
};

/// Soft confusion counts per class pooled over all valid pixels of a batch:
/// TP = sum p*g, FP = sum p*(1-g), FN = sum (1-p)*g.
struct SoftCounts {
    std::vector<double> tp, fp, fn;

    explicit SoftCounts(std::size_t classes = 0) : tp(classes, 0.0), fp(classes, 0.0), fn(classes, 0.0) {}
    std::size_t classes() const { return tp.size(); }
    void add(const SoftCounts& o);
};

template <typename T>
SoftCounts soft_counts(const Tensor<T>& probs, const Labels& labels);

/// (TP + eps) / (TP + alpha FP + beta FN + eps).
double tversky_index(const SoftCounts& counts, std::size_t k, double alpha, double beta, double epsilon);

/// Mean over classes of (1 - TI_k)^(1/gamma).
double focal_tversky_loss(const SoftCounts& counts, const LossConfig& cfg);

template <typename T>
double focal_tversky_loss(const Tensor<T>& probs, const Labels& labels, const LossConfig& cfg) {
    return focal_tversky_loss(soft_counts(probs, labels), cfg);
}

/// d loss / d probs, same layout as probs; zero at invalid pixels.
template <typename T>
std::vector<T> focal_tversky_grad(const Tensor<T>& probs, const Labels& labels, const SoftCounts& counts,
                                  const LossConfig& cfg);

} // namespace sd
