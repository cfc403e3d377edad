#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "sd/adam.hpp"
#include "sd/composite.hpp"
#include "sd/grid.hpp"
#include "sd/loss.hpp"
#include "sd/metrics.hpp"
#include "sd/unet.hpp"

namespace sd {

struct TrainConfig {
    double learning_rate = 1e-3;
    std::uint32_t batch_size = 8;
    std::uint32_t max_epochs = 50;
    std::uint32_t patience = 10;
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    unsigned threads = 1;

    void validate() const;
    AdamConfig adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_eps}; }
};

/// One training/evaluation tile: image [C, H, W], class codes and validity [H, W].
struct Sample {
    std::uint32_t channels = 0, height = 0, width = 0;
    std::vector<float> image;
    std::vector<std::uint8_t> labels;
    std::vector<std::uint8_t> valid;
};

/// Sample from a cut tile; requires labels.
Sample make_sample(const TileData& tile);

/// Samples for the listed tile ids, in the order given.
std::vector<Sample> gather_samples(const GeoGrid& image, const GeoGrid& labels, const std::vector<Tile>& tiles,
                                   const std::vector<int>& ids);

struct ValidationScore {
    double loss = 0.0;
    double mmcc = 0.0;
};

/// Pooled soft-count loss and hard-prediction confusion over a sample set
/// (inference mode, no dropout).
struct Evaluation {
    ValidationScore score;
    ConfusionMatrix cm;
};
Evaluation evaluate_samples(const ModelParams<float>& params, const std::vector<Sample>& samples,
                            const LossConfig& loss_cfg, std::uint32_t batch_size = 8);

struct EpochRecord {
    std::uint32_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_mmcc = 0.0;
};

/// Replaces the built-in validation pass; receives the 1-based epoch and
/// the weights after that epoch.
using Validator = std::function<ValidationScore(std::uint32_t epoch, const ModelParams<float>& params)>;
using EpochCallback = std::function<void(const EpochRecord& record)>;

struct TrainResult {
    ModelParams<float> params; ///< weights of the best validation epoch
    std::vector<EpochRecord> history;
    std::uint32_t best_epoch = 0;
    std::uint32_t epochs_run = 0;
};

/// Mini-batch Adam training with early stopping. An epoch is one pass over
/// the training samples in a seeded shuffled order. Training halts once the
/// validation loss has not strictly improved for `patience` epochs and the
/// best epoch's weights are returned.
TrainResult train(ModelParams<float> model, const TrainConfig& cfg, const LossConfig& loss_cfg,
                  const std::vector<Sample>& train_set, const std::vector<Sample>& val_set,
                  const Validator& validator = {}, const EpochCallback& on_epoch = {});

void write_history_csv(const std::vector<EpochRecord>& history, std::ostream& sink);

/// Per-pixel argmax of [B, C, H, W] probabilities, ties to the lowest code.
std::vector<std::uint8_t> argmax_classes(const Tensor<float>& probs);

/// Class mask for one tile image whose sides are divisible by 2^depth.
GeoGrid predict(const ModelParams<float>& params, const GeoGrid& image);

/// Class mask for a whole composite, predicted tile by tile (edge tiles padded).
GeoGrid predict_grid(const ModelParams<float>& params, const GeoGrid& image, std::uint32_t tile_px);

} // namespace sd
