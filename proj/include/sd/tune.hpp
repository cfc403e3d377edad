#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sd/composite.hpp"
#include "sd/error.hpp"
#include "sd/rng.hpp"
#include "sd/train.hpp"

namespace sd {

struct SearchSpace {
    double lr_min = 1e-6, lr_max = 1e-3; ///< sampled log-uniformly
    std::vector<std::uint32_t> batch_sizes{4, 8, 16};
    std::uint32_t filters_min = 8, filters_max = 64;
    std::vector<std::uint32_t> kernel_sizes{3, 5, 7};
    double dropout_min = 0.0, dropout_max = 0.5;
    double alpha_min = 0.3, alpha_max = 0.7;
    double gamma_min = 1.0, gamma_max = 2.0;

    void validate() const;
};

struct Hyperparams {
    double learning_rate = 1e-3;
    std::uint32_t batch_size = 8;
    std::uint32_t base_filters = 16;
    std::uint32_t kernel_size = 3;
    double dropout = 0.0;
    double alpha = 0.5;
    double beta = 0.5; ///< always 1 - alpha
    double gamma = 1.0;
};

/// Draws one configuration (lr, batch, filters, kernel, dropout, alpha, gamma in that order).
Hyperparams sample_hyperparams(const SearchSpace& space, Rng& rng);

enum class TrialStatus { Complete, Failed };

struct Trial {
    int id = 0;
    Hyperparams hp;
    std::vector<double> fold_mmcc;
    std::optional<double> objective; ///< mean fold mMCC, only when every fold completed
    TrialStatus status = TrialStatus::Complete;
    std::string error;
    double wall_seconds = 0.0;
};

class Sampler {
  public:
    virtual ~Sampler() = default;
    virtual Hyperparams sample(const SearchSpace& space, const std::vector<Trial>& history, Rng& rng) = 0;
};

class RandomSampler : public Sampler {
  public:
    Hyperparams sample(const SearchSpace& space, const std::vector<Trial>& history, Rng& rng) override;
};

/// Trains one fold and returns its validation mMCC.
using FoldTrainer = std::function<double(const Hyperparams& hp, const Fold& fold, std::size_t fold_index)>;

Trial run_trial(int id, const Hyperparams& hp, const FoldPlan& plan, const FoldTrainer& trainer);

class StudyError : public Error {
  public:
    using Error::Error;
};

struct StudyResult {
    std::vector<Trial> trials;
    std::size_t best = 0; ///< index into trials

    const Trial& best_trial() const { return trials.at(best); }
};

/// Runs n_trials trials. Trial i samples from a stream split off the study
/// seed by i. Best = highest objective, ties to the lowest id.
StudyResult run_study(const SearchSpace& space, std::uint32_t n_trials, const FoldPlan& plan,
                      const FoldTrainer& trainer, std::uint64_t seed, Sampler* sampler = nullptr,
                      const std::function<void(const Trial&)>& on_trial = {});

/// One JSON object (no trailing newline) for the study log.
std::string trial_json(const Trial& trial);

/// Budget and fixed architecture settings for U-Net fold training.
struct FoldTrainingSetup {
    std::uint32_t depth = 4;
    std::uint32_t in_channels = 5;
    std::uint32_t max_epochs = 50;
    std::uint32_t patience = 10;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

/// Fold trainer that fits a U-Net on the fold's train tiles, early-stops on
/// its validation tiles and reports the validation mMCC of the restored weights.
FoldTrainer unet_fold_trainer(const GeoGrid& image, const GeoGrid& labels, const std::vector<Tile>& tiles,
                              const FoldTrainingSetup& setup);

} // namespace sd
