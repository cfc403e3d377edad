#include "sd/tune.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <json.hpp>

namespace sd {

void SearchSpace::validate() const {
    if (!(lr_min > 0.0 && lr_min <= lr_max)) throw ArgumentError("learning-rate bounds must satisfy 0 < min <= max");
    if (batch_sizes.empty() || kernel_sizes.empty()) throw ArgumentError("choice sets must not be empty");
    if (filters_min < 1 || filters_min > filters_max) throw ArgumentError("invalid filter bounds");
    if (dropout_min < 0.0 || dropout_min > dropout_max || dropout_max >= 1.0) throw ArgumentError("invalid dropout bounds");
    if (alpha_min < 0.0 || alpha_min > alpha_max || alpha_max > 1.0) throw ArgumentError("invalid alpha bounds");
    if (gamma_min < 1.0 || gamma_min > gamma_max) throw ArgumentError("invalid gamma bounds");
}

Hyperparams sample_hyperparams(const SearchSpace& space, Rng& rng) {
    Hyperparams hp;
    const double u = rng.uniform(std::log10(space.lr_min), std::log10(space.lr_max));
    hp.learning_rate = std::clamp(std::pow(10.0, u), space.lr_min, space.lr_max);
    hp.batch_size = space.batch_sizes[rng.below(space.batch_sizes.size())];
    hp.base_filters = space.filters_min + static_cast<std::uint32_t>(rng.below(space.filters_max - space.filters_min + 1));
    hp.kernel_size = space.kernel_sizes[rng.below(space.kernel_sizes.size())];
    hp.dropout = rng.uniform(space.dropout_min, space.dropout_max);
    hp.alpha = rng.uniform(space.alpha_min, space.alpha_max);
    hp.beta = 1.0 - hp.alpha;
    hp.gamma = rng.uniform(space.gamma_min, space.gamma_max);
    return hp;
}

Hyperparams RandomSampler::sample(const SearchSpace& space, const std::vector<Trial>&, Rng& rng) {
    return sample_hyperparams(space, rng);
}

Trial run_trial(int id, const Hyperparams& hp, const FoldPlan& plan, const FoldTrainer& trainer) {
    Trial t;
    t.id = id;
    t.hp = hp;
    const auto start = std::chrono::steady_clock::now();
    try {
        if (plan.folds.empty()) throw PreconditionError("fold plan has no folds");
        for (std::size_t f = 0; f < plan.folds.size(); ++f) {
            const double score = trainer(hp, plan.folds[f], f);
            if (!std::isfinite(score)) throw TrainingError("fold " + std::to_string(f) + " produced a non-finite score");
            t.fold_mmcc.push_back(score);
        }
        double sum = 0.0;
        for (double s : t.fold_mmcc) sum += s;
        t.objective = sum / static_cast<double>(t.fold_mmcc.size());
    } catch (const std::exception& e) {
        t.status = TrialStatus::Failed;
        t.objective.reset();
        t.error = e.what();
    }
    t.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return t;
}

StudyResult run_study(const SearchSpace& space, std::uint32_t n_trials, const FoldPlan& plan,
                      const FoldTrainer& trainer, std::uint64_t seed, Sampler* sampler,
                      const std::function<void(const Trial&)>& on_trial) {
    space.validate();
    if (n_trials < 1) throw ArgumentError("n_trials must be >= 1");
    RandomSampler fallback;
    Sampler& s = sampler ? *sampler : fallback;
    const Rng root = Rng(seed).split("sampler");

    StudyResult result;
    std::optional<std::size_t> best;
    for (std::uint32_t i = 0; i < n_trials; ++i) {
        Rng rng = root.split(static_cast<std::uint64_t>(i));
        const Hyperparams hp = s.sample(space, result.trials, rng);
        result.trials.push_back(run_trial(static_cast<int>(i), hp, plan, trainer));
        const Trial& t = result.trials.back();
        if (on_trial) on_trial(t);
        if (t.objective && (!best || *t.objective > *result.trials[*best].objective)) best = result.trials.size() - 1;
    }
    if (!best) throw StudyError("all " + std::to_string(n_trials) + " trials failed");
    result.best = *best;
    return result;
}

std::string trial_json(const Trial& t) {
    nlohmann::ordered_json j;
    j["id"] = t.id;
    j["status"] = t.status == TrialStatus::Complete ? "complete" : "failed";
    j["hyperparameters"] = {{"learning_rate", t.hp.learning_rate}, {"batch_size", t.hp.batch_size},
                            {"base_filters", t.hp.base_filters},   {"kernel_size", t.hp.kernel_size},
                            {"dropout", t.hp.dropout},             {"alpha", t.hp.alpha},
                            {"beta", t.hp.beta},                   {"gamma", t.hp.gamma}};
    j["fold_mmcc"] = t.fold_mmcc;
    j["objective"] = t.objective ? nlohmann::ordered_json(*t.objective) : nlohmann::ordered_json(nullptr);
    j["wall_seconds"] = t.wall_seconds;
    if (!t.error.empty()) j["error"] = t.error;
    return j.dump();
}

FoldTrainer unet_fold_trainer(const GeoGrid& image, const GeoGrid& labels, const std::vector<Tile>& tiles,
                              const FoldTrainingSetup& setup) {
    return [&image, &labels, &tiles, setup](const Hyperparams& hp, const Fold& fold, std::size_t fold_index) {
        UNetConfig ucfg;
        ucfg.in_channels = setup.in_channels;
        ucfg.base_filters = hp.base_filters;
        ucfg.kernel_size = hp.kernel_size;
        ucfg.depth = setup.depth;
        ucfg.dropout = static_cast<float>(hp.dropout);
        TrainConfig tcfg;
        tcfg.learning_rate = hp.learning_rate;
        tcfg.batch_size = hp.batch_size;
        tcfg.max_epochs = setup.max_epochs;
        tcfg.patience = setup.patience;
        tcfg.seed = Rng(setup.seed).split(static_cast<std::uint64_t>(fold_index)).next();
        tcfg.threads = setup.threads;
        LossConfig lcfg;
        lcfg.alpha = hp.alpha;
        lcfg.gamma = hp.gamma;

        Rng init_rng = Rng(tcfg.seed).split("init");
        const auto train_set = gather_samples(image, labels, tiles, fold.train);
        const auto val_set = gather_samples(image, labels, tiles, fold.val);
        const TrainResult r = train(init_params<float>(ucfg, init_rng), tcfg, lcfg, train_set, val_set);
        return r.history.at(r.best_epoch - 1).val_mmcc;
    };
}

} // namespace sd
