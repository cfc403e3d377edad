#include "sd/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "sd/error.hpp"

namespace sd {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ArgumentError("learning_rate must be > 0");
    if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
    if (max_epochs < 1) throw ArgumentError("max_epochs must be >= 1");
    if (patience >= max_epochs) throw ArgumentError("patience must be < max_epochs");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
        throw ArgumentError("Adam betas must lie in [0, 1)");
    if (!(adam_eps > 0.0)) throw ArgumentError("adam_eps must be > 0");
    if (threads < 1) throw ArgumentError("threads must be >= 1");
}

Sample make_sample(const TileData& tile) {
    if (!tile.labels) throw PreconditionError("tile has no labels");
    Sample s;
    s.channels = tile.image.channels();
    s.height = tile.image.height();
    s.width = tile.image.width();
    s.image = tile.image.values();
    s.labels.resize(tile.labels->values().size());
    for (std::size_t i = 0; i < s.labels.size(); ++i) s.labels[i] = static_cast<std::uint8_t>(tile.labels->values()[i]);
    s.valid = tile.valid;
    return s;
}

std::vector<Sample> gather_samples(const GeoGrid& image, const GeoGrid& labels, const std::vector<Tile>& tiles,
                                   const std::vector<int>& ids) {
    std::vector<Sample> out;
    out.reserve(ids.size());
    for (int id : ids) {
        auto it = std::find_if(tiles.begin(), tiles.end(), [id](const Tile& t) { return t.id == id; });
        if (it == tiles.end()) throw ArgumentError("unknown tile id " + std::to_string(id));
        out.push_back(make_sample(cut_tile(image, &labels, it->window)));
    }
    return out;
}

namespace {

struct Batch {
    Tensor<float> input;
    Labels labels;
};

Batch make_batch(const std::vector<Sample>& samples, const std::vector<std::size_t>& order, std::size_t begin,
                 std::size_t end) {
    const Sample& first = samples[order[begin]];
    const std::size_t plane = static_cast<std::size_t>(first.height) * first.width;
    const std::size_t img = plane * first.channels;
    Batch b;
    const auto n = static_cast<std::uint32_t>(end - begin);
    b.input = Tensor<float>({n, first.channels, first.height, first.width});
    b.labels.batch = n;
    b.labels.height = first.height;
    b.labels.width = first.width;
    b.labels.codes.resize(n * plane);
    b.labels.valid.resize(n * plane);
    for (std::size_t i = begin; i < end; ++i) {
        const Sample& s = samples[order[i]];
        if (s.channels != first.channels || s.height != first.height || s.width != first.width)
            throw ShapeError("samples in a batch must share one shape");
        const std::size_t j = i - begin;
        std::copy(s.image.begin(), s.image.end(), b.input.values.begin() + j * img);
        std::copy(s.labels.begin(), s.labels.end(), b.labels.codes.begin() + j * plane);
        std::copy(s.valid.begin(), s.valid.end(), b.labels.valid.begin() + j * plane);
    }
    return b;
}

} // namespace

Evaluation evaluate_samples(const ModelParams<float>& params, const std::vector<Sample>& samples,
                            const LossConfig& loss_cfg, std::uint32_t batch_size) {
    if (samples.empty()) throw PreconditionError("evaluation needs at least one sample");
    const std::size_t classes = params.cfg.n_classes;
    Evaluation ev{{}, ConfusionMatrix(classes)};
    SoftCounts pooled(classes);
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t b0 = 0; b0 < samples.size(); b0 += batch_size) {
        const std::size_t b1 = std::min(samples.size(), b0 + batch_size);
        Batch batch = make_batch(samples, order, b0, b1);
        const Tensor<float> probs = unet_forward(params, batch.input, false);
        pooled.add(soft_counts(probs, batch.labels));
        const auto pred = argmax_classes(probs);
        ev.cm.merge(confusion(pred, batch.labels.codes, classes, batch.labels.valid));
    }
    ev.score.loss = focal_tversky_loss(pooled, loss_cfg);
    ev.score.mmcc = ev.cm.total() > 0 ? macro_mcc(ev.cm) : 0.0;
    return ev;
}

TrainResult train(ModelParams<float> model, const TrainConfig& cfg, const LossConfig& loss_cfg,
                  const std::vector<Sample>& train_set, const std::vector<Sample>& val_set,
                  const Validator& validator, const EpochCallback& on_epoch) {
    cfg.validate();
    loss_cfg.validate();
    if (train_set.empty()) throw PreconditionError("training needs at least one training tile");
    if (val_set.empty() && !validator) throw PreconditionError("training needs at least one validation tile");

    const Rng root(cfg.seed);
    const Rng shuffle_root = root.split("shuffle");
    const Rng dropout_root = root.split("dropout");

    TrainResult result;
    ModelParams<float> best = model;
    double best_loss = std::numeric_limits<double>::infinity();
    std::uint32_t since_best = 0;
    std::uint64_t step = 0;

    std::vector<std::size_t> order(train_set.size());
    for (std::uint32_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        Rng shuffler = shuffle_root.split(epoch);
        shuffler.shuffle(order);

        double loss_sum = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg.batch_size) {
            const std::size_t b1 = std::min(order.size(), b0 + cfg.batch_size);
            Batch batch = make_batch(train_set, order, b0, b1);
            Rng drop = dropout_root.split(step);
            BatchResult<float> r =
                loss_and_gradients(model, batch.input, batch.labels, loss_cfg, true, &drop, cfg.threads);
            adam_step(model, r.grads, ++step, cfg.adam());
            loss_sum += r.loss;
            ++n_batches;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(n_batches);
        const ValidationScore score =
            validator ? validator(epoch, model) : evaluate_samples(model, val_set, loss_cfg, cfg.batch_size).score;
        rec.val_loss = score.loss;
        rec.val_mmcc = score.mmcc;
        result.history.push_back(rec);
        result.epochs_run = epoch;
        if (on_epoch) on_epoch(rec);

        if (score.loss < best_loss) {
            best_loss = score.loss;
            best = model;
            result.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    if (result.best_epoch == 0) throw TrainingError("validation loss was never finite");
    result.params = std::move(best);
    return result;
}

void write_history_csv(const std::vector<EpochRecord>& history, std::ostream& sink) {
    const auto old = sink.precision(17);
    sink << "epoch,train_loss,val_loss,val_mmcc\n";
    for (const auto& r : history) sink << r.epoch << ',' << r.train_loss << ',' << r.val_loss << ',' << r.val_mmcc << '\n';
    sink.precision(old);
}

std::vector<std::uint8_t> argmax_classes(const Tensor<float>& probs) {
    if (probs.shape.size() != 4) throw ShapeError("probabilities must be [B, C, H, W]");
    const std::size_t B = probs.shape[0], C = probs.shape[1];
    const std::size_t plane = static_cast<std::size_t>(probs.shape[2]) * probs.shape[3];
    std::vector<std::uint8_t> out(B * plane);
    for (std::size_t b = 0; b < B; ++b) {
        const float* p = probs.data() + b * C * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            std::size_t best = 0;
            for (std::size_t c = 1; c < C; ++c)
                if (p[c * plane + i] > p[best * plane + i]) best = c;
            out[b * plane + i] = static_cast<std::uint8_t>(best);
        }
    }
    return out;
}

GeoGrid predict(const ModelParams<float>& params, const GeoGrid& image) {
    if (image.channels() != params.cfg.in_channels)
        throw ShapeError("image has " + std::to_string(image.channels()) + " channels, model expects " +
                         std::to_string(params.cfg.in_channels));
    Tensor<float> input({1, image.channels(), image.height(), image.width()});
    input.values = image.values();
    const auto classes = argmax_classes(unet_forward(params, input, false));
    GeoGrid mask(image.spec(), 1, DType::U8, {"class"});
    std::copy(classes.begin(), classes.end(), mask.values().begin());
    return mask;
}

GeoGrid predict_grid(const ModelParams<float>& params, const GeoGrid& image, std::uint32_t tile_px) {
    GeoGrid mask(image.spec(), 1, DType::U8, {"class"});
    for (const Tile& t : make_tiles(image.spec(), tile_px)) {
        const TileData td = cut_tile(image, nullptr, t.window);
        const GeoGrid pred = predict(params, td.image);
        for (std::uint32_t r = 0; r < t.window.n_rows; ++r) {
            const std::int64_t gr = t.window.row0 + r;
            if (gr >= image.height()) break;
            for (std::uint32_t c = 0; c < t.window.n_cols; ++c) {
                const std::int64_t gc = t.window.col0 + c;
                if (gc >= image.width()) break;
                mask.at(0, static_cast<std::uint32_t>(gr), static_cast<std::uint32_t>(gc)) = pred.at(0, r, c);
            }
        }
    }
    return mask;
}

} // namespace sd
