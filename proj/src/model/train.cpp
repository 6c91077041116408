#include "caevpr/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "caevpr/adam.hpp"
#include "caevpr/error.hpp"

namespace caevpr {

void TrainConfig::validate() const {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be >= 0");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (checkpoint_every < 0) throw ConfigError("checkpoint interval must be >= 0");
    if (!(layernorm.epsilon > 0.0f)) throw ConfigError("layernorm epsilon must be > 0");
}

namespace {

// Population mean and variance over every value of every record.
void fit_frozen_stats(const FeatureMapSet& set, LayerNormConfig& cfg) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < set.size(); ++i)
        for (float v : set.record(i)) {
            sum += v;
            ++count;
        }
    const double mean = sum / static_cast<double>(count);
    double sq = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i)
        for (float v : set.record(i)) sq += (v - mean) * (v - mean);
    cfg.frozen_mean = static_cast<float>(mean);
    cfg.frozen_var = static_cast<float>(sq / static_cast<double>(count));
}

}  // namespace

double train_step(CaeModel& model, const Tensor4& features, double lr) {
    const ForwardTrace trace = forward_traced(model, features);
    const double loss = backward(model, trace);
    if (!std::isfinite(loss)) {
        for (Param* p : model.params()) p->zero_grad();
        return loss;
    }
    const auto params = model.params();
    adam_step(params, AdamOptions{lr, 0.9, 0.999, 1e-8});
    return loss;
}

double evaluate_loss(CaeModel& model, const FeatureMapSet& set, int batch_size) {
    if (set.empty()) throw DataError("cannot evaluate on an empty feature map set");
    double total = 0.0;
    for (std::size_t first = 0; first < set.size(); first += static_cast<std::size_t>(batch_size)) {
        const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(batch_size), set.size() - first);
        total += reconstruct(model, set.batch(first, n), Mode::eval).loss * static_cast<double>(n);
    }
    return total / static_cast<double>(set.size());
}

TrainingLog train(CaeModel& model, const FeatureMapSet& train_set, const FeatureMapSet* val_set,
                  const TrainConfig& cfg, const CheckpointSink& on_checkpoint) {
    cfg.validate();
    if (train_set.empty()) throw DataError("training set is empty");
    if (!(train_set.dims() == model.spec.input))
        throw DimensionError("training feature maps are " + train_set.dims().str() +
                             ", model expects " + model.spec.input.str());
    if (val_set && !val_set->empty() && !(val_set->dims() == model.spec.input))
        throw DimensionError("validation feature maps are " + val_set->dims().str() +
                             ", model expects " + model.spec.input.str());

    model.layernorm = cfg.layernorm;
    if (cfg.layernorm.mode == LayerNormMode::frozen_stats &&
        !(cfg.layernorm.frozen_mean && cfg.layernorm.frozen_var))
        fit_frozen_stats(train_set, model.layernorm);
    model.layernorm.validate();

    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);

    TrainingLog log;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);
        double total = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t first = 0; first < order.size(); first += batch, ++batch_index) {
            const std::size_t n = std::min(batch, order.size() - first);
            const Tensor4 x = train_set.batch(std::span(order).subspan(first, n));
            const double loss = train_step(model, x, cfg.lr);
            if (!std::isfinite(loss))
                throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + " batch " +
                                   std::to_string(batch_index));
            log.step_losses.push_back(loss);
            total += loss * static_cast<double>(n);
        }
        EpochLog entry{epoch, total / static_cast<double>(order.size()), std::nullopt};
        if (val_set && !val_set->empty()) entry.val_loss = evaluate_loss(model, *val_set, cfg.batch_size);
        log.epochs.push_back(entry);
        if (on_checkpoint && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0)
            on_checkpoint(epoch, model);
    }
    return log;
}

}  // namespace caevpr
