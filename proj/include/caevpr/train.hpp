#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "caevpr/fmap.hpp"
#include "caevpr/model.hpp"
#include "caevpr/ops.hpp"

namespace caevpr {

struct TrainConfig {
    double lr = 1e-3;
    int batch_size = 128;
    int epochs = 50;
    std::uint64_t seed = 0;
    LayerNormConfig layernorm;
    bool shuffle = true;
    int checkpoint_every = 0;  // epochs; 0 disables periodic checkpoints

    void validate() const;
};

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;
    std::optional<double> val_loss;
};

struct TrainingLog {
    std::vector<EpochLog> epochs;
    std::vector<double> step_losses;
};

using CheckpointSink = std::function<void(int epoch, const CaeModel& model)>;

/// Minibatch Adam on the reconstruction loss. Deterministic for a given
/// seed. In frozen_stats layer-norm mode without stored statistics, the
/// global mean and variance of `train_set` are computed first and stored on
/// the model.
TrainingLog train(CaeModel& model, const FeatureMapSet& train_set, const FeatureMapSet* val_set,
                  const TrainConfig& cfg, const CheckpointSink& on_checkpoint = {});

// One forward/backward/Adam update on a batch; returns the pre-update loss.
double train_step(CaeModel& model, const Tensor4& features, double lr);

// Mean eval-mode reconstruction loss over a set.
double evaluate_loss(CaeModel& model, const FeatureMapSet& set, int batch_size);

}  // namespace caevpr
