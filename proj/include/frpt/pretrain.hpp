#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "frpt/backbone.hpp"
#include "frpt/synthdata.hpp"

namespace frpt {

// Species-level surrogate pre-training for the desk backbone.
struct PretrainConfig {
    std::size_t epochs = 15;
    double lr = 0.02;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    std::size_t batch_size = 32;
    std::size_t holdout_every = 5;  // every n-th image is held out for accuracy
    bool augment = true;
    std::size_t threads = 1;
    std::uint64_t seed = 0;
};

struct PretrainReport {
    std::vector<double> epoch_loss;
    double heldout_accuracy = 0.0;
    double chance = 0.0;
    std::size_t train_images = 0;
    std::size_t heldout_images = 0;
};

// Trains the desk architecture end-to-end with a linear species classifier on
// gap of the last stage, using the training-split images only. The returned
// model is frozen. Throws NumericError when the loss diverges.
BackboneModel<float> pretrain_backbone(const Dataset& data, const PretrainConfig& cfg,
                                       PretrainReport* report = nullptr);

}  // namespace frpt
