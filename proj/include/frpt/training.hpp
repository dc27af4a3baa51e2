#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "frpt/model.hpp"

namespace frpt {

struct TrainConfig {
    double lr0 = 1e-3;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    std::size_t batch_size = 32;
    std::size_t epochs = 200;
    double lr_decay = 0.9;
    std::size_t lr_decay_every = 50;
    std::uint64_t seed = 0;
    double gaussian_std = 0.25;
    bool augment_flip = true;
    bool augment_crop = true;
    std::size_t checkpoint_every = 10;  // 0 = final checkpoint only
    std::size_t reduction = 8;
    double epsilon = 1e-5;
    std::size_t recall_subset = 128;  // training images scored for the per-epoch Recall@1
    std::size_t shots = 0;            // images per training class, 0 = all
    std::size_t threads = 1;          // 0 = hardware concurrency
    Ablation ablation;

    void validate() const;
};

// Unknown keys are rejected with ConfigError.
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// lr0 * lr_decay ^ floor(epoch / lr_decay_every)
double lr_schedule(std::size_t epoch, const TrainConfig& cfg);

// v <- momentum * v + (grad + weight_decay * param); param <- param - lr * v.
// Throws NumericError before touching anything if grad holds NaN/Inf.
template <typename T>
void sgd_update(std::span<T> param, std::span<const T> grad, std::span<T> velocity, double lr, double momentum,
                double weight_decay);

// Horizontal flip and a random crop from a 9/8-upscaled canvas.
Tensor<float> augment(const Tensor<float>& image, bool flip, bool crop, std::mt19937_64& rng);

// One SGD step over the prompt, head and classifier parameters (plus the
// backbone when finetuning). Per-image records may run on several threads;
// gradients are deposited in batch order so results do not depend on the
// thread count.
class Trainer {
   public:
    Trainer(BackboneModel<float>& backbone, FrptParams<float>& params, const TrainConfig& cfg);

    // Mean cross-entropy over the batch. Throws NumericError on a non-finite
    // loss without updating any parameter.
    double train_step(std::span<const Tensor<float>* const> images, std::span<const std::size_t> labels, double lr);

    std::size_t learnable_parameters() const;

   private:
    struct Slot {
        Tensor<float>* tensor;
        std::vector<float> velocity;
        bool decay;
    };

    BackboneModel<float>& backbone_;
    FrptParams<float>& params_;
    TrainConfig cfg_;
    std::vector<Slot> slots_;
};

struct EpochLog {
    std::size_t epoch;
    double lr;
    double loss;
    double recall1;
};

struct TrainOutcome {
    std::vector<EpochLog> log;
    FrptParams<float> params;
    Ablation ablation;
    std::optional<BackboneModel<float>> finetuned_backbone;
    std::size_t learnable_parameters = 0;
    std::size_t formula_parameters = 0;
};

// Training classes are the first half of the canonical class list; any sample
// from the other half, or a manifest whose splits disagree with that rule, is
// rejected with ConfigError. With `out_dir`, writes metrics.csv
// ("epoch,lr,loss,recall1") and checkpoint.frpt, refreshing the checkpoint every
// `checkpoint_every` epochs. A non-finite loss aborts with NumericError and
// leaves the last written checkpoint in place.
TrainOutcome train(const TrainConfig& cfg, const Dataset& data, const BackboneModel<float>& backbone,
                   const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// Training samples after the open-set check and the few-shot cut.
std::vector<const Sample*> training_samples(const Dataset& data, std::size_t shots);

std::string metrics_csv(const std::vector<EpochLog>& log);

struct EvalRow {
    std::size_t k;
    double recall;
};

inline constexpr std::array<std::size_t, 4> kEvalKs{1, 2, 4, 8};

// Open-set Recall@K over the test split.
std::vector<EvalRow> evaluate_open_set(const Dataset& data, BackboneModel<float>& backbone, FrptParams<float>& params,
                                       const Ablation& ablation, std::span<const std::size_t> ks = kEvalKs);

// "k,recall" rows.
std::string recall_csv(const std::vector<EvalRow>& rows);

}  // namespace frpt
