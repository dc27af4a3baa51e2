#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "frpt/backbone.hpp"
#include "frpt/cah.hpp"
#include "frpt/dpp.hpp"
#include "frpt/retrieval.hpp"
#include "frpt/synthdata.hpp"

namespace frpt {

// Which parts of the pipeline are active. All-off except the classifier is
// the frozen pre-training baseline.
struct Ablation {
    bool use_dpp = true;
    bool use_cah = true;
    bool use_instance_norm = true;
    bool finetune_backbone = false;
};

// The learnable state: prompt kernel, attention weights and classifier.
template <typename T>
struct FrptParams {
    DppParams<T> dpp;
    CahParams<T> cah;
    Tensor<T> clf_w;  // [K, C_P]
    Tensor<T> clf_b;  // [K]

    // Disabled modules are frozen so they never receive gradient.
    void apply_ablation(const Ablation& ablation);

    template <typename U>
    FrptParams<U> cast() const {
        FrptParams<U> p;
        p.dpp = {dpp.w_k.template cast<U>(), dpp.sigma, dpp.gaussian_std};
        p.cah = {cah.w_f.template cast<U>(), cah.w_l.template cast<U>(), cah.reduction, cah.epsilon};
        p.clf_w = clf_w.template cast<U>();
        p.clf_b = clf_b.template cast<U>();
        return p;
    }
};

struct ParamInit {
    std::size_t image_size = 32;
    std::size_t n_classes = 16;
    double gaussian_std = 0.25;
    std::size_t reduction = 8;
    double epsilon = 1e-5;
    std::uint64_t seed = 0;
};

// Zero prompt kernel, He-initialized w_f, zero w_l, small random classifier.
FrptParams<float> make_frpt_params(const BackboneModel<float>& backbone, const ParamInit& init);

// sigma^2 C_S + 2 C_P^2 / r + K (C_P + 1), dropping disabled modules.
std::size_t frpt_parameter_count(std::size_t sigma, std::size_t c_s, std::size_t c_p, std::size_t reduction,
                                 std::size_t n_classes, const Ablation& ablation);

// Number of elements in tensors that currently require grad.
template <typename T>
std::size_t learnable_count(const FrptParams<T>& params, const BackboneModel<T>& backbone);

template <typename T>
struct ForwardResult {
    std::optional<DppOutput<T>> dpp;
    Var<T> semantic;   // M_P
    Var<T> features;   // M_R (== M_P without the head)
    Var<T> embedding;  // gap(M_R)
    std::optional<Var<T>> logits;
};

template <typename T>
ForwardResult<T> frpt_forward(Record<T>& rec, Var<T> image, BackboneModel<T>& backbone, FrptParams<T>& params,
                              const Ablation& ablation, bool with_logits);

// gap(M_R) for one image; no classifier.
template <typename T>
std::vector<float> embed(const Tensor<T>& image, BackboneModel<T>& backbone, FrptParams<T>& params,
                         const Ablation& ablation);

// Embeds every sample in order. Labels are the samples' class ids.
EmbeddingIndex build_index(const std::vector<const Sample*>& samples, BackboneModel<float>& backbone,
                           FrptParams<float>& params, const Ablation& ablation);

// Checkpoint arrays: dpp/w_k, cah/w_f, cah/w_l, clf/w, clf/b, meta/flags,
// meta/dpp (sigma, gaussian_std), meta/cah (reduction, epsilon), and with
// finetuning the backbone under "backbone/".
struct Checkpoint {
    FrptParams<float> params;
    Ablation ablation;
    std::optional<BackboneModel<float>> backbone;
};

ArrayList checkpoint_to_arrays(const FrptParams<float>& params, const Ablation& ablation,
                               const BackboneModel<float>* finetuned_backbone);
Checkpoint checkpoint_from_arrays(const ArrayList& arrays);
void save_checkpoint(const std::filesystem::path& path, const FrptParams<float>& params, const Ablation& ablation,
                     const BackboneModel<float>* finetuned_backbone = nullptr);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace frpt
