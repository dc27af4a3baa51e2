#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "frpt/container.hpp"
#include "frpt/record.hpp"

namespace frpt {

// One conv -> relu stage. Padding is kernel/2.
template <typename T>
struct ConvStage {
    Tensor<T> weight;  // [C_out, C_in, k, k]
    Tensor<T> bias;    // [C_out]
    int stride = 1;
};

struct StageSpec {
    std::size_t in_channels;
    std::size_t out_channels;
    std::size_t kernel;
    int stride;
};

// Layered convolutional representation model. The output of stage
// `block1_tap` provides low-level features; the last stage provides the
// semantic features.
template <typename T>
class BackboneModel {
   public:
    BackboneModel() = default;
    BackboneModel(std::vector<ConvStage<T>> stages, std::size_t block1_tap);

    const std::vector<ConvStage<T>>& stages() const noexcept { return stages_; }
    std::vector<ConvStage<T>>& stages() noexcept { return stages_; }
    std::size_t block1_tap() const noexcept { return block1_tap_; }
    std::size_t channels_block1() const { return stages_.at(block1_tap_).weight.dim(0); }
    std::size_t channels_out() const { return stages_.back().weight.dim(0); }
    std::size_t parameter_count() const;

    // Spatial extent after stages [0, through] for an input of extent `in`.
    std::size_t output_extent(std::size_t in, std::size_t through) const;

    void set_trainable(bool on);
    bool frozen() const;

    template <typename U>
    BackboneModel<U> cast() const {
        std::vector<ConvStage<U>> out;
        for (const auto& s : stages_) out.push_back({s.weight.template cast<U>(), s.bias.template cast<U>(), s.stride});
        return BackboneModel<U>(std::move(out), block1_tap_);
    }

   private:
    std::vector<ConvStage<T>> stages_;
    std::size_t block1_tap_ = 0;
};

// conv3x3(3->16)-relu, conv3x3/2(16->16)-relu [tap], conv3x3(16->32)-relu,
// conv3x3/2(32->64)-relu.
std::vector<StageSpec> desk_architecture();
inline constexpr std::size_t kDeskBlock1Tap = 1;

// He-initialized, frozen.
BackboneModel<float> make_backbone(const std::vector<StageSpec>& arch, std::size_t block1_tap, std::uint64_t seed);

// Low-level features: stages [0, block1_tap].
template <typename T>
Var<T> block1_forward(Record<T>& rec, BackboneModel<T>& model, Var<T> image);

// Semantic features: all stages.
template <typename T>
Var<T> full_forward(Record<T>& rec, BackboneModel<T>& model, Var<T> image);

// Arrays "stage<i>/w", "stage<i>/b", "stage<i>/stride", "meta/block1_tap",
// "meta/channels" (= C_P).
ArrayList backbone_to_arrays(const BackboneModel<float>& model, const std::string& prefix = "");
// Result is frozen. Throws StructureError on inconsistent metadata.
BackboneModel<float> backbone_from_arrays(const ArrayList& arrays, const std::string& prefix = "");

void save_weights(const std::filesystem::path& path, const BackboneModel<float>& model);
BackboneModel<float> load_weights(const std::filesystem::path& path);

extern template class BackboneModel<float>;
extern template class BackboneModel<double>;

}  // namespace frpt
