#include "frpt/backbone.hpp"

#include <cmath>
#include <random>

#include "frpt/ops.hpp"

namespace frpt {

template <typename T>
BackboneModel<T>::BackboneModel(std::vector<ConvStage<T>> stages, std::size_t block1_tap)
    : stages_(std::move(stages)), block1_tap_(block1_tap) {
    if (stages_.empty()) throw StructureError("backbone needs at least one stage");
    if (block1_tap_ >= stages_.size()) {
        throw StructureError("block1 tap " + std::to_string(block1_tap_) + " outside " +
                             std::to_string(stages_.size()) + " stages");
    }
    for (std::size_t i = 0; i < stages_.size(); ++i) {
        const auto& s = stages_[i];
        if (s.weight.rank() != 4 || s.bias.rank() != 1 || s.bias.dim(0) != s.weight.dim(0)) {
            throw StructureError("stage " + std::to_string(i) + " has inconsistent weight/bias shapes");
        }
        if (i > 0 && s.weight.dim(1) != stages_[i - 1].weight.dim(0)) {
            throw StructureError("stage " + std::to_string(i) + " input channels do not match previous stage");
        }
        if (s.stride < 1) throw StructureError("stage " + std::to_string(i) + " has stride < 1");
    }
}

template <typename T>
std::size_t BackboneModel<T>::parameter_count() const {
    std::size_t n = 0;
    for (const auto& s : stages_) n += s.weight.size() + s.bias.size();
    return n;
}

template <typename T>
std::size_t BackboneModel<T>::output_extent(std::size_t in, std::size_t through) const {
    std::size_t e = in;
    for (std::size_t i = 0; i <= through && i < stages_.size(); ++i) {
        const std::size_t k = stages_[i].weight.dim(2);
        const std::size_t p = k / 2;
        e = (e + 2 * p - k) / static_cast<std::size_t>(stages_[i].stride) + 1;
    }
    return e;
}

template <typename T>
void BackboneModel<T>::set_trainable(bool on) {
    for (auto& s : stages_) {
        s.weight.set_requires_grad(on);
        s.bias.set_requires_grad(on);
    }
}

template <typename T>
bool BackboneModel<T>::frozen() const {
    for (const auto& s : stages_)
        if (s.weight.requires_grad() || s.bias.requires_grad()) return false;
    return true;
}

std::vector<StageSpec> desk_architecture() {
    return {{3, 16, 3, 1}, {16, 16, 3, 2}, {16, 32, 3, 1}, {32, 64, 3, 2}};
}

BackboneModel<float> make_backbone(const std::vector<StageSpec>& arch, std::size_t block1_tap, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<ConvStage<float>> stages;
    for (const auto& spec : arch) {
        const double fan_in = static_cast<double>(spec.in_channels * spec.kernel * spec.kernel);
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
        Tensor<float> w({spec.out_channels, spec.in_channels, spec.kernel, spec.kernel});
        for (auto& v : w.data()) v = static_cast<float>(dist(rng));
        Tensor<float> b({spec.out_channels}, 0.01f);
        stages.push_back({std::move(w), std::move(b), spec.stride});
    }
    return BackboneModel<float>(std::move(stages), block1_tap);
}

namespace {

template <typename T>
Var<T> run_stages(Record<T>& rec, BackboneModel<T>& model, Var<T> x, std::size_t last) {
    for (std::size_t i = 0; i <= last; ++i) {
        auto& s = model.stages()[i];
        const int pad = static_cast<int>(s.weight.dim(2) / 2);
        x = relu(conv2d(x, rec.leaf(s.weight), std::optional<Var<T>>(rec.leaf(s.bias)), pad, s.stride));
    }
    return x;
}

}  // namespace

template <typename T>
Var<T> block1_forward(Record<T>& rec, BackboneModel<T>& model, Var<T> image) {
    return run_stages(rec, model, image, model.block1_tap());
}

template <typename T>
Var<T> full_forward(Record<T>& rec, BackboneModel<T>& model, Var<T> image) {
    return run_stages(rec, model, image, model.stages().size() - 1);
}

ArrayList backbone_to_arrays(const BackboneModel<float>& model, const std::string& prefix) {
    ArrayList out;
    for (std::size_t i = 0; i < model.stages().size(); ++i) {
        const auto& s = model.stages()[i];
        const std::string base = prefix + "stage" + std::to_string(i) + "/";
        Tensor<float> w = s.weight;
        Tensor<float> b = s.bias;
        w.set_requires_grad(false);
        b.set_requires_grad(false);
        out.push_back({base + "w", std::move(w)});
        out.push_back({base + "b", std::move(b)});
        out.push_back({base + "stride", Tensor<float>({1}, static_cast<float>(s.stride))});
    }
    out.push_back({prefix + "meta/block1_tap", Tensor<float>({1}, static_cast<float>(model.block1_tap()))});
    out.push_back({prefix + "meta/channels", Tensor<float>({1}, static_cast<float>(model.channels_out()))});
    return out;
}

namespace {

std::size_t meta_index(const ArrayList& arrays, const std::string& name) {
    const auto& t = require_array(arrays, name);
    if (t.size() != 1) throw StructureError(name + " must hold exactly one element");
    const float v = t[0];
    if (!(v >= 0.0f) || v != std::floor(v)) throw StructureError(name + " must be a non-negative integer");
    return static_cast<std::size_t>(v);
}

}  // namespace

BackboneModel<float> backbone_from_arrays(const ArrayList& arrays, const std::string& prefix) {
    const std::size_t tap = meta_index(arrays, prefix + "meta/block1_tap");
    const std::size_t channels = meta_index(arrays, prefix + "meta/channels");
    std::vector<ConvStage<float>> stages;
    for (std::size_t i = 0;; ++i) {
        const std::string base = prefix + "stage" + std::to_string(i) + "/";
        if (!find_array(arrays, base + "w")) break;
        ConvStage<float> s{require_array(arrays, base + "w"), require_array(arrays, base + "b"),
                           static_cast<int>(meta_index(arrays, base + "stride"))};
        s.weight.set_requires_grad(false);
        s.bias.set_requires_grad(false);
        stages.push_back(std::move(s));
    }
    BackboneModel<float> model(std::move(stages), tap);
    if (model.channels_out() != channels) {
        throw StructureError("meta/channels says " + std::to_string(channels) + " but last stage has " +
                             std::to_string(model.channels_out()));
    }
    return model;
}

void save_weights(const std::filesystem::path& path, const BackboneModel<float>& model) {
    write_container(path, backbone_to_arrays(model));
}

BackboneModel<float> load_weights(const std::filesystem::path& path) {
    return backbone_from_arrays(read_container(path));
}

template class BackboneModel<float>;
template class BackboneModel<double>;
template Var<float> block1_forward<float>(Record<float>&, BackboneModel<float>&, Var<float>);
template Var<double> block1_forward<double>(Record<double>&, BackboneModel<double>&, Var<double>);
template Var<float> full_forward<float>(Record<float>&, BackboneModel<float>&, Var<float>);
template Var<double> full_forward<double>(Record<double>&, BackboneModel<double>&, Var<double>);

}  // namespace frpt
