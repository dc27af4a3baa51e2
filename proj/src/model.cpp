#include "frpt/model.hpp"

#include <random>

#include "frpt/ops.hpp"
#include "frpt/parallel.hpp"

namespace frpt {

template <typename T>
void FrptParams<T>::apply_ablation(const Ablation& ablation) {
    dpp.w_k.set_requires_grad(ablation.use_dpp);
    cah.w_f.set_requires_grad(ablation.use_cah);
    cah.w_l.set_requires_grad(ablation.use_cah);
    clf_w.set_requires_grad(true);
    clf_b.set_requires_grad(true);
}

template struct FrptParams<float>;
template struct FrptParams<double>;

FrptParams<float> make_frpt_params(const BackboneModel<float>& backbone, const ParamInit& init) {
    const std::size_t c_s = backbone.channels_block1();
    const std::size_t c_p = backbone.channels_out();
    const std::size_t w_s = backbone.output_extent(init.image_size, backbone.block1_tap());
    // Hyperparameters are stored as binary32 in checkpoints; round now so a
    // reloaded model computes exactly what training computed.
    const double std_f = static_cast<float>(init.gaussian_std);
    const double eps_f = static_cast<float>(init.epsilon);
    FrptParams<float> p;
    p.dpp = make_dpp_params<float>(c_s, w_s, std_f);
    p.cah = make_cah_params<float>(c_p, init.reduction, eps_f, init.seed ^ 0xCA11ULL);
    p.clf_w = Tensor<float>({init.n_classes, c_p});
    std::mt19937_64 rng(init.seed ^ 0xC1F0ULL);
    std::normal_distribution<double> dist(0.0, 0.01);
    for (auto& v : p.clf_w.data()) v = static_cast<float>(dist(rng));
    p.clf_b = Tensor<float>({init.n_classes});
    p.apply_ablation(Ablation{});
    return p;
}

std::size_t frpt_parameter_count(std::size_t sigma, std::size_t c_s, std::size_t c_p, std::size_t reduction,
                                 std::size_t n_classes, const Ablation& ablation) {
    std::size_t n = n_classes * (c_p + 1);
    if (ablation.use_dpp) n += sigma * sigma * c_s;
    if (ablation.use_cah) n += 2 * c_p * c_p / reduction;
    return n;
}

template <typename T>
std::size_t learnable_count(const FrptParams<T>& params, const BackboneModel<T>& backbone) {
    std::size_t n = 0;
    auto count = [&n](const Tensor<T>& t) {
        if (t.requires_grad()) n += t.size();
    };
    count(params.dpp.w_k);
    count(params.cah.w_f);
    count(params.cah.w_l);
    count(params.clf_w);
    count(params.clf_b);
    for (const auto& s : backbone.stages()) {
        count(s.weight);
        count(s.bias);
    }
    return n;
}

template <typename T>
ForwardResult<T> frpt_forward(Record<T>& rec, Var<T> image, BackboneModel<T>& backbone, FrptParams<T>& params,
                              const Ablation& ablation, bool with_logits) {
    ForwardResult<T> r;
    Var<T> x = image;
    if (ablation.use_dpp) {
        r.dpp = dpp_forward(rec, image, backbone, params.dpp);
        x = r.dpp->prompted;
    }
    r.semantic = full_forward(rec, backbone, x);
    r.features = ablation.use_cah ? cah_apply(rec, r.semantic, params.cah, ablation.use_instance_norm) : r.semantic;
    r.embedding = gap(r.features);
    if (with_logits) {
        r.logits = fc(r.embedding, rec.leaf(params.clf_w), std::optional<Var<T>>(rec.leaf(params.clf_b)));
    }
    return r;
}

template <typename T>
std::vector<float> embed(const Tensor<T>& image, BackboneModel<T>& backbone, FrptParams<T>& params,
                         const Ablation& ablation) {
    Record<T> rec;
    const ForwardResult<T> r = frpt_forward(rec, rec.leaf(image), backbone, params, ablation, false);
    auto v = r.embedding.value();
    return std::vector<float>(v.begin(), v.end());
}

EmbeddingIndex build_index(const std::vector<const Sample*>& samples, BackboneModel<float>& backbone,
                           FrptParams<float>& params, const Ablation& ablation) {
    std::vector<std::vector<float>> emb(samples.size());
    parallel_for(samples.size(), 0, [&](std::size_t i) { emb[i] = embed(samples[i]->image, backbone, params, ablation); });
    EmbeddingIndex index;
    for (std::size_t i = 0; i < samples.size(); ++i) index.add(std::move(emb[i]), samples[i]->subcat, samples[i]->id);
    return index;
}

ArrayList checkpoint_to_arrays(const FrptParams<float>& params, const Ablation& ablation,
                               const BackboneModel<float>* finetuned_backbone) {
    auto frozen = [](const Tensor<float>& t) {
        Tensor<float> c = t;
        c.set_requires_grad(false);
        return c;
    };
    ArrayList a;
    a.push_back({"dpp/w_k", frozen(params.dpp.w_k)});
    a.push_back({"cah/w_f", frozen(params.cah.w_f)});
    a.push_back({"cah/w_l", frozen(params.cah.w_l)});
    a.push_back({"clf/w", frozen(params.clf_w)});
    a.push_back({"clf/b", frozen(params.clf_b)});
    a.push_back({"meta/flags", Tensor<float>({4}, {ablation.use_dpp ? 1.0f : 0.0f, ablation.use_cah ? 1.0f : 0.0f,
                                                   ablation.use_instance_norm ? 1.0f : 0.0f,
                                                   ablation.finetune_backbone ? 1.0f : 0.0f})});
    a.push_back({"meta/dpp", Tensor<float>({2}, {static_cast<float>(params.dpp.sigma),
                                                 static_cast<float>(params.dpp.gaussian_std)})});
    a.push_back({"meta/cah", Tensor<float>({2}, {static_cast<float>(params.cah.reduction),
                                                 static_cast<float>(params.cah.epsilon)})});
    if (finetuned_backbone) {
        for (auto& arr : backbone_to_arrays(*finetuned_backbone, "backbone/")) a.push_back(std::move(arr));
    }
    return a;
}

Checkpoint checkpoint_from_arrays(const ArrayList& arrays) {
    const auto& flags = require_array(arrays, "meta/flags");
    const auto& dmeta = require_array(arrays, "meta/dpp");
    const auto& cmeta = require_array(arrays, "meta/cah");
    if (flags.size() != 4 || dmeta.size() != 2 || cmeta.size() != 2) {
        throw StructureError("checkpoint metadata arrays have unexpected lengths");
    }
    Checkpoint ck;
    ck.ablation = {flags[0] != 0.0f, flags[1] != 0.0f, flags[2] != 0.0f, flags[3] != 0.0f};
    auto& p = ck.params;
    p.dpp.w_k = require_array(arrays, "dpp/w_k");
    p.dpp.sigma = static_cast<int>(dmeta[0]);
    p.dpp.gaussian_std = static_cast<double>(dmeta[1]);
    p.cah.w_f = require_array(arrays, "cah/w_f");
    p.cah.w_l = require_array(arrays, "cah/w_l");
    p.cah.reduction = static_cast<std::size_t>(cmeta[0]);
    p.cah.epsilon = static_cast<double>(cmeta[1]);
    p.clf_w = require_array(arrays, "clf/w");
    p.clf_b = require_array(arrays, "clf/b");
    if (p.clf_w.rank() != 2 || p.clf_b.rank() != 1 || p.clf_b.dim(0) != p.clf_w.dim(0)) {
        throw StructureError("classifier weight and bias shapes disagree");
    }
    validate_cah(p.cah, p.cah.w_l.dim(0));
    if (p.clf_w.dim(1) != p.cah.w_l.dim(0)) throw StructureError("classifier width does not match head channels");
    if (find_array(arrays, "backbone/meta/channels")) ck.backbone = backbone_from_arrays(arrays, "backbone/");
    if (ck.ablation.finetune_backbone && !ck.backbone) {
        throw StructureError("finetuned checkpoint is missing its backbone arrays");
    }
    p.apply_ablation(ck.ablation);
    return ck;
}

void save_checkpoint(const std::filesystem::path& path, const FrptParams<float>& params, const Ablation& ablation,
                     const BackboneModel<float>* finetuned_backbone) {
    write_container(path, checkpoint_to_arrays(params, ablation, finetuned_backbone));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return checkpoint_from_arrays(read_container(path)); }

template std::size_t learnable_count<float>(const FrptParams<float>&, const BackboneModel<float>&);
template std::size_t learnable_count<double>(const FrptParams<double>&, const BackboneModel<double>&);
template ForwardResult<float> frpt_forward<float>(Record<float>&, Var<float>, BackboneModel<float>&,
                                                  FrptParams<float>&, const Ablation&, bool);
template ForwardResult<double> frpt_forward<double>(Record<double>&, Var<double>, BackboneModel<double>&,
                                                    FrptParams<double>&, const Ablation&, bool);
template std::vector<float> embed<float>(const Tensor<float>&, BackboneModel<float>&, FrptParams<float>&,
                                         const Ablation&);
template std::vector<float> embed<double>(const Tensor<double>&, BackboneModel<double>&, FrptParams<double>&,
                                          const Ablation&);

}  // namespace frpt
