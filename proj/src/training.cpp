#include "frpt/training.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <set>

#include <spdlog/spdlog.h>

#include "frpt/ops.hpp"
#include "frpt/parallel.hpp"

namespace frpt {

void TrainConfig::validate() const {
    if (!(lr0 > 0.0)) throw ConfigError("lr0 must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (lr_decay_every < 1) throw ConfigError("lr_decay_every must be >= 1");
    if (!(lr_decay > 0.0)) throw ConfigError("lr_decay must be > 0");
    if (!(gaussian_std > 0.0)) throw ConfigError("gaussian_std must be > 0");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
    if (reduction < 1) throw ConfigError("reduction must be >= 1");
}

namespace {

constexpr std::array<const char*, 21> kTrainKeys{
    "lr0",          "momentum",     "weight_decay", "batch_size",       "epochs",        "lr_decay",
    "lr_decay_every", "seed",       "gaussian_std", "augment_flip",     "augment_crop",  "checkpoint_every",
    "reduction",    "epsilon",      "recall_subset", "shots",           "threads",       "use_dpp",
    "use_cah",      "use_instance_norm", "finetune_backbone"};

}  // namespace

void to_json(nlohmann::json& j, const TrainConfig& c) {
    j = nlohmann::json{{"lr0", c.lr0},
                       {"momentum", c.momentum},
                       {"weight_decay", c.weight_decay},
                       {"batch_size", c.batch_size},
                       {"epochs", c.epochs},
                       {"lr_decay", c.lr_decay},
                       {"lr_decay_every", c.lr_decay_every},
                       {"seed", c.seed},
                       {"gaussian_std", c.gaussian_std},
                       {"augment_flip", c.augment_flip},
                       {"augment_crop", c.augment_crop},
                       {"checkpoint_every", c.checkpoint_every},
                       {"reduction", c.reduction},
                       {"epsilon", c.epsilon},
                       {"recall_subset", c.recall_subset},
                       {"shots", c.shots},
                       {"threads", c.threads},
                       {"use_dpp", c.ablation.use_dpp},
                       {"use_cah", c.ablation.use_cah},
                       {"use_instance_norm", c.ablation.use_instance_norm},
                       {"finetune_backbone", c.ablation.finetune_backbone}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
    if (!j.is_object()) throw ConfigError("train config must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (std::find_if(kTrainKeys.begin(), kTrainKeys.end(), [&](const char* k) { return key == k; }) ==
            kTrainKeys.end()) {
            throw ConfigError("unknown train config field '" + key + "'");
        }
    }
    TrainConfig d;
    c.lr0 = j.value("lr0", d.lr0);
    c.momentum = j.value("momentum", d.momentum);
    c.weight_decay = j.value("weight_decay", d.weight_decay);
    c.batch_size = j.value("batch_size", d.batch_size);
    c.epochs = j.value("epochs", d.epochs);
    c.lr_decay = j.value("lr_decay", d.lr_decay);
    c.lr_decay_every = j.value("lr_decay_every", d.lr_decay_every);
    c.seed = j.value("seed", d.seed);
    c.gaussian_std = j.value("gaussian_std", d.gaussian_std);
    c.augment_flip = j.value("augment_flip", d.augment_flip);
    c.augment_crop = j.value("augment_crop", d.augment_crop);
    c.checkpoint_every = j.value("checkpoint_every", d.checkpoint_every);
    c.reduction = j.value("reduction", d.reduction);
    c.epsilon = j.value("epsilon", d.epsilon);
    c.recall_subset = j.value("recall_subset", d.recall_subset);
    c.shots = j.value("shots", d.shots);
    c.threads = j.value("threads", d.threads);
    c.ablation.use_dpp = j.value("use_dpp", d.ablation.use_dpp);
    c.ablation.use_cah = j.value("use_cah", d.ablation.use_cah);
    c.ablation.use_instance_norm = j.value("use_instance_norm", d.ablation.use_instance_norm);
    c.ablation.finetune_backbone = j.value("finetune_backbone", d.ablation.finetune_backbone);
}

double lr_schedule(std::size_t epoch, const TrainConfig& cfg) {
    const auto steps = static_cast<double>(epoch / cfg.lr_decay_every);
    return cfg.lr0 * std::pow(cfg.lr_decay, steps);
}

template <typename T>
void sgd_update(std::span<T> param, std::span<const T> grad, std::span<T> velocity, double lr, double momentum,
                double weight_decay) {
    if (grad.size() != param.size() || velocity.size() != param.size()) {
        throw ShapeError("sgd_update: param, grad and velocity sizes differ");
    }
    for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!std::isfinite(grad[i])) {
            throw NumericError("non-finite gradient at element " + std::to_string(i) + " of " +
                               std::to_string(grad.size()));
        }
    }
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double v = momentum * velocity[i] + (grad[i] + weight_decay * param[i]);
        velocity[i] = static_cast<T>(v);
        param[i] = static_cast<T>(param[i] - lr * v);
    }
}

template void sgd_update<float>(std::span<float>, std::span<const float>, std::span<float>, double, double, double);
template void sgd_update<double>(std::span<double>, std::span<const double>, std::span<double>, double, double,
                                 double);

namespace {

// Bilinear resize with pixel-centre alignment.
Tensor<float> resize(const Tensor<float>& img, std::size_t out_h, std::size_t out_w) {
    const std::size_t c = img.dim(0), h = img.dim(1), w = img.dim(2);
    Tensor<float> out({c, out_h, out_w});
    const double sy = static_cast<double>(h) / out_h, sx = static_cast<double>(w) / out_w;
    for (std::size_t y = 0; y < out_h; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(h - 1));
        const auto y0 = static_cast<std::size_t>(fy);
        const std::size_t y1 = std::min(y0 + 1, h - 1);
        const double ty = fy - y0;
        for (std::size_t x = 0; x < out_w; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(w - 1));
            const auto x0 = static_cast<std::size_t>(fx);
            const std::size_t x1 = std::min(x0 + 1, w - 1);
            const double tx = fx - x0;
            for (std::size_t ch = 0; ch < c; ++ch) {
                const float* p = img.data().data() + ch * h * w;
                const double v = (1 - ty) * ((1 - tx) * p[y0 * w + x0] + tx * p[y0 * w + x1]) +
                                 ty * ((1 - tx) * p[y1 * w + x0] + tx * p[y1 * w + x1]);
                out.data()[(ch * out_h + y) * out_w + x] = static_cast<float>(v);
            }
        }
    }
    return out;
}

}  // namespace

Tensor<float> augment(const Tensor<float>& image, bool flip, bool crop, std::mt19937_64& rng) {
    if (image.rank() != 3) throw ShapeError("augment expects [C, H, W], got " + to_string(image.shape()));
    const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
    const bool do_flip = flip && std::uniform_int_distribution<int>(0, 1)(rng) == 1;
    std::size_t oy = 0, ox = 0;
    Tensor<float> src = image;
    if (crop) {
        const std::size_t bh = (h * 9 + 4) / 8, bw = (w * 9 + 4) / 8;
        src = resize(image, bh, bw);
        oy = std::uniform_int_distribution<std::size_t>(0, bh - h)(rng);
        ox = std::uniform_int_distribution<std::size_t>(0, bw - w)(rng);
    }
    const std::size_t sh = src.dim(1), sw = src.dim(2);
    Tensor<float> out({c, h, w});
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                const std::size_t sx = ox + (do_flip ? w - 1 - x : x);
                out.data()[(ch * h + y) * w + x] = src.data()[(ch * sh + oy + y) * sw + sx];
            }
    return out;
}

Trainer::Trainer(BackboneModel<float>& backbone, FrptParams<float>& params, const TrainConfig& cfg)
    : backbone_(backbone), params_(params), cfg_(cfg) {
    auto add = [this](Tensor<float>& t, bool decay) {
        if (t.requires_grad()) slots_.push_back({&t, std::vector<float>(t.size(), 0.0f), decay});
    };
    add(params_.dpp.w_k, true);
    add(params_.cah.w_f, true);
    add(params_.cah.w_l, true);
    add(params_.clf_w, true);
    add(params_.clf_b, false);
    for (auto& s : backbone_.stages()) {
        add(s.weight, true);
        add(s.bias, true);
    }
}

std::size_t Trainer::learnable_parameters() const {
    std::size_t n = 0;
    for (const auto& s : slots_) n += s.tensor->size();
    return n;
}

double Trainer::train_step(std::span<const Tensor<float>* const> images, std::span<const std::size_t> labels,
                           double lr) {
    if (images.size() != labels.size() || images.empty()) {
        throw ShapeError("train_step needs a non-empty batch with one label per image");
    }
    const std::size_t n_classes = params_.clf_b.size();
    for (std::size_t l : labels) {
        if (l >= n_classes) throw ShapeError("label " + std::to_string(l) + " outside classifier range");
    }
    for (auto& s : slots_) s.tensor->zero_grad();

    const std::size_t batch = images.size();
    const double inv = 1.0 / static_cast<double>(batch);
    std::vector<std::unique_ptr<Record<float>>> records(batch);
    std::vector<double> losses(batch, 0.0);
    parallel_for(batch, cfg_.threads, [&](std::size_t i) {
        auto rec = std::make_unique<Record<float>>();
        auto fw = frpt_forward(*rec, rec->leaf(*images[i]), backbone_, params_, cfg_.ablation, true);
        Var<float> loss = cross_entropy(*fw.logits, labels[i]);
        losses[i] = loss.item();
        rec->propagate(scale(loss, static_cast<float>(inv)));
        records[i] = std::move(rec);
    });
    double total = 0.0;
    for (double l : losses) total += l;
    const double mean = total * inv;
    if (!std::isfinite(mean)) throw NumericError("non-finite training loss");

    for (auto& rec : records) rec->deposit();
    for (auto& s : slots_) {
        sgd_update<float>(s.tensor->data(), s.tensor->grad(), s.velocity, lr, cfg_.momentum,
                          s.decay ? cfg_.weight_decay : 0.0);
    }
    return mean;
}

std::vector<const Sample*> training_samples(const Dataset& data, std::size_t shots) {
    std::vector<std::size_t> classes(data.n_classes);
    for (std::size_t c = 0; c < classes.size(); ++c) classes[c] = c;
    const ClassSplit split = split_dataset(classes);
    const std::set<std::size_t> train_classes(split.train.begin(), split.train.end());
    for (const auto& s : data.samples) {
        const bool is_train_class = train_classes.count(s.subcat) > 0;
        if (s.split == "train" && !is_train_class) {
            throw ConfigError("test split leaks into training: " + s.id + " has held-out class " +
                              std::to_string(s.subcat));
        }
        if (s.split == "test" && is_train_class) {
            throw ConfigError("test split leaks into training: " + s.id + " is marked test but has training class " +
                              std::to_string(s.subcat));
        }
        if (s.split != "train" && s.split != "test") throw ConfigError("unknown split '" + s.split + "' for " + s.id);
    }
    std::map<std::size_t, std::size_t> taken;
    std::vector<const Sample*> out;
    for (const Sample* s : data.split("train")) {
        if (shots > 0 && taken[s->subcat] >= shots) continue;
        ++taken[s->subcat];
        out.push_back(s);
    }
    if (out.empty()) throw ConfigError("no training samples");
    return out;
}

std::string metrics_csv(const std::vector<EpochLog>& log) {
    std::string s = "epoch,lr,loss,recall1\n";
    char line[128];
    for (const auto& e : log) {
        std::snprintf(line, sizeof line, "%zu,%.9g,%.9g,%.9g\n", e.epoch, e.lr, e.loss, e.recall1);
        s += line;
    }
    return s;
}

std::vector<EvalRow> evaluate_open_set(const Dataset& data, BackboneModel<float>& backbone, FrptParams<float>& params,
                                       const Ablation& ablation, std::span<const std::size_t> ks) {
    const auto test = data.split("test");
    if (test.empty()) throw ConfigError("dataset has no test images");
    const EmbeddingIndex index = build_index(test, backbone, params, ablation);
    std::vector<EvalRow> rows;
    for (std::size_t k : ks) {
        const RecallReport r = recall_report(index, k);
        rows.push_back({k, r.recall});
    }
    return rows;
}

std::string recall_csv(const std::vector<EvalRow>& rows) {
    std::string s = "k,recall\n";
    char line[64];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%zu,%.9g\n", r.k, r.recall);
        s += line;
    }
    return s;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot open " + tmp.string() + " for writing");
        f << text;
        if (!f) throw Error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_checkpoint(const std::filesystem::path& dir, const FrptParams<float>& params, const Ablation& ablation,
                      const BackboneModel<float>* backbone) {
    const auto path = dir / "checkpoint.frpt";
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    save_checkpoint(tmp, params, ablation, backbone);
    std::filesystem::rename(tmp, path);
}

}  // namespace

TrainOutcome train(const TrainConfig& cfg, const Dataset& data, const BackboneModel<float>& backbone,
                   const std::optional<std::filesystem::path>& out_dir) {
    cfg.validate();
    if (!backbone.frozen()) throw ConfigError("train expects a frozen backbone");
    const std::vector<const Sample*> samples = training_samples(data, cfg.shots);

    std::map<std::size_t, std::size_t> label_of;
    for (const Sample* s : samples) label_of.emplace(s->subcat, 0);
    std::size_t next = 0;
    for (auto& [cls, idx] : label_of) idx = next++;
    const std::size_t n_classes = label_of.size();

    BackboneModel<float> model = backbone;
    if (cfg.ablation.finetune_backbone) model.set_trainable(true);

    ParamInit init;
    init.image_size = data.image_size;
    init.n_classes = n_classes;
    init.gaussian_std = cfg.gaussian_std;
    init.reduction = cfg.reduction;
    init.epsilon = cfg.epsilon;
    init.seed = cfg.seed;
    FrptParams<float> params = make_frpt_params(model, init);
    params.apply_ablation(cfg.ablation);

    Trainer trainer(model, params, cfg);
    const std::size_t w_s = model.output_extent(data.image_size, model.block1_tap());
    TrainOutcome outcome;
    outcome.ablation = cfg.ablation;
    outcome.learnable_parameters = trainer.learnable_parameters();
    outcome.formula_parameters =
        frpt_parameter_count(static_cast<std::size_t>(params.dpp.sigma), model.channels_block1(),
                             model.channels_out(), cfg.reduction, n_classes, cfg.ablation) +
        (cfg.ablation.finetune_backbone ? model.parameter_count() : 0);
    spdlog::info("learnable parameters: {} (sigma={} C_S={} W_S={} C_P={} r={} K={}{})", outcome.learnable_parameters,
                 params.dpp.sigma, model.channels_block1(), w_s, model.channels_out(), cfg.reduction, n_classes,
                 cfg.ablation.finetune_backbone ? ", backbone unfrozen" : "");
    if (outcome.learnable_parameters != outcome.formula_parameters) {
        throw Error("learnable parameter count " + std::to_string(outcome.learnable_parameters) +
                    " disagrees with formula " + std::to_string(outcome.formula_parameters));
    }

    std::vector<const Sample*> probe;
    const std::size_t subset = cfg.recall_subset == 0 ? samples.size() : std::min(cfg.recall_subset, samples.size());
    for (std::size_t i = 0; i < subset; ++i) probe.push_back(samples[i * samples.size() / subset]);

    if (out_dir) std::filesystem::create_directories(*out_dir);
    const BackboneModel<float>* saved_backbone = cfg.ablation.finetune_backbone ? &model : nullptr;

    std::mt19937_64 rng(cfg.seed ^ 0x7EA1ULL);
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = lr_schedule(epoch, cfg);
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<Tensor<float>> imgs;
            std::vector<std::size_t> labels;
            imgs.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                const Sample* s = samples[order[i]];
                imgs.push_back(augment(s->image, cfg.augment_flip, cfg.augment_crop, rng));
                labels.push_back(label_of.at(s->subcat));
            }
            std::vector<const Tensor<float>*> ptrs;
            for (const auto& t : imgs) ptrs.push_back(&t);
            double loss = 0.0;
            try {
                loss = trainer.train_step(ptrs, labels, lr);
            } catch (const NumericError& e) {
                throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", batch starting " +
                                   std::to_string(start) + (out_dir ? "; last good checkpoint kept" : ""));
            }
            loss_sum += loss * static_cast<double>(end - start);
        }
        EpochLog entry{epoch, lr, loss_sum / static_cast<double>(order.size()), 0.0};
        entry.recall1 = recall_report(build_index(probe, model, params, cfg.ablation), 1).recall;
        spdlog::info("epoch {} lr {:.6g} loss {:.6f} recall@1 {:.4f}", entry.epoch, entry.lr, entry.loss,
                     entry.recall1);
        outcome.log.push_back(entry);
        if (out_dir) {
            write_text(*out_dir / "metrics.csv", metrics_csv(outcome.log));
            if (cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0) {
                write_checkpoint(*out_dir, params, cfg.ablation, saved_backbone);
            }
        }
    }
    if (out_dir) {
        write_text(*out_dir / "metrics.csv", metrics_csv(outcome.log));
        write_checkpoint(*out_dir, params, cfg.ablation, saved_backbone);
    }
    params.apply_ablation(cfg.ablation);
    outcome.params = std::move(params);
    if (cfg.ablation.finetune_backbone) {
        model.set_trainable(false);
        outcome.finetuned_backbone = std::move(model);
    }
    return outcome;
}

}  // namespace frpt
