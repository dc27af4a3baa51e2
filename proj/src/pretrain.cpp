#include "frpt/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include <spdlog/spdlog.h>

#include "frpt/ops.hpp"
#include "frpt/parallel.hpp"
#include "frpt/training.hpp"

namespace frpt {

namespace {

Var<float> species_logits(Record<float>& rec, BackboneModel<float>& model, Tensor<float>& w, Tensor<float>& b,
                          const Tensor<float>& image) {
    Var<float> feat = gap(full_forward(rec, model, rec.leaf(image)));
    return fc(feat, rec.leaf(w), std::optional<Var<float>>(rec.leaf(b)));
}

}  // namespace

BackboneModel<float> pretrain_backbone(const Dataset& data, const PretrainConfig& cfg, PretrainReport* report) {
    if (cfg.batch_size < 1 || cfg.holdout_every < 2 || !(cfg.lr > 0.0)) {
        throw ConfigError("pretrain needs batch_size >= 1, holdout_every >= 2 and lr > 0");
    }
    std::vector<const Sample*> fit, held;
    const auto pool = data.split("train");
    for (std::size_t i = 0; i < pool.size(); ++i) ((i + 1) % cfg.holdout_every == 0 ? held : fit).push_back(pool[i]);
    if (fit.empty() || held.empty()) throw ConfigError("pretrain needs training images to fit and hold out");

    BackboneModel<float> model = make_backbone(desk_architecture(), kDeskBlock1Tap, cfg.seed);
    model.set_trainable(true);
    const std::size_t n_species = data.n_species;
    const std::size_t c_p = model.channels_out();
    Tensor<float> w({n_species, c_p}), b({n_species});
    {
        std::mt19937_64 init(cfg.seed ^ 0x5BEC1E5ULL);
        std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(c_p)));
        for (auto& v : w.data()) v = static_cast<float>(dist(init));
    }
    w.set_requires_grad(true);
    b.set_requires_grad(true);

    struct Slot {
        Tensor<float>* t;
        std::vector<float> v;
        bool decay;
    };
    std::vector<Slot> slots;
    for (auto& s : model.stages()) {
        slots.push_back({&s.weight, std::vector<float>(s.weight.size()), true});
        slots.push_back({&s.bias, std::vector<float>(s.bias.size()), true});
    }
    slots.push_back({&w, std::vector<float>(w.size()), true});
    slots.push_back({&b, std::vector<float>(b.size()), false});

    PretrainReport rep;
    rep.train_images = fit.size();
    rep.heldout_images = held.size();
    rep.chance = 1.0 / static_cast<double>(n_species);

    std::mt19937_64 rng(cfg.seed ^ 0xB0A7ULL);
    std::vector<std::size_t> order(fit.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Cosine decay to zero over the run.
        const double lr = 0.5 * cfg.lr * (1.0 + std::cos(M_PI * epoch / static_cast<double>(cfg.epochs)));
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            const std::size_t n = end - start;
            std::vector<Tensor<float>> imgs;
            for (std::size_t i = start; i < end; ++i) {
                imgs.push_back(augment(fit[order[i]]->image, cfg.augment, cfg.augment, rng));
            }
            for (auto& s : slots) s.t->zero_grad();
            std::vector<std::unique_ptr<Record<float>>> recs(n);
            std::vector<double> losses(n);
            parallel_for(n, cfg.threads, [&](std::size_t i) {
                auto rec = std::make_unique<Record<float>>();
                Var<float> loss = cross_entropy(species_logits(*rec, model, w, b, imgs[i]), fit[order[start + i]]->species);
                losses[i] = loss.item();
                rec->propagate(scale(loss, 1.0f / static_cast<float>(n)));
                recs[i] = std::move(rec);
            });
            double batch_loss = 0.0;
            for (double l : losses) batch_loss += l;
            if (!std::isfinite(batch_loss)) {
                throw NumericError("pretrain loss diverged at epoch " + std::to_string(epoch) + ", batch starting " +
                                   std::to_string(start));
            }
            for (auto& r : recs) r->deposit();
            for (auto& s : slots) sgd_update<float>(s.t->data(), s.t->grad(), s.v, lr, cfg.momentum,
                                                    s.decay ? cfg.weight_decay : 0.0);
            loss_sum += batch_loss;
        }
        rep.epoch_loss.push_back(loss_sum / static_cast<double>(fit.size()));
        spdlog::info("pretrain epoch {} lr {:.5f} loss {:.5f}", epoch, lr, rep.epoch_loss.back());
    }

    model.set_trainable(false);
    w.set_requires_grad(false);
    b.set_requires_grad(false);
    std::vector<int> correct(held.size(), 0);
    parallel_for(held.size(), cfg.threads, [&](std::size_t i) {
        Record<float> rec;
        auto logits = species_logits(rec, model, w, b, held[i]->image).value();
        const auto best = static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
        correct[i] = best == held[i]->species ? 1 : 0;
    });
    std::size_t hits = 0;
    for (int c : correct) hits += static_cast<std::size_t>(c);
    rep.heldout_accuracy = static_cast<double>(hits) / static_cast<double>(held.size());
    spdlog::info("pretrain held-out species accuracy {:.4f} (chance {:.4f}, {} images)", rep.heldout_accuracy,
                 rep.chance, held.size());
    if (report) *report = rep;
    return model;
}

}  // namespace frpt
