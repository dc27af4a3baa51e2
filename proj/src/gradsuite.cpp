#include "frpt/gradsuite.hpp"

#include <algorithm>
#include <random>

#include "frpt/gradcheck.hpp"
#include "frpt/model.hpp"
#include "frpt/ops.hpp"

namespace frpt {

namespace {

using D = double;
using Rng = std::mt19937_64;

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Tensor<D> uniform(Shape shape, Rng& rng, D lo, D hi, bool learnable = true) {
    Tensor<D> t(std::move(shape));
    std::uniform_real_distribution<D> dist(lo, hi);
    for (auto& v : t.data()) v = dist(rng);
    t.set_requires_grad(learnable);
    return t;
}

Tensor<D> normal(Shape shape, Rng& rng, D sd, bool learnable = true) {
    Tensor<D> t(std::move(shape));
    std::normal_distribution<D> dist(0.0, sd);
    for (auto& v : t.data()) v = dist(rng);
    t.set_requires_grad(learnable);
    return t;
}

// Scalar readout with fixed random weights so every output entry matters.
Var<D> readout(Var<D> y, const Tensor<D>& weights) {
    return sum(mul(y, y.record->constant(weights)));
}

class Suite {
   public:
    Suite(std::size_t trials, std::uint64_t seed, D step) : trials_(trials), rng_(seed), step_(step) {}

    void set_step(D step, Stencil stencil) {
        step_ = step;
        stencil_ = stencil;
    }

    Rng& rng() { return rng_; }
    std::size_t trials() const { return trials_; }

    void check(const std::string& op, const std::string& wrt, const TensorProgram<D>& program, Tensor<D>& leaf) {
        const GradCheckResult r = finite_diff_check<D>(program, leaf, step_, stencil_);
        auto it = std::find_if(rows_.begin(), rows_.end(),
                               [&](const GradSuiteRow& row) { return row.op == op && row.wrt == wrt; });
        if (it == rows_.end()) {
            rows_.push_back({op, wrt});
            it = rows_.end() - 1;
        }
        it->max_rel_error = std::max(it->max_rel_error, r.max_rel_error);
        it->trials += 1;
        it->checked += r.checked;
        it->excluded += r.excluded;
    }

    std::vector<GradSuiteRow> rows() const { return rows_; }

   private:
    std::size_t trials_;
    Rng rng_;
    D step_;
    Stencil stencil_ = Stencil::central;
    std::vector<GradSuiteRow> rows_;
};

void conv2d_trials(Suite& s) {
    for (std::size_t t = 0; t < s.trials(); ++t) {
        auto& rng = s.rng();
        const std::size_t cin = pick(rng, 1, 3), cout = pick(rng, 1, 3);
        const std::size_t k = 2 * pick(rng, 0, 2) + 1;
        const std::size_t h = pick(rng, k, 7), w = pick(rng, k, 7);
        const int pad = static_cast<int>(pick(rng, 0, k / 2));
        const int stride = static_cast<int>(pick(rng, 1, 2));
        Tensor<D> x = uniform({cin, h, w}, rng, -1, 1);
        Tensor<D> kern = normal({cout, cin, k, k}, rng, 0.5);
        Tensor<D> bias = normal({cout}, rng, 0.5);
        const std::size_t oh = (h + 2 * pad - k) / stride + 1, ow = (w + 2 * pad - k) / stride + 1;
        const Tensor<D> r = normal({cout, oh, ow}, rng, 1.0, false);
        auto prog = [&](Record<D>& rec) {
            return readout(conv2d<D>(rec.leaf(x), rec.leaf(kern), rec.leaf(bias), pad, stride), r);
        };
        s.check("conv2d", "input", prog, x);
        s.check("conv2d", "kernel", prog, kern);
        s.check("conv2d", "bias", prog, bias);
    }
}

void softmax_trials(Suite& s) {
    for (std::size_t t = 0; t < s.trials(); ++t) {
        auto& rng = s.rng();
        const std::size_t h = pick(rng, 1, 6), w = pick(rng, 2, 6);
        Tensor<D> x = normal({h, w}, rng, 2.0);
        const Tensor<D> r = normal({h, w}, rng, 1.0, false);
        s.check("softmax2d", "input", [&](Record<D>& rec) { return readout(softmax2d(rec.leaf(x)), r); }, x);
    }
}

void instance_norm_trials(Suite& s) {
    for (std::size_t t = 0; t < s.trials(); ++t) {
        auto& rng = s.rng();
        const std::size_t c = pick(rng, 1, 3), h = pick(rng, 2, 5), w = pick(rng, 2, 5);
        Tensor<D> x = normal({c, h, w}, rng, 1.5);
        const Tensor<D> r = normal({c, h, w}, rng, 1.0, false);
        s.check("instance_norm", "input",
                [&](Record<D>& rec) { return readout(instance_norm(rec.leaf(x), D(1e-5)), r); }, x);
    }
}

void fc_trials(Suite& s) {
    for (std::size_t t = 0; t < s.trials(); ++t) {
        auto& rng = s.rng();
        const std::size_t din = pick(rng, 1, 6), dout = pick(rng, 1, 5);
        Tensor<D> x = normal({din}, rng, 1.0);
        Tensor<D> w = normal({dout, din}, rng, 1.0);
        Tensor<D> b = normal({dout}, rng, 1.0);
        const Tensor<D> r = normal({dout}, rng, 1.0, false);
        auto prog = [&](Record<D>& rec) {
            return readout(fc(rec.leaf(x), rec.leaf(w), std::optional<Var<D>>(rec.leaf(b))), r);
        };
        s.check("fc", "input", prog, x);
        s.check("fc", "weights", prog, w);
        s.check("fc", "bias", prog, b);
    }
}

void pointwise_trials(Suite& s) {
    for (std::size_t t = 0; t < s.trials(); ++t) {
        auto& rng = s.rng();
        const std::size_t c = pick(rng, 1, 3), h = pick(rng, 1, 5), w = pick(rng, 1, 5);
        Tensor<D> a = uniform({c, h, w}, rng, -1, 1);
        Tensor<D> b = normal({c, h, w}, rng, 3.0);
        Tensor<D> g = normal({c, h, w}, rng, 1.0);
        const Tensor<D> r = normal({c, h, w}, rng, 1.0, false);
        const Tensor<D> rc = normal({c}, rng, 1.0, false);
        s.check("relu", "input", [&](Record<D>& rec) { return readout(relu(rec.leaf(a)), r); }, a);
        s.check("sigmoid", "input", [&](Record<D>& rec) { return readout(sigmoid(rec.leaf(b)), r); }, b);
        s.check("gap", "input", [&](Record<D>& rec) { return readout(gap(rec.leaf(g)), rc); }, g);
    }
}

void cross_entropy_trials(Suite& s) {
    for (std::size_t t = 0; t < s.trials(); ++t) {
        auto& rng = s.rng();
        const std::size_t k = pick(rng, 2, 6), label = pick(rng, 0, k - 1);
        Tensor<D> z = normal({k}, rng, 2.0);
        s.check("cross_entropy", "logits", [&](Record<D>& rec) { return cross_entropy(rec.leaf(z), label); }, z);
    }
}

void mapping_trials(Suite& s) {
    for (std::size_t t = 0; t < s.trials(); ++t) {
        auto& rng = s.rng();
        const std::size_t hs = pick(rng, 2, 6), ws = pick(rng, 2, 6);
        const std::size_t oh = pick(rng, 2, 8), ow = pick(rng, 2, 8);
        const D sd = std::uniform_real_distribution<D>(0.1, 0.5)(rng);
        Tensor<D> a = uniform({hs, ws}, rng, 0.1, 1.0);
        D total = 0;
        for (D v : a.data()) total += v;
        for (auto& v : a.data()) v /= total;
        const Tensor<D> r = normal({2, oh, ow}, rng, 1.0, false);
        s.check("compute_mapping", "map",
                [&](Record<D>& rec) {
                    return readout(compute_mapping(ProjectionMap<D>{rec.leaf(a)}, oh, ow, sd).coords, r);
                },
                a);
    }
}

void warp_trials(Suite& s) {
    for (std::size_t t = 0; t < s.trials(); ++t) {
        auto& rng = s.rng();
        const std::size_t c = pick(rng, 1, 3), h = pick(rng, 2, 7), w = pick(rng, 2, 7);
        const std::size_t oh = h, ow = w;
        Tensor<D> img = uniform({c, h, w}, rng, 0, 1);
        Tensor<D> grid({2, oh, ow});
        std::uniform_real_distribution<D> fx(1.0 / w, 1.0), fy(1.0 / h, 1.0);
        for (std::size_t i = 0; i < oh * ow; ++i) {
            grid.data()[i] = fx(rng);
            grid.data()[oh * ow + i] = fy(rng);
        }
        grid.set_requires_grad(true);
        const Tensor<D> r = normal({c, oh, ow}, rng, 1.0, false);
        auto prog = [&](Record<D>& rec) { return readout(warp(rec.leaf(img), WarpGrid<D>{rec.leaf(grid)}), r); };
        s.check("warp", "image", prog, img);
        s.check("warp", "grid", prog, grid);
    }
}

void content_parse_trials(Suite& s) {
    for (std::size_t t = 0; t < s.trials(); ++t) {
        auto& rng = s.rng();
        const std::size_t c = pick(rng, 1, 3), h = pick(rng, 2, 6), w = pick(rng, 2, 6);
        const int sigma = desk_sigma(w) + 2 * static_cast<int>(pick(rng, 0, 1));
        const auto sz = static_cast<std::size_t>(sigma);
        Tensor<D> ms = uniform({c, h, w}, rng, 0, 1);
        Tensor<D> wk = normal({sz, sz, c}, rng, 0.5);
        const Tensor<D> r = normal({h, w}, rng, 1.0, false);
        auto prog = [&](Record<D>& rec) { return readout(content_parse(rec.leaf(ms), rec.leaf(wk), sigma), r); };
        s.check("content_parse", "features", prog, ms);
        s.check("content_parse", "kernel", prog, wk);
    }
}

void cah_trials(Suite& s) {
    for (std::size_t t = 0; t < s.trials(); ++t) {
        auto& rng = s.rng();
        const std::size_t r = pick(rng, 1, 2) * 2, hidden = pick(rng, 1, 3), ch = r * hidden;
        const std::size_t h = pick(rng, 2, 4), w = pick(rng, 2, 4);
        Tensor<D> mp = normal({ch, h, w}, rng, 1.0);
        Tensor<D> wf = normal({hidden, ch}, rng, 1.0);
        Tensor<D> wl = normal({ch, hidden}, rng, 1.0);
        const Tensor<D> rc = normal({ch}, rng, 1.0, false);
        auto att = [&](Record<D>& rec) {
            return readout(channel_attention(rec.leaf(mp), rec.leaf(wf), rec.leaf(wl)), rc);
        };
        s.check("channel_attention", "features", att, mp);
        s.check("channel_attention", "w_f", att, wf);
        s.check("channel_attention", "w_l", att, wl);

        Tensor<D> mp2 = normal({ch, h, w}, rng, 1.0);
        Tensor<D> wc = uniform({ch}, rng, 0.05, 0.95);
        const Tensor<D> rr = normal({ch, h, w}, rng, 1.0, false);
        const bool use_in = t % 2 == 0;
        auto blend = [&](Record<D>& rec) {
            return readout(cah_forward(rec.leaf(mp2), rec.leaf(wc), D(1e-5), use_in), rr);
        };
        s.check("cah_forward", "features", blend, mp2);
        s.check("cah_forward", "w_c", blend, wc);
    }
}

void pipeline_trials(Suite& s, std::size_t trials) {
    for (std::size_t t = 0; t < trials; ++t) {
        auto& rng = s.rng();
        const std::uint64_t seed = rng();
        BackboneModel<D> backbone = make_backbone(desk_architecture(), kDeskBlock1Tap, seed).cast<D>();
        ParamInit init;
        init.image_size = 16;
        init.n_classes = 4;
        init.seed = seed;
        FrptParams<D> p = make_frpt_params(make_backbone(desk_architecture(), kDeskBlock1Tap, seed), init).cast<D>();
        // Move away from the zero initialization so every path carries signal.
        for (auto& v : p.dpp.w_k.data()) v = std::normal_distribution<D>(0.0, 0.5)(rng);
        for (auto& v : p.cah.w_l.data()) v = std::normal_distribution<D>(0.0, 0.3)(rng);
        for (auto& v : p.clf_w.data()) v = std::normal_distribution<D>(0.0, 0.3)(rng);
        for (auto& v : p.clf_b.data()) v = std::normal_distribution<D>(0.0, 0.3)(rng);
        p.apply_ablation(Ablation{});
        Tensor<D> image = uniform({3, 16, 16}, rng, 0, 1);
        const std::size_t label = pick(rng, 0, 3);
        auto prog = [&](Record<D>& rec) {
            auto r = frpt_forward(rec, rec.leaf(image), backbone, p, Ablation{}, true);
            return cross_entropy(*r.logits, label);
        };
        s.check("pipeline", "dpp/w_k", prog, p.dpp.w_k);
        s.check("pipeline", "cah/w_f", prog, p.cah.w_f);
        s.check("pipeline", "cah/w_l", prog, p.cah.w_l);
        s.check("pipeline", "clf/w", prog, p.clf_w);
        s.check("pipeline", "clf/b", prog, p.clf_b);
        s.check("pipeline", "image", prog, image);
    }
}

}  // namespace

std::vector<GradSuiteRow> gradient_suite(std::size_t trials, std::uint64_t seed, double step,
                                         double pipeline_step) {
    Suite s(trials, seed, step);
    conv2d_trials(s);
    softmax_trials(s);
    instance_norm_trials(s);
    fc_trials(s);
    pointwise_trials(s);
    cross_entropy_trials(s);
    mapping_trials(s);
    warp_trials(s);
    content_parse_trials(s);
    cah_trials(s);
    s.set_step(pipeline_step, Stencil::five_point);
    pipeline_trials(s, std::max<std::size_t>(1, trials / 8));
    return s.rows();
}

}  // namespace frpt
