// Acceptance run: one PASS/FAIL line per criterion.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "frpt/container.hpp"
#include "frpt/gradsuite.hpp"
#include "frpt/ops.hpp"
#include "frpt/pretrain.hpp"
#include "frpt/training.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace frpt;
using frpt::testing::as_double;
using frpt::testing::random_tensor;
using frpt::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

std::string fmtd(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

int run(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ---------------------------------------------------------------- 1

Outcome gradient_criterion() {
    Outcome o;
    double worst = 0.0;
    for (const auto& row : gradient_suite(20, 0)) {
        worst = std::max(worst, row.max_rel_error);
        o.require(row.max_rel_error < 1e-4, row.op + "/" + row.wrt + " error " + fmtd("%.3g", row.max_rel_error));
        o.require(row.checked > 0, row.op + "/" + row.wrt + " checked nothing");
        if (row.op != "pipeline") o.require(row.trials >= 20, row.op + " ran fewer than 20 trials");
    }
    if (o.pass) o.detail = "worst relative error " + fmtd("%.3g", worst);
    return o;
}

// ---------------------------------------------------------------- 2

Outcome normalization_criterion() {
    Outcome o;
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<std::size_t> side(2, 16);
    double worst_sum = 0.0, worst_mean = 0.0, worst_var = 0.0, worst_shrink = 0.0;
    std::size_t small_channels = 0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t h = side(rng), w = side(rng);
        Tensor<double> raw = random_tensor<double>({h, w}, rng, -20.0, 20.0);
        Record<double> rec;
        auto a = softmax2d(rec.constant(raw));
        double s = 0.0;
        for (double v : a.value()) s += v;
        worst_sum = std::max(worst_sum, std::abs(s - 1.0));
        auto map = normalize_map(rec.constant(raw));
        for (double v : map.weights.value()) o.require(v >= 0.0, "negative map entry");
        Record<float> recf;
        auto mapf = normalize_map(recf.constant(raw.cast<float>()));
        for (float v : mapf.weights.value()) o.require(v >= 0.0f, "negative float map entry");
    }
    std::uniform_real_distribution<double> scale(0.5, 5.0), shift(-10.0, 10.0);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t c = 1 + t % 8, h = side(rng), w = side(rng);
        Tensor<double> x = random_tensor<double>({c, h, w}, rng);
        for (std::size_t k = 0; k < c; ++k) {
            const double sc = scale(rng), sh = shift(rng);
            for (std::size_t i = 0; i < h * w; ++i) x[k * h * w + i] = x[k * h * w + i] * sc + sh;
        }
        Record<double> rec;
        auto y = instance_norm(rec.constant(x), 1e-5);
        for (std::size_t k = 0; k < c; ++k) {
            const std::size_t n = h * w;
            double xm = 0.0, xv = 0.0, m = 0.0, v = 0.0;
            for (std::size_t i = 0; i < n; ++i) xm += x[k * n + i];
            xm /= double(n);
            for (std::size_t i = 0; i < n; ++i) xv += (x[k * n + i] - xm) * (x[k * n + i] - xm);
            xv /= double(n);
            for (std::size_t i = 0; i < n; ++i) m += y.value()[k * n + i];
            m /= double(n);
            for (std::size_t i = 0; i < n; ++i) v += (y.value()[k * n + i] - m) * (y.value()[k * n + i] - m);
            v /= double(n);
            worst_mean = std::max(worst_mean, std::abs(m));
            // Epsilon shrinks the output variance to xv / (xv + eps) exactly.
            worst_shrink = std::max(worst_shrink, std::abs(v - xv / (xv + 1e-5)));
            if (xv * 1e-4 < 1e-5) {
                ++small_channels;
                continue;
            }
            worst_var = std::max(worst_var, std::abs(v - 1.0));
        }
    }
    o.require(worst_sum <= 1e-6, "softmax sum off by " + fmtd("%.3g", worst_sum));
    o.require(worst_mean < 1e-6, "instance-norm mean " + fmtd("%.3g", worst_mean));
    o.require(worst_var < 1e-4, "instance-norm variance off by " + fmtd("%.3g", worst_var));
    o.require(worst_shrink < 1e-9, "instance-norm variance off its epsilon value by " + fmtd("%.3g", worst_shrink));
    if (o.pass)
        o.detail = "max |sum-1| " + fmtd("%.2g", worst_sum) + ", max |mean| " + fmtd("%.2g", worst_mean) +
                   ", max |var-1| " + fmtd("%.2g", worst_var) + " (" + std::to_string(small_channels) +
                   " channels with variance < 0.1 held to var/(var+eps) instead)";
    return o;
}

// ---------------------------------------------------------------- 3

// Output pixels whose nearest map cell lies inside the region.
std::size_t region_hits(const std::vector<bool>& region, double ratio, std::size_t n) {
    std::vector<double> a(n * n);
    double z = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) z += a[i] = region[i] ? ratio : 1.0;
    for (double& v : a) v /= z;
    Record<double> rec;
    auto g = compute_mapping(ProjectionMap<double>{rec.constant(Shape{n, n}, a)}, n, n, 0.25).coords.value();
    std::size_t hits = 0;
    for (std::size_t p = 0; p < n * n; ++p) {
        const auto cx = static_cast<std::size_t>(std::clamp(std::lround(g[p] * double(n)) - 1, 0L, long(n) - 1));
        const auto cy = static_cast<std::size_t>(std::clamp(std::lround(g[n * n + p] * double(n)) - 1, 0L, long(n) - 1));
        hits += region[cy * n + cx] ? 1 : 0;
    }
    return hits;
}

Outcome warp_criterion() {
    Outcome o;
    // One-hot collapse.
    std::size_t inexact = 0;
    for (std::size_t hs : {4u, 8u, 16u})
        for (std::size_t ws : {4u, 5u, 16u})
            for (std::size_t h0 = 0; h0 < hs; ++h0)
                for (std::size_t w0 = 0; w0 < ws; ++w0) {
                    std::vector<double> raw(hs * ws, -1e4);
                    raw[h0 * ws + w0] = 0.0;
                    Record<double> rec;
                    auto g = compute_mapping(normalize_map(rec.constant(Shape{hs, ws}, raw)), 32, 32, 0.25).coords.value();
                    for (std::size_t p = 0; p < 1024; ++p)
                        inexact += (g[p] != double(w0 + 1) / double(ws)) + (g[1024 + p] != double(h0 + 1) / double(hs));
                }
    o.require(inexact == 0, std::to_string(inexact) + " one-hot coordinates not exact");

    // Uniform map, interior pixels: within 1/16 of the centre of mass of the grid.
    double worst = 0.0;
    for (std::size_t ws : {8u, 16u}) {
        Record<double> rec;
        auto g = compute_mapping(normalize_map(rec.constant(Tensor<double>({ws, ws}))), 32, 32, 0.25).coords.value();
        const double centre = double(ws + 1) / double(2 * ws);
        for (std::size_t y = 0; y < 32; ++y)
            for (std::size_t x = 0; x < 32; ++x) {
                const double u = double(x + 1) / 32.0, v = double(y + 1) / 32.0;
                if (std::abs(u - centre) > 1.0 / 16.0 || std::abs(v - centre) > 1.0 / 16.0) continue;
                worst = std::max({worst, std::abs(g[y * 32 + x] - u), std::abs(g[1024 + y * 32 + x] - v)});
            }
    }
    o.require(worst < 0.02, "uniform-map interior deviation " + fmtd("%.4f", worst));

    // Density monotonicity on two-region 16x16 maps.
    const std::size_t n = 16;
    std::vector<std::vector<bool>> regions;
    auto make = [&](auto pred) {
        std::vector<bool> r(n * n);
        for (std::size_t y = 0; y < n; ++y)
            for (std::size_t x = 0; x < n; ++x) r[y * n + x] = pred(y, x);
        regions.push_back(r);
    };
    make([](std::size_t, std::size_t x) { return x < 8; });
    make([](std::size_t y, std::size_t) { return y >= 8; });
    make([](std::size_t y, std::size_t x) { return y >= 4 && y < 12 && x >= 4 && x < 12; });
    make([](std::size_t y, std::size_t x) { return y < 4 && x < 4; });
    make([](std::size_t y, std::size_t x) { return y >= 10 && y < 14 && x >= 2 && x < 6; });
    for (std::size_t r = 0; r < regions.size(); ++r) {
        std::size_t prev = region_hits(regions[r], 1.0, n);
        const std::size_t base = prev;
        for (double ratio : {2.0, 4.0, 8.0, 16.0, 64.0}) {
            const std::size_t hits = region_hits(regions[r], ratio, n);
            o.require(hits >= prev, "region " + std::to_string(r) + " density fell at ratio " + fmtd("%g", ratio));
            prev = hits;
        }
        o.require(prev > base, "region " + std::to_string(r) + " never gained samples");
    }

    // Identity grid.
    std::mt19937_64 rng(3);
    for (std::size_t s : {5u, 16u, 32u}) {
        Tensor<double> img = random_tensor<double>({3, s, s + 3}, rng, 0.0, 1.0);
        Tensor<double> grid({2, s, s + 3});
        for (std::size_t y = 0; y < s; ++y)
            for (std::size_t x = 0; x < s + 3; ++x) {
                grid[y * (s + 3) + x] = double(x + 1) / double(s + 3);
                grid[s * (s + 3) + y * (s + 3) + x] = double(y + 1) / double(s);
            }
        Record<double> rec;
        auto out = warp(rec.constant(img), WarpGrid<double>{rec.constant(grid)});
        o.require(std::equal(img.values().begin(), img.values().end(), out.value().begin()), "identity grid changed pixels");
    }
    if (o.pass) o.detail = "interior deviation " + fmtd("%.4f", worst) + ", one-hot exact, density monotone";
    return o;
}

// ---------------------------------------------------------------- 4

Outcome oracle_criterion() {
    Outcome o;
    std::mt19937_64 rng(4);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const std::size_t c = 1 + t % 5, h = 4 + t % 7, w = 4 + (t * 3) % 9;
        const int sigma = static_cast<int>(((w + 1) / 2) | 1) + 2 * (t % 2);
        Tensor<double> m = random_tensor<double>({c, h, w}, rng);
        Tensor<double> k = random_tensor<double>({std::size_t(sigma), std::size_t(sigma), c}, rng);
        Record<double> rec;
        auto raw = content_parse(rec.constant(m), rec.constant(k), sigma);
        auto want = frpt::testing::content_parse_oracle(as_double(m.values()), c, h, w, as_double(k.values()), sigma);
        for (std::size_t i = 0; i < want.size(); ++i) worst = std::max(worst, std::abs(raw.value()[i] - want[i]));

        auto map = normalize_map(rec.constant(random_tensor<double>({h, w}, rng, -3.0, 3.0)));
        const std::size_t oh = 6 + t % 11, ow = 5 + t % 13;
        const double sd = 0.1 + 0.05 * (t % 6);
        auto grid = compute_mapping(map, oh, ow, sd);
        auto gw = frpt::testing::mapping_oracle(as_double(map.weights.value()), h, w, oh, ow, sd);
        for (std::size_t i = 0; i < gw.size(); ++i) worst = std::max(worst, std::abs(grid.coords.value()[i] - gw[i]));

        Tensor<double> img = random_tensor<double>({3, oh, ow}, rng, 0.0, 1.0);
        auto out = warp(rec.constant(img), grid);
        auto ww = frpt::testing::warp_oracle(as_double(img.values()), 3, oh, ow, as_double(grid.coords.value()));
        for (std::size_t i = 0; i < ww.size(); ++i) worst = std::max(worst, std::abs(out.value()[i] - ww[i]));
    }
    o.require(worst < 1e-6, "real-valued oracle gap " + fmtd("%.3g", worst));

    std::size_t mismatches = 0, indexes = 0;
    for (std::size_t n : {2u, 10u, 100u, 400u, 1000u})
        for (int coarse = 0; coarse < 2; ++coarse) {
            std::uniform_real_distribution<float> u(-1.0f, 1.0f);
            std::uniform_int_distribution<int> q(-1, 1);
            EmbeddingIndex index;
            for (std::size_t i = 0; i < n; ++i) {
                std::vector<float> e(coarse ? 3 : 8);
                for (auto& v : e) v = coarse ? float(q(rng)) : u(rng);
                index.add(std::move(e), i % (1 + n / 20), "id" + std::to_string((i * 7919) % 100003));
            }
            for (std::size_t k : {1u, 2u, 4u, 8u}) mismatches += recall_at_k(index, k) != frpt::testing::recall_oracle(index, k);
            ++indexes;
        }
    o.require(mismatches == 0, std::to_string(mismatches) + " Recall@K values differ from brute force");
    if (o.pass) o.detail = "max oracle gap " + fmtd("%.2g", worst) + ", Recall@K exact on " + std::to_string(indexes) + " indexes";
    return o;
}

// ---------------------------------------------------------------- 5

Outcome freeze_criterion(const Dataset& data, const BackboneModel<float>& backbone, const TrainConfig& desk) {
    Outcome o;
    const auto before = encode_container(backbone_to_arrays(backbone));
    TrainConfig cfg = desk;
    cfg.epochs = 50;
    cfg.shots = 10;
    cfg.lr_decay_every = 50;
    const auto init = make_frpt_params(backbone, ParamInit{data.image_size, data.n_classes / 2, cfg.gaussian_std,
                                                           cfg.reduction, cfg.epsilon, cfg.seed});
    auto out = train(cfg, data, backbone);
    o.require(encode_container(backbone_to_arrays(backbone)) == before, "backbone bytes changed");
    o.require(out.params.dpp.w_k.values() != init.dpp.w_k.values(), "prompt kernel did not move");
    o.require(out.params.cah.w_l.values() != init.cah.w_l.values(), "head did not move");
    const std::size_t sigma = std::size_t(out.params.dpp.sigma), c_s = backbone.channels_block1(),
                      c_p = backbone.channels_out(), k = data.n_classes / 2;
    const std::size_t formula = sigma * sigma * c_s + 2 * c_p * c_p / cfg.reduction + k * (c_p + 1);
    o.require(out.learnable_parameters == formula,
              "counter " + std::to_string(out.learnable_parameters) + " vs formula " + std::to_string(formula));
    const std::size_t large = frpt_parameter_count(31, 256, 2048, 16, 0, Ablation{true, false, true, false});
    o.require(large == 246016, "large-scale prompt count " + std::to_string(large));
    o.require(std::round(double(large) / 1e4) / 100.0 == 0.25, "large-scale count does not round to 0.25M");
    if (o.pass)
        o.detail = "backbone byte-identical after 50 epochs, learnable " + std::to_string(formula) +
                   " = formula, large-scale prompt 246016 ~ 0.25M";
    return o;
}

// ---------------------------------------------------------------- 6, 7

struct Stats {
    double mean = 0.0, sd = 0.0;
};

Stats stats(const std::vector<double>& v) {
    Stats s;
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    for (double x : v) s.sd += (x - s.mean) * (x - s.mean);
    s.sd = v.size() > 1 ? std::sqrt(s.sd / double(v.size() - 1)) : 0.0;
    return s;
}

double open_set_recall1(const TrainConfig& cfg, const Dataset& data, const BackboneModel<float>& backbone) {
    auto out = train(cfg, data, backbone);
    BackboneModel<float> eval_bb = out.finetuned_backbone ? *out.finetuned_backbone : backbone;
    const std::array<std::size_t, 1> k1{1};
    return evaluate_open_set(data, eval_bb, out.params, out.ablation, k1).front().recall;
}

std::string describe(const std::string& name, const Stats& s) {
    return name + " " + fmtd("%.4f", s.mean) + "+-" + fmtd("%.4f", s.sd);
}

// a < b with a margin above the pooled run-to-run standard deviation.
void ordered(Outcome& o, const std::string& an, const Stats& a, const std::string& bn, const Stats& b) {
    const double sd = std::sqrt(0.5 * (a.sd * a.sd + b.sd * b.sd));
    const double margin = b.mean - a.mean;
    o.require(margin > sd, an + " < " + bn + " margin " + fmtd("%.4f", margin) + " vs sd " + fmtd("%.4f", sd));
}

Outcome ablation_criterion(const Dataset& data, const BackboneModel<float>& backbone, const TrainConfig& desk) {
    Outcome o;
    const std::vector<std::pair<std::string, Ablation>> variants{{"PT", {false, false, true, false}},
                                                                 {"DPP+PT", {true, false, true, false}},
                                                                 {"PT+CAH", {false, true, true, false}},
                                                                 {"DPP+PT+CAH", {true, true, true, false}},
                                                                 {"CAH(w/o IN)", {true, true, false, false}}};
    std::map<std::string, Stats> s;
    std::string table;
    for (const auto& [name, ab] : variants) {
        std::vector<double> r;
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            TrainConfig cfg = desk;
            cfg.seed = seed;
            cfg.ablation = ab;
            r.push_back(open_set_recall1(cfg, data, backbone));
        }
        s[name] = stats(r);
        table += (table.empty() ? "" : ", ") + describe(name, s[name]);
        spdlog::info("ablation {}: {:.4f} {:.4f} {:.4f}", name, r[0], r[1], r[2]);
    }
    ordered(o, "PT", s["PT"], "DPP+PT", s["DPP+PT"]);
    ordered(o, "PT", s["PT"], "PT+CAH", s["PT+CAH"]);
    const bool dpp_better = s["DPP+PT"].mean >= s["PT+CAH"].mean;
    ordered(o, dpp_better ? "DPP+PT" : "PT+CAH", dpp_better ? s["DPP+PT"] : s["PT+CAH"], "DPP+PT+CAH", s["DPP+PT+CAH"]);
    ordered(o, "CAH(w/o IN)", s["CAH(w/o IN)"], "DPP+PT+CAH", s["DPP+PT+CAH"]);
    o.detail = "R@1 " + table + (o.pass ? "" : " | " + o.detail);
    return o;
}

Outcome fewshot_criterion(const Dataset& data, const BackboneModel<float>& backbone, const TrainConfig& desk) {
    Outcome o;
    std::string table;
    for (std::size_t shots : {5u, 10u}) {
        std::vector<double> frpt, ft;
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            TrainConfig cfg = desk;
            cfg.seed = seed;
            cfg.shots = shots;
            cfg.epochs = 200 / shots;  // equal image presentations for both shot counts
            cfg.ablation = Ablation{true, true, true, false};
            frpt.push_back(open_set_recall1(cfg, data, backbone));
            cfg.ablation = Ablation{false, false, true, true};
            ft.push_back(open_set_recall1(cfg, data, backbone));
        }
        const Stats a = stats(frpt), b = stats(ft);
        o.require(a.mean >= b.mean, std::to_string(shots) + "-shot FRPT " + fmtd("%.4f", a.mean) + " < finetune " +
                                        fmtd("%.4f", b.mean));
        table += (table.empty() ? "" : ", ") + std::to_string(shots) + "-shot " + describe("FRPT", a) + " vs " +
                 describe("finetune", b);
    }
    o.detail = table + (o.pass ? "" : " | " + o.detail);
    return o;
}

// ---------------------------------------------------------------- 8

Outcome determinism_criterion() {
    Outcome o;
    TempDir dir("determinism");
    const std::string cli = FRPT_CLI;
    std::ofstream(dir / "spec.json") << R"({"n_species": 2, "n_subcats_per_species": 2, "images_per_subcat": 8,
                                           "image_size": 32, "glyph_size": 5, "seed": 9})";
    // a and b repeat the same commands; c changes only the thread count.
    for (const char* tag : {"a", "b", "c"}) {
        const std::string t = (dir / tag).string();
        const std::string threads = std::string(tag) == "c" ? "2" : "1";
        const std::vector<std::string> cmds{
            cli + " -q gen-data --spec " + (dir / "spec.json").string() + " --out " + t + "/data",
            cli + " -q pretrain --epochs 2 --seed 5 --threads " + threads + " --data " + t + "/data --out " + t +
                "/bb.frpt > " + t + "/pretrain.stdout",
            cli + " -q train --config " + FRPT_DESK_CONFIG + " --epochs 3 --seed 7 --threads " + threads +
                " --backbone " + t + "/bb.frpt --data " + t + "/data --out " + t + "/run > " + t + "/train.stdout",
            cli + " -q train --config " + FRPT_DESK_CONFIG + " --finetune --no-dpp --no-cah --shots 3 --epochs 2 --seed 7" +
                " --backbone " + t + "/bb.frpt --data " + t + "/data --out " + t + "/ft > " + t + "/ft.stdout",
            cli + " -q eval --checkpoint " + t + "/run/checkpoint.frpt --backbone " + t + "/bb.frpt --data " + t +
                "/data --out " + t + "/recall.csv > " + t + "/recall.stdout",
            cli + " -q eval --checkpoint " + t + "/ft/checkpoint.frpt --data " + t + "/data --out " + t +
                "/ft_recall.csv > " + t + "/ft_recall.stdout",
            cli + " -q warp --checkpoint " + t + "/run/checkpoint.frpt --backbone " + t + "/bb.frpt --image " + t +
                "/data/images/img_00003.ppm --out " + t + "/viz",
            cli + " gradcheck --trials 1 --seed 2 > " + t + "/grad.csv"};
        for (const auto& c : cmds) {
            const int code = run(c);
            o.require(code == 0, "exit " + std::to_string(code) + ": " + c);
            if (code != 0) return o;
        }
    }
    std::size_t compared = 0, across_threads = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
        if (!e.is_regular_file()) continue;
        const fs::path rel = fs::relative(e.path(), dir / "a");
        const std::string bytes = slurp(e.path());
        const fs::path repeat = dir / "b" / rel;
        o.require(fs::exists(repeat) && slurp(repeat) == bytes, "differs on repeat: " + rel.string());
        ++compared;
        // The written config records the thread count itself.
        if (rel == fs::path("run/config.json")) continue;
        const fs::path threaded = dir / "c" / rel;
        o.require(fs::exists(threaded) && slurp(threaded) == bytes, "differs with 2 threads: " + rel.string());
        ++across_threads;
    }
    if (o.pass)
        o.detail = std::to_string(compared) + " files byte-identical on repeat, " + std::to_string(across_threads) +
                   " also with 2 threads";
    return o;
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::warn);
    if (const char* v = std::getenv("FRPT_LOG"); v && std::string(v) == "info") spdlog::set_level(spdlog::level::info);

    using Clock = std::chrono::steady_clock;
    int failures = 0;
    auto report = [&](int id, const char* name, double limit_s, const std::function<Outcome()>& fn) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        if (limit_s > 0 && secs > limit_s) o.require(false, "runtime " + fmtd("%.0f", secs) + " s over " + fmtd("%.0f", limit_s) + " s");
        failures += o.pass ? 0 : 1;
        std::printf("criterion %d %-22s %s  [%.1f s]  %s\n", id, name, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
        std::fflush(stdout);
    };

    report(1, "gradient-suite", 300, gradient_criterion);
    report(2, "normalization", 60, normalization_criterion);
    report(3, "warp-semantics", 60, warp_criterion);
    report(4, "oracle-equivalence", 120, oracle_criterion);

    TrainConfig desk;
    {
        std::ifstream f(FRPT_DESK_CONFIG);
        desk = nlohmann::json::parse(f).get<TrainConfig>();
    }
    const auto t0 = Clock::now();
    Dataset data = generate_synthetic(SynthSpec{});
    PretrainReport pre;
    BackboneModel<float> backbone = pretrain_backbone(data, PretrainConfig{}, &pre);
    std::printf("setup: default benchmark %zu images, desk backbone held-out species accuracy %.3f (chance %.3f)  [%.1f s]\n",
                data.samples.size(), pre.heldout_accuracy, pre.chance,
                std::chrono::duration<double>(Clock::now() - t0).count());
    std::fflush(stdout);

    report(5, "freeze-discipline", 600, [&] { return freeze_criterion(data, backbone, desk); });
    report(6, "ablation-ordering", 1800, [&] { return ablation_criterion(data, backbone, desk); });
    report(7, "few-shot-trend", 1200, [&] { return fewshot_criterion(data, backbone, desk); });
    report(8, "determinism", 0, determinism_criterion);

    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
