#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "frpt/error.hpp"
#include "frpt/gradsuite.hpp"
#include "frpt/image_io.hpp"
#include "frpt/pretrain.hpp"
#include "frpt/training.hpp"
#include "frpt/visualize.hpp"

namespace fs = std::filesystem;
using namespace frpt;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

void fail_line(const char* kind, const std::string& message) {
    std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
}

void require_file(const fs::path& p, const char* what) {
    if (!fs::exists(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
}

nlohmann::json read_json(const fs::path& p) {
    require_file(p, "config");
    std::ifstream f(p);
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("invalid JSON in " + p.string() + ": " + e.what());
    }
}

void write_file(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + p.string());
    f << text;
}

struct GenArgs {
    std::string spec, out;
    std::optional<std::uint64_t> seed;
};

struct PretrainArgs {
    std::string data, out;
    std::uint64_t seed = 0;
    std::optional<std::size_t> epochs, threads;
    std::optional<double> lr;
};

struct TrainArgs {
    std::string config, backbone, data, out;
    bool no_dpp = false, no_cah = false, no_in = false, finetune = false;
    std::optional<std::size_t> shots, epochs, threads;
    std::optional<std::uint64_t> seed;
};

struct EvalArgs {
    std::string checkpoint, backbone, data, out;
};

struct GradArgs {
    std::string scale = "desk";
    std::size_t trials = 20;
    std::uint64_t seed = 0;
};

struct WarpArgs {
    std::string checkpoint, image, out, backbone;
};

int run_gen(const GenArgs& a) {
    SynthSpec spec;
    if (!a.spec.empty()) spec = read_json(a.spec).get<SynthSpec>();
    if (a.seed) spec.seed = *a.seed;
    spec.validate();
    const Dataset d = gen_synthetic(spec, a.out);
    std::cout << "images," << d.samples.size() << "\nclasses," << d.n_classes << '\n';
    return 0;
}

int run_pretrain(const PretrainArgs& a) {
    require_file(fs::path(a.data) / "manifest.csv", "dataset manifest");
    const Dataset data = load_dataset(a.data);
    PretrainConfig cfg;
    cfg.seed = a.seed;
    if (a.epochs) cfg.epochs = *a.epochs;
    if (a.lr) cfg.lr = *a.lr;
    if (a.threads) cfg.threads = *a.threads;
    PretrainReport rep;
    const BackboneModel<float> model = pretrain_backbone(data, cfg, &rep);
    save_weights(a.out, model);
    std::cout << "heldout_accuracy," << rep.heldout_accuracy << "\nchance," << rep.chance << '\n';
    if (!rep.epoch_loss.empty())
        std::cout << "first_loss," << rep.epoch_loss.front() << "\nlast_loss," << rep.epoch_loss.back() << '\n';
    return 0;
}

int run_train(const TrainArgs& a) {
    TrainConfig cfg;
    if (!a.config.empty()) cfg = read_json(a.config).get<TrainConfig>();
    if (a.no_dpp) cfg.ablation.use_dpp = false;
    if (a.no_cah) cfg.ablation.use_cah = false;
    if (a.no_in) cfg.ablation.use_instance_norm = false;
    if (a.finetune) cfg.ablation.finetune_backbone = true;
    if (a.shots) cfg.shots = *a.shots;
    if (a.epochs) cfg.epochs = *a.epochs;
    if (a.threads) cfg.threads = *a.threads;
    if (a.seed) cfg.seed = *a.seed;
    cfg.validate();
    require_file(a.backbone, "backbone weights");
    require_file(fs::path(a.data) / "manifest.csv", "dataset manifest");
    const BackboneModel<float> backbone = load_weights(a.backbone);
    const Dataset data = load_dataset(a.data);
    fs::create_directories(a.out);
    write_file(fs::path(a.out) / "config.json", nlohmann::json(cfg).dump(2) + "\n");
    const TrainOutcome out = train(cfg, data, backbone, fs::path(a.out));
    std::cout << "learnable_parameters," << out.learnable_parameters << '\n';
    if (!out.log.empty()) std::cout << "final_loss," << out.log.back().loss << '\n';
    return 0;
}

int run_eval(const EvalArgs& a) {
    require_file(a.checkpoint, "checkpoint");
    require_file(fs::path(a.data) / "manifest.csv", "dataset manifest");
    Checkpoint ck = load_checkpoint(a.checkpoint);
    BackboneModel<float> backbone;
    if (ck.backbone) {
        backbone = *ck.backbone;
    } else {
        if (a.backbone.empty()) throw ConfigError("--backbone is required for a checkpoint without backbone arrays");
        require_file(a.backbone, "backbone weights");
        backbone = load_weights(a.backbone);
    }
    const Dataset data = load_dataset(a.data);
    const std::string csv = recall_csv(evaluate_open_set(data, backbone, ck.params, ck.ablation));
    if (!a.out.empty()) write_file(a.out, csv);
    std::cout << csv;
    return 0;
}

int run_gradcheck(const GradArgs& a) {
    if (a.scale != "desk") throw ConfigError("unsupported gradcheck scale '" + a.scale + "' (only 'desk')");
    if (a.trials < 1) throw ConfigError("--trials must be >= 1");
    const auto rows = gradient_suite(a.trials, a.seed);
    bool ok = true;
    std::printf("op,wrt,max_rel_error,trials,checked,excluded,status\n");
    for (const auto& r : rows) {
        const bool pass = r.max_rel_error < 1e-4 && r.checked > 0;
        ok = ok && pass;
        std::printf("%s,%s,%.3e,%zu,%zu,%zu,%s\n", r.op.c_str(), r.wrt.c_str(), r.max_rel_error, r.trials, r.checked,
                    r.excluded, pass ? "pass" : "FAIL");
    }
    if (!ok) {
        fail_line("numeric", "gradient check exceeded 1e-4");
        return kExitRuntime;
    }
    return 0;
}

int run_warp(const WarpArgs& a) {
    require_file(a.checkpoint, "checkpoint");
    require_file(a.image, "image");
    Checkpoint ck = load_checkpoint(a.checkpoint);
    BackboneModel<float> backbone;
    if (ck.backbone) {
        backbone = *ck.backbone;
    } else {
        if (a.backbone.empty()) throw ConfigError("--backbone is required for a checkpoint without backbone arrays");
        require_file(a.backbone, "backbone weights");
        backbone = load_weights(a.backbone);
    }
    const Tensor<float> image = read_ppm(a.image);
    const fs::path stem(a.out);
    if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
    write_warp_visualization(stem, warp_visualization(image, backbone, ck.params.dpp));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prompt tuning of a frozen backbone for fine-grained retrieval"};
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

    GenArgs gen;
    auto* c_gen = app.add_subcommand("gen-data", "Generate the synthetic benchmark");
    c_gen->add_option("--spec", gen.spec, "Synthetic spec JSON (defaults when omitted)");
    c_gen->add_option("--out", gen.out, "Output directory")->required();
    c_gen->add_option("--seed", gen.seed, "Override the spec seed");

    PretrainArgs pre;
    auto* c_pre = app.add_subcommand("pretrain", "Pre-train the desk backbone on species labels");
    c_pre->add_option("--data", pre.data, "Dataset directory")->required();
    c_pre->add_option("--out", pre.out, "Output weight file")->required();
    c_pre->add_option("--seed", pre.seed, "Seed");
    c_pre->add_option("--epochs", pre.epochs, "Epochs");
    c_pre->add_option("--lr", pre.lr, "Peak learning rate");
    c_pre->add_option("--threads", pre.threads, "Worker threads (0 = all cores)");

    TrainArgs tr;
    auto* c_tr = app.add_subcommand("train", "Train prompt, head and classifier");
    c_tr->add_option("--config", tr.config, "Train config JSON (defaults when omitted)");
    c_tr->add_option("--backbone", tr.backbone, "Backbone weight file")->required();
    c_tr->add_option("--data", tr.data, "Dataset directory")->required();
    c_tr->add_option("--out", tr.out, "Output directory")->required();
    c_tr->add_flag("--no-dpp", tr.no_dpp, "Disable the perturbation prompt");
    c_tr->add_flag("--no-cah", tr.no_cah, "Disable the awareness head");
    c_tr->add_flag("--no-in", tr.no_in, "Drop the instance-normalized branch of the head");
    c_tr->add_flag("--finetune", tr.finetune, "Unfreeze the backbone");
    c_tr->add_option("--shots", tr.shots, "Images per training class");
    c_tr->add_option("--epochs", tr.epochs, "Override epochs");
    c_tr->add_option("--threads", tr.threads, "Worker threads (0 = all cores)");
    c_tr->add_option("--seed", tr.seed, "Override the config seed");

    EvalArgs ev;
    auto* c_ev = app.add_subcommand("eval", "Open-set Recall@{1,2,4,8} on the test split");
    c_ev->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
    c_ev->add_option("--backbone", ev.backbone, "Backbone weight file");
    c_ev->add_option("--data", ev.data, "Dataset directory")->required();
    c_ev->add_option("--out", ev.out, "Also write the CSV here");

    GradArgs gc;
    auto* c_gc = app.add_subcommand("gradcheck", "Finite-difference gradient table");
    c_gc->add_option("--scale", gc.scale, "Preset (desk)");
    c_gc->add_option("--trials", gc.trials, "Random trials per operation");
    c_gc->add_option("--seed", gc.seed, "Seed");

    WarpArgs wa;
    auto* c_wa = app.add_subcommand("warp", "Write original, warped and map images");
    c_wa->add_option("--checkpoint", wa.checkpoint, "Checkpoint file")->required();
    c_wa->add_option("--image", wa.image, "Input PPM image")->required();
    c_wa->add_option("--out", wa.out, "Output path stem")->required();
    c_wa->add_option("--backbone", wa.backbone, "Backbone weight file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        fail_line("usage", e.what());
        return kExitUsage;
    }
    spdlog::set_default_logger(spdlog::stderr_color_mt("frpt"));
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);

    try {
        if (*c_gen) return run_gen(gen);
        if (*c_pre) return run_pretrain(pre);
        if (*c_tr) return run_train(tr);
        if (*c_ev) return run_eval(ev);
        if (*c_gc) return run_gradcheck(gc);
        if (*c_wa) return run_warp(wa);
    } catch (const ConfigError& e) {
        fail_line("config", e.what());
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        fail_line("config", e.what());
        return kExitUsage;
    } catch (const FormatError& e) {
        fail_line("format", e.what());
        return kExitRuntime;
    } catch (const StructureError& e) {
        fail_line("structure", e.what());
        return kExitRuntime;
    } catch (const NumericError& e) {
        fail_line("numeric", e.what());
        return kExitRuntime;
    } catch (const std::exception& e) {
        fail_line("runtime", e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}
