#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "frpt/tensor.hpp"

// Procedural fine-grained benchmark. Every image carries a species-level
// background texture (coarse, large, shared across subcategories) and a small
// subcategory glyph at a random position and angle. Subcategories of one
// species differ in glyph shape and in glyph hue.
namespace frpt {

struct SynthSpec {
    std::size_t image_size = 32;
    std::size_t n_species = 8;
    std::size_t n_subcats_per_species = 4;
    std::size_t images_per_subcat = 40;
    std::size_t glyph_size = 7;
    double noise_std = 0.03;
    std::uint64_t seed = 0;

    std::size_t n_classes() const { return n_species * n_subcats_per_species; }
    std::size_t n_images() const { return n_classes() * images_per_subcat; }
    void validate() const;
};

void to_json(nlohmann::json& j, const SynthSpec& s);
void from_json(const nlohmann::json& j, SynthSpec& s);

struct Sample {
    std::string id;    // stable identifier, also the relative image path stem
    std::string path;  // relative to the dataset root
    std::size_t species = 0;
    std::size_t subcat = 0;  // class id in canonical order
    std::string split;       // "train" or "test"
    Tensor<float> image;     // [3, H, W] in [0, 1]
};

struct Dataset {
    std::vector<Sample> samples;
    std::size_t n_classes = 0;
    std::size_t n_species = 0;
    std::size_t image_size = 0;

    std::vector<const Sample*> split(const std::string& name) const;
};

// Canonical class order interleaves species: class c belongs to species
// c % n_species, so both halves of the class list span every species.
std::size_t species_of_class(const SynthSpec& spec, std::size_t cls);

// Renders image `index` (class index / images_per_subcat). Pixel values are
// quantized to 8 bits so in-memory and on-disk datasets agree.
Tensor<float> render_image(const SynthSpec& spec, std::size_t index);

Dataset generate_synthetic(const SynthSpec& spec);

// Writes images/<id>.ppm, manifest.csv ("path,species,subcat,split") and
// spec.json under `dir`.
void write_dataset(const Dataset& data, const SynthSpec& spec, const std::filesystem::path& dir);

Dataset gen_synthetic(const SynthSpec& spec, const std::filesystem::path& dir);

Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace frpt
