#include "frpt/synthdata.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "frpt/image_io.hpp"
#include "frpt/retrieval.hpp"

namespace frpt {

namespace {
const std::vector<std::uint16_t>& glyph_patterns();
}  // namespace

void SynthSpec::validate() const {
    if (image_size < 8) throw ConfigError("image_size must be >= 8");
    if (n_species < 1 || n_subcats_per_species < 1 || images_per_subcat < 1) {
        throw ConfigError("species, subcategory and image counts must all be >= 1");
    }
    if (glyph_size < 1 || 4 * glyph_size >= image_size) throw ConfigError("glyph_size must be below image_size / 4");
    if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
    if (n_classes() < 2) throw ConfigError("need at least 2 subcategory classes");
    if (n_subcats_per_species > glyph_patterns().size()) {
        throw ConfigError("n_subcats_per_species must be <= " + std::to_string(glyph_patterns().size()));
    }
}

void to_json(nlohmann::json& j, const SynthSpec& s) {
    j = nlohmann::json{{"image_size", s.image_size},
                       {"n_species", s.n_species},
                       {"n_subcats_per_species", s.n_subcats_per_species},
                       {"images_per_subcat", s.images_per_subcat},
                       {"glyph_size", s.glyph_size},
                       {"noise_std", s.noise_std},
                       {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, SynthSpec& s) {
    static const std::array<const char*, 7> known{"image_size", "n_species", "n_subcats_per_species",
                                                  "images_per_subcat", "glyph_size", "noise_std", "seed"};
    for (const auto& [key, _] : j.items()) {
        if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end()) {
            throw ConfigError("unknown synth spec field '" + key + "'");
        }
    }
    SynthSpec d;
    s.image_size = j.value("image_size", d.image_size);
    s.n_species = j.value("n_species", d.n_species);
    s.n_subcats_per_species = j.value("n_subcats_per_species", d.n_subcats_per_species);
    s.images_per_subcat = j.value("images_per_subcat", d.images_per_subcat);
    s.glyph_size = j.value("glyph_size", d.glyph_size);
    s.noise_std = j.value("noise_std", d.noise_std);
    s.seed = j.value("seed", d.seed);
}

std::vector<const Sample*> Dataset::split(const std::string& name) const {
    std::vector<const Sample*> out;
    for (const auto& s : samples)
        if (s.split == name) out.push_back(&s);
    return out;
}

std::size_t species_of_class(const SynthSpec& spec, std::size_t cls) { return cls % spec.n_species; }

namespace {

using Rgb = std::array<double, 3>;

Rgb hsv(double h, double s, double v) {
    h = std::fmod(h, 1.0) * 6.0;
    const int i = static_cast<int>(h);
    const double f = h - i, p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
    switch (i % 6) {
        case 0: return {v, t, p};
        case 1: return {q, v, p};
        case 2: return {p, v, t};
        case 3: return {p, q, v};
        case 4: return {t, p, v};
        default: return {v, p, q};
    }
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

// Per-species texture: two oriented gratings over a base colour.
struct SpeciesLook {
    Rgb base;
    Rgb tint;
    double freq;
    double angle;
    double freq2;
    double angle2;
};

SpeciesLook species_look(const SynthSpec& spec, std::size_t species) {
    auto rng = stream(spec.seed, 1, species);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double hue = (static_cast<double>(species) + 0.3 * u(rng)) / static_cast<double>(spec.n_species);
    SpeciesLook look;
    look.base = hsv(hue, 0.45, 0.55);
    look.tint = hsv(hue + 0.5, 0.5, 0.35);
    look.freq = 1.0 + 2.0 * u(rng);
    look.angle = std::numbers::pi * (static_cast<double>(species) + u(rng)) / static_cast<double>(spec.n_species);
    look.freq2 = 0.5 + 1.0 * u(rng);
    look.angle2 = std::numbers::pi * u(rng);
    return look;
}

// Five-cell patterns on a 3x3 grid, one per orbit of the square's symmetry
// group, so no two patterns coincide under rotation or reflection.
std::uint16_t transform(std::uint16_t bits, int t) {
    std::uint16_t out = 0;
    for (int y = 0; y < 3; ++y) {
        for (int x = 0; x < 3; ++x) {
            if (!(bits >> (y * 3 + x) & 1)) continue;
            int u = x, v = y;
            for (int r = 0; r < t % 4; ++r) {
                const int nu = 2 - v, nv = u;
                u = nu;
                v = nv;
            }
            if (t >= 4) u = 2 - u;
            out = static_cast<std::uint16_t>(out | 1u << (v * 3 + u));
        }
    }
    return out;
}

const std::vector<std::uint16_t>& glyph_patterns() {
    static const std::vector<std::uint16_t> patterns = [] {
        std::vector<std::uint16_t> out;
        for (std::uint16_t bits = 0; bits < 512; ++bits) {
            if (std::popcount(bits) != 5) continue;
            std::uint16_t canon = bits;
            for (int t = 1; t < 8; ++t) canon = std::min(canon, transform(bits, t));
            if (canon == bits) out.push_back(bits);
        }
        return out;
    }();
    return patterns;
}

constexpr double kHue0 = 0.12;
constexpr double kHueStep = 0.1;
constexpr double kHueJitter = 0.02;
constexpr double kGlyphSaturation = 0.85;
constexpr double kTintShift = 0.04;

struct Glyph {
    std::uint16_t pattern;
    double hue;
};

// Subcategories of one species draw distinct patterns and step through a
// narrow band of glyph hues.
Glyph class_glyph(const SynthSpec& spec, std::size_t cls) {
    const std::size_t species = species_of_class(spec, cls);
    const std::size_t within = cls / spec.n_species;
    std::vector<std::uint16_t> pool = glyph_patterns();
    auto rng = stream(spec.seed, 2, species);
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t slot = (within + species) % spec.n_subcats_per_species;
    return {pool[within], kHue0 + kHueStep * static_cast<double>(slot)};
}

}  // namespace

Tensor<float> render_image(const SynthSpec& spec, std::size_t index) {
    const std::size_t cls = index / spec.images_per_subcat;
    const std::size_t species = species_of_class(spec, cls);
    const SpeciesLook look = species_look(spec, species);
    const Glyph glyph = class_glyph(spec, cls);
    auto rng = stream(spec.seed, 3, index);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, spec.noise_std);

    const double n = static_cast<double>(spec.image_size);
    const double two_pi = 2.0 * std::numbers::pi;
    const double phase = two_pi * u(rng), phase2 = two_pi * u(rng);
    const double jitter = 0.25 * (u(rng) - 0.5);
    const double contrast = 0.8 + 0.4 * u(rng);
    const double brightness = 0.1 * (u(rng) - 0.5);
    std::normal_distribution<double> shift(0.0, kTintShift);
    const Rgb tint_shift{shift(rng), shift(rng), shift(rng)};
    const Rgb glyph_colour = hsv(glyph.hue + kHueJitter * (2.0 * u(rng) - 1.0), kGlyphSaturation, 0.95);
    const double ca = std::cos(look.angle + jitter), sa = std::sin(look.angle + jitter);
    const double cb = std::cos(look.angle2), sb = std::sin(look.angle2);

    // Glyph placement: the rotated square must stay inside the image.
    const double g = static_cast<double>(spec.glyph_size);
    const double radius = g * std::numbers::sqrt2 / 2.0;
    const double lo = radius + 0.5, hi = n - radius - 0.5;
    const double gx = lo + (hi - lo) * u(rng), gy = lo + (hi - lo) * u(rng);
    const double theta = two_pi * u(rng);
    const double ct = std::cos(theta), st = std::sin(theta);

    const std::size_t S = spec.image_size;
    Tensor<float> img({3, S, S});
    constexpr int kSuper = 3;
    for (std::size_t y = 0; y < S; ++y) {
        for (std::size_t x = 0; x < S; ++x) {
            const double px = static_cast<double>(x) + 0.5, py = static_cast<double>(y) + 0.5;
            const double t1 = std::sin(two_pi * look.freq * (px * ca + py * sa) / n + phase);
            const double t2 = std::sin(two_pi * look.freq2 * (px * cb + py * sb) / n + phase2);
            Rgb colour;
            for (int c = 0; c < 3; ++c) {
                colour[c] = look.base[c] + brightness + tint_shift[c] + contrast * (0.25 * t1 * look.tint[c] + 0.1 * t2);
            }
            // Supersampled glyph coverage.
            int covered = 0;
            for (int sy = 0; sy < kSuper; ++sy) {
                for (int sx = 0; sx < kSuper; ++sx) {
                    const double qx = static_cast<double>(x) + (sx + 0.5) / kSuper - gx;
                    const double qy = static_cast<double>(y) + (sy + 0.5) / kSuper - gy;
                    const double lx = ct * qx + st * qy + g / 2.0;
                    const double ly = -st * qx + ct * qy + g / 2.0;
                    if (lx < 0 || ly < 0 || lx >= g || ly >= g) continue;
                    const auto cx = static_cast<std::size_t>(lx / g * 3.0);
                    const auto cy = static_cast<std::size_t>(ly / g * 3.0);
                    if (glyph.pattern >> (std::min<std::size_t>(cy, 2) * 3 + std::min<std::size_t>(cx, 2)) & 1) ++covered;
                }
            }
            const double alpha = static_cast<double>(covered) / (kSuper * kSuper);
            for (std::size_t c = 0; c < 3; ++c) {
                double v = (1.0 - alpha) * colour[c] + alpha * glyph_colour[c] + noise(rng);
                v = std::clamp(v, 0.0, 1.0);
                img[(c * S + y) * S + x] = static_cast<float>(std::lround(v * 255.0)) / 255.0f;
            }
        }
    }
    return img;
}

Dataset generate_synthetic(const SynthSpec& spec) {
    spec.validate();
    std::vector<std::size_t> classes(spec.n_classes());
    for (std::size_t c = 0; c < classes.size(); ++c) classes[c] = c;
    const ClassSplit split = split_dataset(classes);

    Dataset d;
    d.n_classes = spec.n_classes();
    d.n_species = spec.n_species;
    d.image_size = spec.image_size;
    d.samples.reserve(spec.n_images());
    for (std::size_t i = 0; i < spec.n_images(); ++i) {
        Sample s;
        char name[32];
        std::snprintf(name, sizeof name, "img_%05zu", i);
        s.id = name;
        s.path = "images/" + s.id + ".ppm";
        s.subcat = i / spec.images_per_subcat;
        s.species = species_of_class(spec, s.subcat);
        s.split = std::find(split.train.begin(), split.train.end(), s.subcat) != split.train.end() ? "train" : "test";
        s.image = render_image(spec, i);
        d.samples.push_back(std::move(s));
    }
    return d;
}

void write_dataset(const Dataset& data, const SynthSpec& spec, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "images");
    std::ofstream manifest(dir / "manifest.csv", std::ios::trunc);
    if (!manifest) throw Error("cannot write manifest in " + dir.string());
    manifest << "path,species,subcat,split\n";
    for (const auto& s : data.samples) {
        write_ppm(dir / s.path, s.image);
        manifest << s.path << ',' << s.species << ',' << s.subcat << ',' << s.split << '\n';
    }
    std::ofstream js(dir / "spec.json", std::ios::trunc);
    js << nlohmann::json(spec).dump(2) << '\n';
}

Dataset gen_synthetic(const SynthSpec& spec, const std::filesystem::path& dir) {
    Dataset d = generate_synthetic(spec);
    write_dataset(d, spec, dir);
    return d;
}

Dataset load_dataset(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.csv");
    if (!in) throw Error("missing manifest.csv in " + dir.string());
    std::string line;
    std::getline(in, line);
    if (line != "path,species,subcat,split") throw FormatError("unexpected manifest header '" + line + "'", 0);
    Dataset d;
    std::size_t max_class = 0, max_species = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string path, species, subcat, split;
        if (!std::getline(ss, path, ',') || !std::getline(ss, species, ',') || !std::getline(ss, subcat, ',') ||
            !std::getline(ss, split)) {
            throw FormatError("malformed manifest line " + std::to_string(line_no), line_no);
        }
        if (split != "train" && split != "test") {
            throw FormatError("unknown split '" + split + "' on manifest line " + std::to_string(line_no), line_no);
        }
        Sample s;
        s.path = path;
        s.id = std::filesystem::path(path).stem().string();
        s.species = std::stoul(species);
        s.subcat = std::stoul(subcat);
        s.split = split;
        s.image = read_ppm(dir / path);
        max_class = std::max(max_class, s.subcat);
        max_species = std::max(max_species, s.species);
        d.samples.push_back(std::move(s));
    }
    if (d.samples.empty()) throw FormatError("manifest lists no images", 0);
    d.n_classes = max_class + 1;
    d.n_species = max_species + 1;
    d.image_size = d.samples.front().image.dim(1);
    return d;
}

}  // namespace frpt
