#include "frpt/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace frpt {

namespace {

std::uint8_t quantize(float v) {
    const float c = std::clamp(v, 0.0f, 1.0f);
    return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

// Next header token, skipping whitespace and '#' comments.
std::string token(std::istream& in) {
    std::string t;
    char ch;
    while (in.get(ch)) {
        if (ch == '#') {
            std::string rest;
            std::getline(in, rest);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!t.empty()) break;
            continue;
        }
        t.push_back(ch);
    }
    return t;
}

void ensure_parent(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

}  // namespace

Tensor<float> read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    if (token(in) != "P6") throw FormatError("not a binary PPM: " + path.string(), 0);
    const std::size_t w = std::stoul(token(in));
    const std::size_t h = std::stoul(token(in));
    const int maxval = std::stoi(token(in));
    if (maxval != 255) throw FormatError("unsupported PPM maxval in " + path.string(), 0);
    std::vector<unsigned char> raw(w * h * 3);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
        throw FormatError("truncated PPM pixel data in " + path.string(), static_cast<std::size_t>(in.gcount()));
    }
    Tensor<float> img({3, h, w});
    for (std::size_t p = 0; p < w * h; ++p)
        for (std::size_t c = 0; c < 3; ++c) img[c * h * w + p] = static_cast<float>(raw[p * 3 + c]) / 255.0f;
    return img;
}

void write_ppm(const std::filesystem::path& path, const Tensor<float>& image) {
    if (image.rank() != 3 || image.dim(0) != 3) throw ShapeError("write_ppm expects [3, H, W]");
    const std::size_t h = image.dim(1), w = image.dim(2);
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << "P6\n" << w << " " << h << "\n255\n";
    std::vector<unsigned char> raw(w * h * 3);
    for (std::size_t p = 0; p < w * h; ++p)
        for (std::size_t c = 0; c < 3; ++c) raw[p * 3 + c] = quantize(image[c * h * w + p]);
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

void write_pgm(const std::filesystem::path& path, const Tensor<float>& gray) {
    if (gray.rank() != 2) throw ShapeError("write_pgm expects [H, W]");
    const std::size_t h = gray.dim(0), w = gray.dim(1);
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << "P5\n" << w << " " << h << "\n255\n";
    std::vector<unsigned char> raw(w * h);
    for (std::size_t p = 0; p < w * h; ++p) raw[p] = quantize(gray[p]);
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

Tensor<float> to_gray(const Tensor<float>& image) {
    if (image.rank() != 3 || image.dim(0) != 3) throw ShapeError("to_gray expects [3, H, W]");
    const std::size_t h = image.dim(1), w = image.dim(2), n = h * w;
    Tensor<float> g({h, w});
    for (std::size_t p = 0; p < n; ++p) g[p] = 0.299f * image[p] + 0.587f * image[n + p] + 0.114f * image[2 * n + p];
    return g;
}

Tensor<float> stretch(const Tensor<float>& map) {
    auto [lo, hi] = std::minmax_element(map.data().begin(), map.data().end());
    Tensor<float> out(map.shape());
    const float range = *hi - *lo;
    if (range > 0.0f)
        for (std::size_t i = 0; i < map.size(); ++i) out[i] = (map[i] - *lo) / range;
    return out;
}

}  // namespace frpt
