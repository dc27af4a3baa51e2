#pragma once

#include <filesystem>

#include "frpt/tensor.hpp"

namespace frpt {

// Binary PPM (P6, maxval 255) <-> [3, H, W] in [0, 1].
Tensor<float> read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Tensor<float>& image);

// Binary PGM (P5). Values are clamped to [0, 1] and quantized.
void write_pgm(const std::filesystem::path& path, const Tensor<float>& gray);

// Rec. 601 luma of a [3, H, W] image -> [H, W].
Tensor<float> to_gray(const Tensor<float>& image);

// Min-max stretch of a map to [0, 1] (all-equal maps become 0).
Tensor<float> stretch(const Tensor<float>& map);

}  // namespace frpt
