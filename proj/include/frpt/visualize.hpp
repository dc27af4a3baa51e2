#pragma once

#include <filesystem>

#include "frpt/dpp.hpp"

namespace frpt {

struct WarpVisual {
    Tensor<float> original;  // [H, W] luma
    Tensor<float> warped;    // [H, W] luma
    Tensor<float> map;       // [H, W], projection map stretched and upsampled
};

WarpVisual warp_visualization(const Tensor<float>& image, BackboneModel<float>& backbone, DppParams<float>& params);

// <stem>.orig.pgm, <stem>.warped.pgm, <stem>.map.pgm
void write_warp_visualization(const std::filesystem::path& stem, const WarpVisual& visual);

}  // namespace frpt
