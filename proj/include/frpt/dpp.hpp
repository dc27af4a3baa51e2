#pragma once

#include <cstddef>

#include "frpt/backbone.hpp"
#include "frpt/record.hpp"

// Discriminative perturbation prompt: a learnable, content-aware warp of the
// input image that enlarges regions the projection map marks as important.
namespace frpt {

template <typename T>
struct DppParams {
    Tensor<T> w_k;  // [sigma (w), sigma (h), C_S]
    int sigma = 1;
    double gaussian_std = 0.25;
};

// Smallest odd integer >= ceil(feature_width / 2).
int desk_sigma(std::size_t feature_width);

// Throws ConfigError for an even sigma, sigma < ceil(W_S/2), non-positive
// gaussian_std, or a kernel whose shape is not [sigma, sigma, C_S].
template <typename T>
void validate_dpp(const DppParams<T>& params, std::size_t channels, std::size_t feature_width);

// Zero kernel (uniform map), learnable.
template <typename T>
DppParams<T> make_dpp_params(std::size_t channels, std::size_t feature_width, double gaussian_std = 0.25);

// Normalized spatial probability mass [H_S, W_S]; entries >= 0, sum 1.
template <typename T>
struct ProjectionMap {
    Var<T> weights;
};

// Per output pixel, the normalized source coordinate: [2, H, W] with plane 0
// holding mx (in [1/W_S, 1]) and plane 1 holding my (in [1/H_S, 1]).
template <typename T>
struct WarpGrid {
    Var<T> coords;
};

// Shared-kernel aggregation over a sigma x sigma x C_S neighbourhood with zero
// padding floor(sigma/2). m_s [C_S, H_S, W_S] -> raw map [H_S, W_S].
template <typename T>
Var<T> content_parse(Var<T> m_s, Var<T> w_k, int sigma);

// Spatial softmax plus a check of the map invariants.
template <typename T>
ProjectionMap<T> normalize_map(Var<T> raw);

// Gaussian-regularized, map-weighted average of grid coordinates for each
// output pixel. Pixel x (1-based) has normalized coordinate x / out_w; map
// column w (1-based) sits at w / W_S.
template <typename T>
WarpGrid<T> compute_mapping(const ProjectionMap<T>& map, std::size_t out_h, std::size_t out_w, double gaussian_std);

// Bilinear sampling of image [C, H, W] at source pixel (mx * W, my * H),
// 1-based, clamped to the image. Output takes the grid's spatial size.
template <typename T>
Var<T> warp(Var<T> image, const WarpGrid<T>& grid);

template <typename T>
struct DppOutput {
    Var<T> prompted;  // I_P
    ProjectionMap<T> map;
    WarpGrid<T> grid;
};

template <typename T>
DppOutput<T> dpp_forward(Record<T>& rec, Var<T> image, BackboneModel<T>& backbone, DppParams<T>& params);

}  // namespace frpt
