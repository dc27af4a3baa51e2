#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include "frpt/record.hpp"

// Differentiable operations over Record variables. Image-like values use
// [C,H,W] layout; 2-D maps use [H,W].
namespace frpt {

// 2-D cross-correlation with zero padding.
// input [C_in,H,W], kernel [C_out,C_in,k,k] with k odd, optional bias [C_out].
// Output [C_out, (H + 2p - k)/stride + 1, (W + 2p - k)/stride + 1].
template <typename T>
Var<T> conv2d(Var<T> input, Var<T> kernel, std::optional<Var<T>> bias, int padding, int stride = 1);

// Softmax over every entry of a rank-2 map. Throws NumericError on NaN.
template <typename T>
Var<T> softmax2d(Var<T> raw);

// Parameter-free per-channel standardization of [C,H,W] with population
// variance.
template <typename T>
Var<T> instance_norm(Var<T> features, T epsilon);

// weights [D_out,D_in] times input [D_in], plus optional bias [D_out].
template <typename T>
Var<T> fc(Var<T> input, Var<T> weights, std::optional<Var<T>> bias = std::nullopt);

// Subgradient at 0 is 0.
template <typename T>
Var<T> relu(Var<T> x);

template <typename T>
Var<T> sigmoid(Var<T> x);

// Global average pooling [C,H,W] -> [C].
template <typename T>
Var<T> gap(Var<T> features);

// -log softmax(logits)[label], logits [K].
template <typename T>
Var<T> cross_entropy(Var<T> logits, std::size_t label);

template <typename T>
Var<T> add(Var<T> a, Var<T> b);

// Elementwise product of equal shapes.
template <typename T>
Var<T> mul(Var<T> a, Var<T> b);

template <typename T>
Var<T> scale(Var<T> a, T factor);

// 1 - a
template <typename T>
Var<T> one_minus(Var<T> a);

// x [C,H,W] scaled per channel by w [C].
template <typename T>
Var<T> channel_scale(Var<T> x, Var<T> w);

// Sum of all entries, shape [1].
template <typename T>
Var<T> sum(Var<T> a);

template <typename T>
Var<T> reshape(Var<T> a, Shape shape);

// Reorders axes; axes[i] names the input axis that becomes output axis i.
template <typename T>
Var<T> permute(Var<T> a, std::span<const std::size_t> axes);

}  // namespace frpt
