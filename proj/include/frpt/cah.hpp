#pragma once

#include <cstddef>
#include <cstdint>

#include "frpt/record.hpp"

// Category-specific awareness head: per-channel gate between the original
// semantic features and their instance-normalized form.
namespace frpt {

template <typename T>
struct CahParams {
    Tensor<T> w_f;  // [C_P / r, C_P]
    Tensor<T> w_l;  // [C_P, C_P / r]
    std::size_t reduction = 8;
    double epsilon = 1e-5;
};

// w_f He-initialized from `seed`, w_l zero (gate starts at 0.5 everywhere).
// Both learnable. Throws ConfigError unless channels % reduction == 0.
template <typename T>
CahParams<T> make_cah_params(std::size_t channels, std::size_t reduction, double epsilon, std::uint64_t seed);

template <typename T>
void validate_cah(const CahParams<T>& params, std::size_t channels);

// sigmoid(w_l * relu(w_f * gap(m_p))), entries in (0, 1).
template <typename T>
Var<T> channel_attention(Var<T> m_p, Var<T> w_f, Var<T> w_l);

// w_c * m_p + (1 - w_c) * IN(m_p), broadcast per channel. With
// `use_instance_norm` false the normalized branch is dropped:
// w_c * m_p.
template <typename T>
Var<T> cah_forward(Var<T> m_p, Var<T> w_c, T epsilon, bool use_instance_norm = true);

// Registers the parameters and runs attention + blend.
template <typename T>
Var<T> cah_apply(Record<T>& rec, Var<T> m_p, CahParams<T>& params, bool use_instance_norm = true);

}  // namespace frpt
