#pragma once

#include <cstddef>
#include <functional>

#include "frpt/record.hpp"

namespace frpt {

// A deterministic program that registers `leaf` (and anything else it
// needs) in the given record and returns a scalar.
template <typename T>
using TensorProgram = std::function<Var<T>(Record<T>&)>;

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    // Coordinates whose +/- step changed a piecewise branch (relu sign,
    // bilinear cell, clamp). Central differences are meaningless there.
    std::size_t excluded = 0;
};

enum class Stencil {
    central,     // (f(x+h) - f(x-h)) / 2h
    five_point,  // (-f(x+2h) + 8f(x+h) - 8f(x-h) + f(x-2h)) / 12h
};

// Compares the analytic gradient of `program` w.r.t. `leaf` against central
// differences, coordinate by coordinate. Relative error uses the denominator
// max(|analytic|, |numeric|, 1e-8). `leaf` must require grad; its grad
// storage is cleared on return.
template <typename T>
GradCheckResult finite_diff_check(const TensorProgram<T>& program, Tensor<T>& leaf, T step,
                                  Stencil stencil = Stencil::central);

extern template GradCheckResult finite_diff_check<float>(const TensorProgram<float>&, Tensor<float>&, float, Stencil);
extern template GradCheckResult finite_diff_check<double>(const TensorProgram<double>&, Tensor<double>&, double,
                                                          Stencil);

}  // namespace frpt
