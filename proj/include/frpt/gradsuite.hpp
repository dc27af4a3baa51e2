#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace frpt {

struct GradSuiteRow {
    std::string op;
    std::string wrt;
    double max_rel_error = 0.0;
    std::size_t trials = 0;
    std::size_t checked = 0;
    std::size_t excluded = 0;
};

// Finite-difference checks in double precision: every differentiable op on
// `trials` random small shapes, then the whole desk pipeline on a 3x16x16
// input with respect to each learnable tensor and the image. Op rows use
// central differences with `step`; pipeline rows use the five-point stencil
// with `pipeline_step`.
std::vector<GradSuiteRow> gradient_suite(std::size_t trials, std::uint64_t seed, double step = 1e-6,
                                         double pipeline_step = 1e-3);

}  // namespace frpt
