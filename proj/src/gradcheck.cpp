#include "frpt/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace frpt {

namespace {

template <typename T>
struct Evaluation {
    T value;
    std::uint64_t signature;
};

template <typename T>
Evaluation<T> evaluate(const TensorProgram<T>& program) {
    Record<T> rec;
    Var<T> out = program(rec);
    return {out.item(), rec.branch_signature()};
}

}  // namespace

template <typename T>
GradCheckResult finite_diff_check(const TensorProgram<T>& program, Tensor<T>& leaf, T step, Stencil stencil) {
    if (!(step > T(0))) throw ConfigError("finite_diff_check: step must be > 0");
    if (!leaf.requires_grad()) throw ConfigError("finite_diff_check: leaf must require grad");

    leaf.clear_grad();
    std::uint64_t base_signature = 0;
    {
        Record<T> rec;
        Var<T> out = program(rec);
        if (out.size() != 1) {
            throw ShapeError("finite_diff_check: program output must be scalar, got " + to_string(out.shape()));
        }
        rec.backward(out);
        base_signature = rec.branch_signature();
    }
    std::vector<T> analytic;
    if (leaf.has_grad()) {
        analytic.assign(leaf.grad().begin(), leaf.grad().end());
    } else {
        analytic.assign(leaf.size(), T(0));
    }
    leaf.clear_grad();

    GradCheckResult result;
    for (std::size_t i = 0; i < leaf.size(); ++i) {
        const T saved = leaf[i];
        auto at = [&](int k) {
            leaf[i] = saved + static_cast<T>(k) * step;
            return evaluate(program);
        };
        const int reach = stencil == Stencil::central ? 1 : 2;
        std::vector<Evaluation<T>> e;  // offsets -reach..reach, skipping 0
        bool kink = false;
        for (int k = -reach; k <= reach; ++k) {
            if (k == 0) continue;
            e.push_back(at(k));
            kink = kink || e.back().signature != base_signature;
        }
        leaf[i] = saved;
        if (kink) {
            ++result.excluded;
            continue;
        }
        const double h = static_cast<double>(step);
        double numeric = 0.0;
        if (stencil == Stencil::central) {
            numeric = (static_cast<double>(e[1].value) - static_cast<double>(e[0].value)) / (2.0 * h);
        } else {
            const double outer = static_cast<double>(e[0].value) - static_cast<double>(e[3].value);
            const double inner = static_cast<double>(e[2].value) - static_cast<double>(e[1].value);
            numeric = (outer + 8.0 * inner) / (12.0 * h);
        }
        const double a = static_cast<double>(analytic[i]);
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
        result.max_rel_error = std::max(result.max_rel_error, std::abs(a - numeric) / denom);
        ++result.checked;
    }
    leaf.clear_grad();
    return result;
}

template GradCheckResult finite_diff_check<float>(const TensorProgram<float>&, Tensor<float>&, float, Stencil);
template GradCheckResult finite_diff_check<double>(const TensorProgram<double>&, Tensor<double>&, double, Stencil);

}  // namespace frpt
