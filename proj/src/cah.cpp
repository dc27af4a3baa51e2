#include "frpt/cah.hpp"

#include <cmath>
#include <random>

#include "frpt/ops.hpp"

namespace frpt {

template <typename T>
void validate_cah(const CahParams<T>& params, std::size_t channels) {
    if (params.reduction == 0 || channels % params.reduction != 0) {
        throw ConfigError("channel count " + std::to_string(channels) + " is not divisible by reduction " +
                          std::to_string(params.reduction));
    }
    if (!(params.epsilon > 0.0)) throw ConfigError("instance-norm epsilon must be > 0");
    const std::size_t hidden = channels / params.reduction;
    if (params.w_f.shape() != Shape{hidden, channels} || params.w_l.shape() != Shape{channels, hidden}) {
        throw ConfigError("attention weight shapes do not match " + std::to_string(channels) + " channels");
    }
}

template <typename T>
CahParams<T> make_cah_params(std::size_t channels, std::size_t reduction, double epsilon, std::uint64_t seed) {
    if (reduction == 0 || channels % reduction != 0) {
        throw ConfigError("channel count " + std::to_string(channels) + " is not divisible by reduction " +
                          std::to_string(reduction));
    }
    const std::size_t hidden = channels / reduction;
    CahParams<T> p;
    p.reduction = reduction;
    p.epsilon = epsilon;
    p.w_f = Tensor<T>({hidden, channels});
    p.w_l = Tensor<T>({channels, hidden});
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(channels)));
    for (auto& v : p.w_f.data()) v = static_cast<T>(dist(rng));
    p.w_f.set_requires_grad(true);
    p.w_l.set_requires_grad(true);
    validate_cah(p, channels);
    return p;
}

template <typename T>
Var<T> channel_attention(Var<T> m_p, Var<T> w_f, Var<T> w_l) {
    return sigmoid(fc(relu(fc(gap(m_p), w_f)), w_l));
}

template <typename T>
Var<T> cah_forward(Var<T> m_p, Var<T> w_c, T epsilon, bool use_instance_norm) {
    if (m_p.shape().size() != 3 || w_c.shape() != Shape{m_p.shape()[0]}) {
        throw ShapeError("cah_forward: gate " + to_string(w_c.shape()) + " does not match features " +
                         to_string(m_p.shape()));
    }
    Var<T> kept = channel_scale(m_p, w_c);
    if (!use_instance_norm) return kept;
    Var<T> normalized = channel_scale(instance_norm(m_p, epsilon), one_minus(w_c));
    return add(kept, normalized);
}

template <typename T>
Var<T> cah_apply(Record<T>& rec, Var<T> m_p, CahParams<T>& params, bool use_instance_norm) {
    validate_cah(params, m_p.shape().at(0));
    Var<T> w_c = channel_attention(m_p, rec.leaf(params.w_f), rec.leaf(params.w_l));
    return cah_forward(m_p, w_c, static_cast<T>(params.epsilon), use_instance_norm);
}

#define FRPT_INSTANTIATE_CAH(T)                                                                   \
    template void validate_cah<T>(const CahParams<T>&, std::size_t);                              \
    template CahParams<T> make_cah_params<T>(std::size_t, std::size_t, double, std::uint64_t);    \
    template Var<T> channel_attention<T>(Var<T>, Var<T>, Var<T>);                                 \
    template Var<T> cah_forward<T>(Var<T>, Var<T>, T, bool);                                      \
    template Var<T> cah_apply<T>(Record<T>&, Var<T>, CahParams<T>&, bool);

FRPT_INSTANTIATE_CAH(float)
FRPT_INSTANTIATE_CAH(double)

}  // namespace frpt
