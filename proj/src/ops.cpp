#include "frpt/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace frpt {

namespace {

std::ptrdiff_t ceil_div(std::ptrdiff_t a, std::ptrdiff_t b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }
std::ptrdiff_t floor_div(std::ptrdiff_t a, std::ptrdiff_t b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

template <typename T>
void require_rank(Var<T> v, std::size_t rank, const char* op) {
    if (v.shape().size() != rank) {
        throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got shape " +
                         to_string(v.shape()));
    }
}

template <typename T>
void require_same_shape(Var<T> a, Var<T> b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
    }
}

template <typename T>
void require_same_record(Var<T> a, Var<T> b) {
    if (a.record != b.record) throw RecordError("operands come from different records");
}

template <typename T>
void accumulate(std::span<T> dst, std::span<const T> src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

// Output-column range [lo, hi] for which ox*stride + offset - pad lies in [0, extent).
struct Span1d {
    std::ptrdiff_t lo;
    std::ptrdiff_t hi;
};

Span1d valid_range(std::ptrdiff_t offset, std::ptrdiff_t pad, std::ptrdiff_t stride, std::ptrdiff_t extent,
                   std::ptrdiff_t out_extent) {
    std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, ceil_div(pad - offset, stride));
    std::ptrdiff_t hi = std::min<std::ptrdiff_t>(out_extent - 1, floor_div(extent - 1 + pad - offset, stride));
    return {lo, hi};
}

}  // namespace

template <typename T>
Var<T> conv2d(Var<T> input, Var<T> kernel, std::optional<Var<T>> bias, int padding, int stride) {
    require_same_record(input, kernel);
    require_rank(input, 3, "conv2d input");
    require_rank(kernel, 4, "conv2d kernel");
    const Shape& xs = input.shape();
    const Shape& ks = kernel.shape();
    const std::ptrdiff_t C = xs[0], H = xs[1], W = xs[2];
    const std::ptrdiff_t O = ks[0], K = ks[2];
    if (static_cast<std::ptrdiff_t>(ks[1]) != C) {
        throw ShapeError("conv2d: input has " + std::to_string(C) + " channels, kernel expects " +
                         std::to_string(ks[1]));
    }
    if (ks[2] != ks[3] || K % 2 == 0) throw ShapeError("conv2d: kernel must be square with odd size");
    if (padding < 0 || stride < 1) throw ConfigError("conv2d: padding must be >= 0 and stride >= 1");
    const std::ptrdiff_t P = padding, S = stride;
    if (H + 2 * P < K || W + 2 * P < K) throw ShapeError("conv2d: kernel larger than padded input");
    const std::ptrdiff_t OH = (H + 2 * P - K) / S + 1;
    const std::ptrdiff_t OW = (W + 2 * P - K) / S + 1;
    if (bias) {
        require_same_record(input, *bias);
        if (bias->shape() != Shape{static_cast<std::size_t>(O)}) throw ShapeError("conv2d: bias must be [C_out]");
    }

    auto in = input.value();
    auto kv = kernel.value();
    std::vector<T> out(O * OH * OW, T(0));
    if (bias) {
        auto bv = bias->value();
        for (std::ptrdiff_t o = 0; o < O; ++o) std::fill_n(out.begin() + o * OH * OW, OH * OW, bv[o]);
    }
    for (std::ptrdiff_t o = 0; o < O; ++o) {
        for (std::ptrdiff_t c = 0; c < C; ++c) {
            for (std::ptrdiff_t ky = 0; ky < K; ++ky) {
                for (std::ptrdiff_t kx = 0; kx < K; ++kx) {
                    const T w = kv[((o * C + c) * K + ky) * K + kx];
                    const Span1d xr = valid_range(kx, P, S, W, OW);
                    for (std::ptrdiff_t oy = 0; oy < OH; ++oy) {
                        const std::ptrdiff_t iy = oy * S + ky - P;
                        if (iy < 0 || iy >= H) continue;
                        T* orow = out.data() + (o * OH + oy) * OW;
                        const T* irow = in.data() + (c * H + iy) * W + kx - P;
                        for (std::ptrdiff_t ox = xr.lo; ox <= xr.hi; ++ox) orow[ox] += w * irow[ox * S];
                    }
                }
            }
        }
    }

    const std::size_t in_id = input.id, k_id = kernel.id;
    const std::optional<std::size_t> b_id = bias ? std::optional<std::size_t>(bias->id) : std::nullopt;
    auto backward = [=](Record<T>& rec, std::size_t self) {
        auto g = rec.adjoint_view(self);
        auto x = rec.value(in_id);
        auto kw = rec.value(k_id);
        const bool want_x = rec.needs_grad(in_id);
        const bool want_k = rec.needs_grad(k_id);
        std::span<T> gx = want_x ? rec.adjoint(in_id) : std::span<T>{};
        std::span<T> gk = want_k ? rec.adjoint(k_id) : std::span<T>{};
        for (std::ptrdiff_t o = 0; o < O; ++o) {
            for (std::ptrdiff_t c = 0; c < C; ++c) {
                for (std::ptrdiff_t ky = 0; ky < K; ++ky) {
                    for (std::ptrdiff_t kx = 0; kx < K; ++kx) {
                        const std::size_t widx = ((o * C + c) * K + ky) * K + kx;
                        const T w = kw[widx];
                        const Span1d xr = valid_range(kx, P, S, W, OW);
                        T acc = T(0);
                        for (std::ptrdiff_t oy = 0; oy < OH; ++oy) {
                            const std::ptrdiff_t iy = oy * S + ky - P;
                            if (iy < 0 || iy >= H) continue;
                            const T* grow = g.data() + (o * OH + oy) * OW;
                            const std::ptrdiff_t ioff = (c * H + iy) * W + kx - P;
                            if (want_x) {
                                T* gxrow = gx.data() + ioff;
                                for (std::ptrdiff_t ox = xr.lo; ox <= xr.hi; ++ox) gxrow[ox * S] += w * grow[ox];
                            }
                            if (want_k) {
                                const T* xrow = x.data() + ioff;
                                for (std::ptrdiff_t ox = xr.lo; ox <= xr.hi; ++ox) acc += grow[ox] * xrow[ox * S];
                            }
                        }
                        if (want_k) gk[widx] += acc;
                    }
                }
            }
        }
        if (b_id && rec.needs_grad(*b_id)) {
            auto gb = rec.adjoint(*b_id);
            for (std::ptrdiff_t o = 0; o < O; ++o) {
                T acc = T(0);
                for (std::ptrdiff_t i = 0; i < OH * OW; ++i) acc += g[o * OH * OW + i];
                gb[o] += acc;
            }
        }
    };
    Shape out_shape{static_cast<std::size_t>(O), static_cast<std::size_t>(OH), static_cast<std::size_t>(OW)};
    if (bias) return input.record->emit(std::move(out_shape), std::move(out), {input, kernel, *bias}, backward);
    return input.record->emit(std::move(out_shape), std::move(out), {input, kernel}, backward);
}

template <typename T>
Var<T> softmax2d(Var<T> raw) {
    require_rank(raw, 2, "softmax2d");
    auto x = raw.value();
    for (T v : x) {
        if (std::isnan(v)) throw NumericError("softmax2d: NaN in input map");
    }
    const T m = *std::max_element(x.begin(), x.end());
    std::vector<T> y(x.size());
    T total = T(0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = std::exp(x[i] - m);
        total += y[i];
    }
    for (T& v : y) v /= total;

    const std::size_t in_id = raw.id;
    return raw.record->emit(raw.shape(), std::move(y), {raw}, [in_id](Record<T>& rec, std::size_t self) {
        auto g = rec.adjoint_view(self);
        auto y = rec.value(self);
        T dot = T(0);
        for (std::size_t i = 0; i < y.size(); ++i) dot += g[i] * y[i];
        auto gx = rec.adjoint(in_id);
        for (std::size_t i = 0; i < y.size(); ++i) gx[i] += y[i] * (g[i] - dot);
    });
}

template <typename T>
Var<T> instance_norm(Var<T> features, T epsilon) {
    require_rank(features, 3, "instance_norm");
    if (!(epsilon > T(0))) throw ConfigError("instance_norm: epsilon must be > 0");
    const std::size_t C = features.shape()[0];
    const std::size_t N = features.shape()[1] * features.shape()[2];
    auto x = features.value();
    std::vector<T> y(x.size());
    std::vector<T> inv_std(C);
    for (std::size_t c = 0; c < C; ++c) {
        const T* xc = x.data() + c * N;
        T mean = T(0);
        for (std::size_t i = 0; i < N; ++i) mean += xc[i];
        mean /= static_cast<T>(N);
        T var = T(0);
        for (std::size_t i = 0; i < N; ++i) var += (xc[i] - mean) * (xc[i] - mean);
        var /= static_cast<T>(N);
        inv_std[c] = T(1) / std::sqrt(var + epsilon);
        for (std::size_t i = 0; i < N; ++i) y[c * N + i] = (xc[i] - mean) * inv_std[c];
    }

    const std::size_t in_id = features.id;
    return features.record->emit(
        features.shape(), std::move(y), {features},
        [in_id, C, N, inv_std = std::move(inv_std)](Record<T>& rec, std::size_t self) {
            auto g = rec.adjoint_view(self);
            auto y = rec.value(self);
            auto gx = rec.adjoint(in_id);
            const T n = static_cast<T>(N);
            for (std::size_t c = 0; c < C; ++c) {
                T gsum = T(0), gysum = T(0);
                for (std::size_t i = 0; i < N; ++i) {
                    gsum += g[c * N + i];
                    gysum += g[c * N + i] * y[c * N + i];
                }
                const T gmean = gsum / n, gymean = gysum / n;
                for (std::size_t i = 0; i < N; ++i) {
                    gx[c * N + i] += inv_std[c] * (g[c * N + i] - gmean - y[c * N + i] * gymean);
                }
            }
        });
}

template <typename T>
Var<T> fc(Var<T> input, Var<T> weights, std::optional<Var<T>> bias) {
    require_same_record(input, weights);
    require_rank(input, 1, "fc input");
    require_rank(weights, 2, "fc weights");
    const std::size_t O = weights.shape()[0], D = weights.shape()[1];
    if (input.shape()[0] != D) {
        throw ShapeError("fc: input has " + std::to_string(input.shape()[0]) + " features, weights expect " +
                         std::to_string(D));
    }
    if (bias) {
        require_same_record(input, *bias);
        if (bias->shape() != Shape{O}) throw ShapeError("fc: bias must be [D_out]");
    }
    auto x = input.value();
    auto w = weights.value();
    std::vector<T> y(O, T(0));
    for (std::size_t o = 0; o < O; ++o) {
        T acc = bias ? bias->value()[o] : T(0);
        for (std::size_t d = 0; d < D; ++d) acc += w[o * D + d] * x[d];
        y[o] = acc;
    }
    const std::size_t x_id = input.id, w_id = weights.id;
    const std::optional<std::size_t> b_id = bias ? std::optional<std::size_t>(bias->id) : std::nullopt;
    auto backward = [=](Record<T>& rec, std::size_t self) {
        auto g = rec.adjoint_view(self);
        auto x = rec.value(x_id);
        auto w = rec.value(w_id);
        if (rec.needs_grad(x_id)) {
            auto gx = rec.adjoint(x_id);
            for (std::size_t o = 0; o < O; ++o)
                for (std::size_t d = 0; d < D; ++d) gx[d] += w[o * D + d] * g[o];
        }
        if (rec.needs_grad(w_id)) {
            auto gw = rec.adjoint(w_id);
            for (std::size_t o = 0; o < O; ++o)
                for (std::size_t d = 0; d < D; ++d) gw[o * D + d] += g[o] * x[d];
        }
        if (b_id && rec.needs_grad(*b_id)) accumulate<T>(rec.adjoint(*b_id), g);
    };
    if (bias) return input.record->emit({O}, std::move(y), {input, weights, *bias}, backward);
    return input.record->emit({O}, std::move(y), {input, weights}, backward);
}

template <typename T>
Var<T> relu(Var<T> x) {
    auto v = x.value();
    std::vector<T> y(v.size());
    std::uint64_t mask_hash = 1469598103934665603ULL;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const bool on = v[i] > T(0);
        y[i] = on ? v[i] : T(0);
        mask_hash = (mask_hash ^ static_cast<std::uint64_t>(on)) * 1099511628211ULL;
    }
    x.record->note_branch(mask_hash);
    const std::size_t in_id = x.id;
    return x.record->emit(x.shape(), std::move(y), {x}, [in_id](Record<T>& rec, std::size_t self) {
        auto g = rec.adjoint_view(self);
        auto xv = rec.value(in_id);
        auto gx = rec.adjoint(in_id);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (xv[i] > T(0)) gx[i] += g[i];
    });
}

template <typename T>
Var<T> sigmoid(Var<T> x) {
    auto v = x.value();
    std::vector<T> y(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] >= T(0)) {
            y[i] = T(1) / (T(1) + std::exp(-v[i]));
        } else {
            const T e = std::exp(v[i]);
            y[i] = e / (T(1) + e);
        }
    }
    const std::size_t in_id = x.id;
    return x.record->emit(x.shape(), std::move(y), {x}, [in_id](Record<T>& rec, std::size_t self) {
        auto g = rec.adjoint_view(self);
        auto y = rec.value(self);
        auto gx = rec.adjoint(in_id);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i] * (T(1) - y[i]);
    });
}

template <typename T>
Var<T> gap(Var<T> features) {
    require_rank(features, 3, "gap");
    const std::size_t C = features.shape()[0];
    const std::size_t N = features.shape()[1] * features.shape()[2];
    auto x = features.value();
    std::vector<T> y(C);
    for (std::size_t c = 0; c < C; ++c) {
        T acc = T(0);
        for (std::size_t i = 0; i < N; ++i) acc += x[c * N + i];
        y[c] = acc / static_cast<T>(N);
    }
    const std::size_t in_id = features.id;
    return features.record->emit({C}, std::move(y), {features}, [in_id, C, N](Record<T>& rec, std::size_t self) {
        auto g = rec.adjoint_view(self);
        auto gx = rec.adjoint(in_id);
        for (std::size_t c = 0; c < C; ++c) {
            const T share = g[c] / static_cast<T>(N);
            for (std::size_t i = 0; i < N; ++i) gx[c * N + i] += share;
        }
    });
}

template <typename T>
Var<T> cross_entropy(Var<T> logits, std::size_t label) {
    require_rank(logits, 1, "cross_entropy");
    auto z = logits.value();
    if (label >= z.size()) {
        throw ShapeError("cross_entropy: label " + std::to_string(label) + " outside " + std::to_string(z.size()) +
                         " classes");
    }
    const T m = *std::max_element(z.begin(), z.end());
    T total = T(0);
    for (T v : z) total += std::exp(v - m);
    const T lse = m + std::log(total);
    std::vector<T> loss{lse - z[label]};
    const std::size_t in_id = logits.id;
    return logits.record->emit({1}, std::move(loss), {logits}, [in_id, label, lse](Record<T>& rec, std::size_t self) {
        const T g = rec.adjoint_view(self)[0];
        auto z = rec.value(in_id);
        auto gz = rec.adjoint(in_id);
        for (std::size_t i = 0; i < z.size(); ++i) {
            const T p = std::exp(z[i] - lse);
            gz[i] += g * (p - (i == label ? T(1) : T(0)));
        }
    });
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
    require_same_record(a, b);
    require_same_shape(a, b, "add");
    auto av = a.value(), bv = b.value();
    std::vector<T> y(av.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
    const std::size_t a_id = a.id, b_id = b.id;
    return a.record->emit(a.shape(), std::move(y), {a, b}, [a_id, b_id](Record<T>& rec, std::size_t self) {
        auto g = rec.adjoint_view(self);
        if (rec.needs_grad(a_id)) accumulate<T>(rec.adjoint(a_id), g);
        if (rec.needs_grad(b_id)) accumulate<T>(rec.adjoint(b_id), g);
    });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
    require_same_record(a, b);
    require_same_shape(a, b, "mul");
    auto av = a.value(), bv = b.value();
    std::vector<T> y(av.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i];
    const std::size_t a_id = a.id, b_id = b.id;
    return a.record->emit(a.shape(), std::move(y), {a, b}, [a_id, b_id](Record<T>& rec, std::size_t self) {
        auto g = rec.adjoint_view(self);
        auto av = rec.value(a_id);
        auto bv = rec.value(b_id);
        if (rec.needs_grad(a_id)) {
            auto ga = rec.adjoint(a_id);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
        }
        if (rec.needs_grad(b_id)) {
            auto gb = rec.adjoint(b_id);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
        }
    });
}

template <typename T>
Var<T> scale(Var<T> a, T factor) {
    auto av = a.value();
    std::vector<T> y(av.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * factor;
    const std::size_t a_id = a.id;
    return a.record->emit(a.shape(), std::move(y), {a}, [a_id, factor](Record<T>& rec, std::size_t self) {
        auto g = rec.adjoint_view(self);
        auto ga = rec.adjoint(a_id);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor;
    });
}

template <typename T>
Var<T> one_minus(Var<T> a) {
    auto av = a.value();
    std::vector<T> y(av.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = T(1) - av[i];
    const std::size_t a_id = a.id;
    return a.record->emit(a.shape(), std::move(y), {a}, [a_id](Record<T>& rec, std::size_t self) {
        auto g = rec.adjoint_view(self);
        auto ga = rec.adjoint(a_id);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] -= g[i];
    });
}

template <typename T>
Var<T> channel_scale(Var<T> x, Var<T> w) {
    require_same_record(x, w);
    require_rank(x, 3, "channel_scale features");
    require_rank(w, 1, "channel_scale weights");
    const std::size_t C = x.shape()[0];
    const std::size_t N = x.shape()[1] * x.shape()[2];
    if (w.shape()[0] != C) throw ShapeError("channel_scale: weight length must equal channel count");
    auto xv = x.value(), wv = w.value();
    std::vector<T> y(xv.size());
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t i = 0; i < N; ++i) y[c * N + i] = wv[c] * xv[c * N + i];
    const std::size_t x_id = x.id, w_id = w.id;
    return x.record->emit(x.shape(), std::move(y), {x, w}, [=](Record<T>& rec, std::size_t self) {
        auto g = rec.adjoint_view(self);
        auto xv = rec.value(x_id);
        auto wv = rec.value(w_id);
        if (rec.needs_grad(x_id)) {
            auto gx = rec.adjoint(x_id);
            for (std::size_t c = 0; c < C; ++c)
                for (std::size_t i = 0; i < N; ++i) gx[c * N + i] += g[c * N + i] * wv[c];
        }
        if (rec.needs_grad(w_id)) {
            auto gw = rec.adjoint(w_id);
            for (std::size_t c = 0; c < C; ++c) {
                T acc = T(0);
                for (std::size_t i = 0; i < N; ++i) acc += g[c * N + i] * xv[c * N + i];
                gw[c] += acc;
            }
        }
    });
}

template <typename T>
Var<T> sum(Var<T> a) {
    auto av = a.value();
    T total = T(0);
    for (T v : av) total += v;
    const std::size_t a_id = a.id;
    return a.record->emit({1}, {total}, {a}, [a_id](Record<T>& rec, std::size_t self) {
        const T g = rec.adjoint_view(self)[0];
        auto ga = rec.adjoint(a_id);
        for (T& v : ga) v += g;
    });
}

template <typename T>
Var<T> reshape(Var<T> a, Shape shape) {
    if (numel(shape) != a.size()) {
        throw ShapeError("reshape: cannot view " + to_string(a.shape()) + " as " + to_string(shape));
    }
    auto av = a.value();
    std::vector<T> y(av.begin(), av.end());
    const std::size_t a_id = a.id;
    return a.record->emit(std::move(shape), std::move(y), {a}, [a_id](Record<T>& rec, std::size_t self) {
        accumulate<T>(rec.adjoint(a_id), rec.adjoint_view(self));
    });
}

template <typename T>
Var<T> permute(Var<T> a, std::span<const std::size_t> axes) {
    const Shape& in_shape = a.shape();
    const std::size_t rank = in_shape.size();
    if (axes.size() != rank) throw ShapeError("permute: axis list length must equal rank");
    std::vector<bool> seen(rank, false);
    for (std::size_t ax : axes) {
        if (ax >= rank || seen[ax]) throw ShapeError("permute: axes must be a permutation");
        seen[ax] = true;
    }
    Shape out_shape(rank);
    for (std::size_t i = 0; i < rank; ++i) out_shape[i] = in_shape[axes[i]];

    std::vector<std::size_t> in_stride(rank, 1);
    for (std::size_t i = rank - 1; i-- > 0;) in_stride[i] = in_stride[i + 1] * in_shape[i + 1];
    // Input offset for each output element, in output order.
    const std::size_t n = a.size();
    std::vector<std::size_t> src(n);
    std::vector<std::size_t> idx(rank, 0);
    for (std::size_t flat = 0; flat < n; ++flat) {
        std::size_t off = 0;
        for (std::size_t i = 0; i < rank; ++i) off += idx[i] * in_stride[axes[i]];
        src[flat] = off;
        for (std::size_t i = rank; i-- > 0;) {
            if (++idx[i] < out_shape[i]) break;
            idx[i] = 0;
        }
    }
    auto av = a.value();
    std::vector<T> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = av[src[i]];
    const std::size_t a_id = a.id;
    return a.record->emit(std::move(out_shape), std::move(y), {a},
                          [a_id, src = std::move(src)](Record<T>& rec, std::size_t self) {
                              auto g = rec.adjoint_view(self);
                              auto ga = rec.adjoint(a_id);
                              for (std::size_t i = 0; i < g.size(); ++i) ga[src[i]] += g[i];
                          });
}

#define FRPT_INSTANTIATE_OPS(T)                                                                     \
    template Var<T> conv2d<T>(Var<T>, Var<T>, std::optional<Var<T>>, int, int);                     \
    template Var<T> softmax2d<T>(Var<T>);                                                           \
    template Var<T> instance_norm<T>(Var<T>, T);                                                    \
    template Var<T> fc<T>(Var<T>, Var<T>, std::optional<Var<T>>);                                   \
    template Var<T> relu<T>(Var<T>);                                                                \
    template Var<T> sigmoid<T>(Var<T>);                                                             \
    template Var<T> gap<T>(Var<T>);                                                                 \
    template Var<T> cross_entropy<T>(Var<T>, std::size_t);                                          \
    template Var<T> add<T>(Var<T>, Var<T>);                                                         \
    template Var<T> mul<T>(Var<T>, Var<T>);                                                         \
    template Var<T> scale<T>(Var<T>, T);                                                            \
    template Var<T> one_minus<T>(Var<T>);                                                           \
    template Var<T> channel_scale<T>(Var<T>, Var<T>);                                               \
    template Var<T> sum<T>(Var<T>);                                                                 \
    template Var<T> reshape<T>(Var<T>, Shape);                                                      \
    template Var<T> permute<T>(Var<T>, std::span<const std::size_t>);

FRPT_INSTANTIATE_OPS(float)
FRPT_INSTANTIATE_OPS(double)

}  // namespace frpt
