#include "frpt/dpp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "frpt/ops.hpp"

namespace frpt {

int desk_sigma(std::size_t feature_width) {
    int s = static_cast<int>((feature_width + 1) / 2);
    if (s % 2 == 0) ++s;
    return std::max(s, 1);
}

template <typename T>
void validate_dpp(const DppParams<T>& params, std::size_t channels, std::size_t feature_width) {
    const int sigma = params.sigma;
    if (sigma < 1 || sigma % 2 == 0) throw ConfigError("content kernel size must be odd, got " + std::to_string(sigma));
    const std::size_t min_sigma = (feature_width + 1) / 2;
    if (static_cast<std::size_t>(sigma) < min_sigma) {
        throw ConfigError("content kernel size " + std::to_string(sigma) + " is below half the feature width (" +
                          std::to_string(min_sigma) + ")");
    }
    if (!(params.gaussian_std > 0.0)) throw ConfigError("gaussian_std must be > 0");
    const auto s = static_cast<std::size_t>(sigma);
    if (params.w_k.shape() != Shape{s, s, channels}) {
        throw ConfigError("content kernel shape " + to_string(params.w_k.shape()) + " does not match " +
                          to_string(Shape{s, s, channels}));
    }
}

template <typename T>
DppParams<T> make_dpp_params(std::size_t channels, std::size_t feature_width, double gaussian_std) {
    DppParams<T> p;
    p.sigma = desk_sigma(feature_width);
    const auto s = static_cast<std::size_t>(p.sigma);
    p.w_k = Tensor<T>({s, s, channels});
    p.w_k.set_requires_grad(true);
    p.gaussian_std = gaussian_std;
    validate_dpp(p, channels, feature_width);
    return p;
}

template <typename T>
Var<T> content_parse(Var<T> m_s, Var<T> w_k, int sigma) {
    if (m_s.shape().size() != 3) throw ShapeError("content_parse: features must be [C_S, H_S, W_S]");
    const std::size_t C = m_s.shape()[0], H = m_s.shape()[1], W = m_s.shape()[2];
    if (sigma < 1 || sigma % 2 == 0) throw ConfigError("content kernel size must be odd");
    if (static_cast<std::size_t>(sigma) < (W + 1) / 2) {
        throw ConfigError("content kernel size must be at least half the feature width");
    }
    const auto s = static_cast<std::size_t>(sigma);
    if (w_k.shape() != Shape{s, s, C}) {
        throw ShapeError("content kernel shape " + to_string(w_k.shape()) + " does not match features " +
                         to_string(m_s.shape()));
    }
    // [w, h, c] -> [c, h, w] -> [1, c, h, w]
    static constexpr std::array<std::size_t, 3> kToConv{2, 1, 0};
    Var<T> kernel = reshape(permute(w_k, std::span<const std::size_t>(kToConv)), Shape{1, C, s, s});
    Var<T> raw = conv2d<T>(m_s, kernel, std::nullopt, sigma / 2, 1);
    return reshape(raw, Shape{H, W});
}

template <typename T>
ProjectionMap<T> normalize_map(Var<T> raw) {
    Var<T> a = softmax2d(raw);
    const T tol = std::is_same_v<T, double> ? T(1e-6) : T(1e-4);
    T total = T(0);
    for (T v : a.value()) {
        if (!(v >= T(0))) throw NumericError("projection map has a negative or NaN entry");
        total += v;
    }
    if (std::abs(total - T(1)) > tol) throw NumericError("projection map does not sum to 1");
    return {a};
}

template <typename T>
WarpGrid<T> compute_mapping(const ProjectionMap<T>& map, std::size_t out_h, std::size_t out_w, double gaussian_std) {
    Var<T> a = map.weights;
    if (a.shape().size() != 2) throw ShapeError("compute_mapping: map must be [H_S, W_S]");
    if (out_h < 1 || out_w < 1) throw ConfigError("compute_mapping: output size must be >= 1");
    if (!(gaussian_std > 0.0)) throw ConfigError("compute_mapping: gaussian_std must be > 0");
    const std::size_t Hs = a.shape()[0], Ws = a.shape()[1];
    const std::size_t H = out_h, W = out_w;
    const T inv2s2 = T(1) / (T(2) * T(gaussian_std) * T(gaussian_std));

    std::vector<T> gx(Ws), gy(Hs);
    for (std::size_t w = 0; w < Ws; ++w) gx[w] = T(w + 1) / T(Ws);
    for (std::size_t h = 0; h < Hs; ++h) gy[h] = T(h + 1) / T(Hs);
    // Gaussian factors; the 2-D kernel separates into x and y parts.
    std::vector<T> dx(W * Ws), dy(H * Hs);
    for (std::size_t x = 0; x < W; ++x) {
        const T u = T(x + 1) / T(W);
        for (std::size_t w = 0; w < Ws; ++w) dx[x * Ws + w] = std::exp(-(u - gx[w]) * (u - gx[w]) * inv2s2);
    }
    for (std::size_t y = 0; y < H; ++y) {
        const T v = T(y + 1) / T(H);
        for (std::size_t h = 0; h < Hs; ++h) dy[y * Hs + h] = std::exp(-(v - gy[h]) * (v - gy[h]) * inv2s2);
    }

    auto av = a.value();
    // Row-collapsed mass t0[y][w] = sum_h Dy A and the column means
    // cy[y][w] = sum_h (Dy A / t0) gy. Averages are formed from normalized
    // weights so a single nonzero entry reproduces its coordinate exactly.
    std::vector<T> t0(H * Ws, T(0)), cy(H * Ws, T(0));
    for (std::size_t y = 0; y < H; ++y) {
        for (std::size_t h = 0; h < Hs; ++h) {
            const T d = dy[y * Hs + h];
            for (std::size_t w = 0; w < Ws; ++w) t0[y * Ws + w] += d * av[h * Ws + w];
        }
        for (std::size_t h = 0; h < Hs; ++h) {
            const T d = dy[y * Hs + h];
            for (std::size_t w = 0; w < Ws; ++w) {
                const T mass = t0[y * Ws + w];
                if (mass > T(0)) cy[y * Ws + w] += (d * av[h * Ws + w] / mass) * gy[h];
            }
        }
    }
    std::vector<T> den(H * W), out(2 * H * W);
    for (std::size_t y = 0; y < H; ++y) {
        for (std::size_t x = 0; x < W; ++x) {
            T s0 = T(0);
            for (std::size_t w = 0; w < Ws; ++w) s0 += t0[y * Ws + w] * dx[x * Ws + w];
            if (!(s0 > T(0))) throw NumericError("compute_mapping: degenerate normalizer");
            T mx = T(0), my = T(0);
            for (std::size_t w = 0; w < Ws; ++w) {
                const T q = t0[y * Ws + w] * dx[x * Ws + w] / s0;
                mx += q * gx[w];
                my += q * cy[y * Ws + w];
            }
            den[y * W + x] = s0;
            out[y * W + x] = mx;
            out[H * W + y * W + x] = my;
        }
    }

    const std::size_t a_id = a.id;
    Var<T> coords = a.record->emit(
        Shape{2, H, W}, std::move(out), {a},
        [=, gx = std::move(gx), gy = std::move(gy), dx = std::move(dx), dy = std::move(dy),
         den = std::move(den)](Record<T>& rec, std::size_t self) {
            auto g = rec.adjoint_view(self);
            auto m = rec.value(self);
            // d/d(numerators) and d/d(denominator) per pixel
            std::vector<T> dt0(H * Ws, T(0)), dt1(H * Ws, T(0));
            for (std::size_t y = 0; y < H; ++y) {
                for (std::size_t x = 0; x < W; ++x) {
                    const std::size_t p = y * W + x;
                    const T gmx = g[p], gmy = g[H * W + p];
                    const T dnx = gmx / den[p];
                    const T dny = gmy / den[p];
                    const T dden = -(gmx * m[p] + gmy * m[H * W + p]) / den[p];
                    for (std::size_t w = 0; w < Ws; ++w) {
                        const T d = dx[x * Ws + w];
                        dt0[y * Ws + w] += d * (dden + dnx * gx[w]);
                        dt1[y * Ws + w] += d * dny;
                    }
                }
            }
            auto ga = rec.adjoint(a_id);
            for (std::size_t y = 0; y < H; ++y) {
                for (std::size_t h = 0; h < Hs; ++h) {
                    const T d = dy[y * Hs + h];
                    for (std::size_t w = 0; w < Ws; ++w) {
                        ga[h * Ws + w] += d * (dt0[y * Ws + w] + gy[h] * dt1[y * Ws + w]);
                    }
                }
            }
        });
    return {coords};
}

namespace {

// Source pixel location along one axis in 0-based array coordinates.
template <typename T>
struct Tap {
    std::size_t i0;
    std::size_t i1;
    T frac;
    bool clamped;
};

template <typename T>
Tap<T> locate(T normalized, std::size_t extent) {
    T a = normalized * T(extent) - T(1);
    // Rounding in normalized * extent must not leak into the neighbouring pixel.
    const T nearest = std::round(a);
    if (std::abs(a - nearest) <= T(8) * std::numeric_limits<T>::epsilon() * T(extent)) a = nearest;
    bool clamped = false;
    const T hi = T(extent - 1);
    if (a < T(0)) {
        a = T(0);
        clamped = true;
    } else if (a > hi) {
        a = hi;
        clamped = true;
    }
    const auto i0 = static_cast<std::size_t>(std::floor(a));
    const std::size_t i1 = std::min(i0 + 1, extent - 1);
    return {i0, i1, a - T(i0), clamped};
}

}  // namespace

template <typename T>
Var<T> warp(Var<T> image, const WarpGrid<T>& grid) {
    Var<T> g = grid.coords;
    if (image.record != g.record) throw RecordError("warp: image and grid come from different records");
    if (image.shape().size() != 3) throw ShapeError("warp: image must be [C, H, W]");
    if (g.shape().size() != 3 || g.shape()[0] != 2) throw ShapeError("warp: grid must be [2, H, W]");
    const std::size_t C = image.shape()[0], Hin = image.shape()[1], Win = image.shape()[2];
    const std::size_t H = g.shape()[1], W = g.shape()[2];
    if (H != Hin || W != Win) {
        throw ShapeError("warp: grid " + to_string(g.shape()) + " does not match image " + to_string(image.shape()));
    }

    auto img = image.value();
    auto gv = g.value();
    std::vector<T> out(C * H * W);
    std::uint64_t cells = 1469598103934665603ULL;
    for (std::size_t p = 0; p < H * W; ++p) {
        const Tap<T> tx = locate(gv[p], Win);
        const Tap<T> ty = locate(gv[H * W + p], Hin);
        cells = (cells ^ (tx.i0 | (ty.i0 << 20) | (std::uint64_t(tx.clamped) << 40) | (std::uint64_t(ty.clamped) << 41))) *
                1099511628211ULL;
        const T w00 = (T(1) - tx.frac) * (T(1) - ty.frac), w01 = tx.frac * (T(1) - ty.frac);
        const T w10 = (T(1) - tx.frac) * ty.frac, w11 = tx.frac * ty.frac;
        for (std::size_t c = 0; c < C; ++c) {
            const T* plane = img.data() + c * Hin * Win;
            out[c * H * W + p] = w00 * plane[ty.i0 * Win + tx.i0] + w01 * plane[ty.i0 * Win + tx.i1] +
                                 w10 * plane[ty.i1 * Win + tx.i0] + w11 * plane[ty.i1 * Win + tx.i1];
        }
    }
    image.record->note_branch(cells);

    const std::size_t img_id = image.id, grid_id = g.id;
    return image.record->emit(Shape{C, H, W}, std::move(out), {image, g}, [=](Record<T>& rec, std::size_t self) {
        auto go = rec.adjoint_view(self);
        auto img = rec.value(img_id);
        auto gv = rec.value(grid_id);
        const bool want_img = rec.needs_grad(img_id);
        const bool want_grid = rec.needs_grad(grid_id);
        std::span<T> gi = want_img ? rec.adjoint(img_id) : std::span<T>{};
        std::span<T> gg = want_grid ? rec.adjoint(grid_id) : std::span<T>{};
        for (std::size_t p = 0; p < H * W; ++p) {
            const Tap<T> tx = locate(gv[p], Win);
            const Tap<T> ty = locate(gv[H * W + p], Hin);
            T dax = T(0), day = T(0);
            for (std::size_t c = 0; c < C; ++c) {
                const T gout = go[c * H * W + p];
                const std::size_t base = c * Hin * Win;
                const T v00 = img[base + ty.i0 * Win + tx.i0], v01 = img[base + ty.i0 * Win + tx.i1];
                const T v10 = img[base + ty.i1 * Win + tx.i0], v11 = img[base + ty.i1 * Win + tx.i1];
                if (want_img) {
                    gi[base + ty.i0 * Win + tx.i0] += gout * (T(1) - tx.frac) * (T(1) - ty.frac);
                    gi[base + ty.i0 * Win + tx.i1] += gout * tx.frac * (T(1) - ty.frac);
                    gi[base + ty.i1 * Win + tx.i0] += gout * (T(1) - tx.frac) * ty.frac;
                    gi[base + ty.i1 * Win + tx.i1] += gout * tx.frac * ty.frac;
                }
                dax += gout * ((T(1) - ty.frac) * (v01 - v00) + ty.frac * (v11 - v10));
                day += gout * ((T(1) - tx.frac) * (v10 - v00) + tx.frac * (v11 - v01));
            }
            if (want_grid) {
                if (!tx.clamped) gg[p] += dax * T(Win);
                if (!ty.clamped) gg[H * W + p] += day * T(Hin);
            }
        }
    });
}

template <typename T>
DppOutput<T> dpp_forward(Record<T>& rec, Var<T> image, BackboneModel<T>& backbone, DppParams<T>& params) {
    if (image.shape().size() != 3) throw ShapeError("dpp_forward: image must be [3, H, W]");
    Var<T> m_s = block1_forward(rec, backbone, image);
    validate_dpp(params, m_s.shape()[0], m_s.shape()[2]);
    Var<T> raw = content_parse(m_s, rec.leaf(params.w_k), params.sigma);
    ProjectionMap<T> map = normalize_map(raw);
    WarpGrid<T> grid = compute_mapping(map, image.shape()[1], image.shape()[2], params.gaussian_std);
    return {warp(image, grid), map, grid};
}

#define FRPT_INSTANTIATE_DPP(T)                                                                          \
    template void validate_dpp<T>(const DppParams<T>&, std::size_t, std::size_t);                        \
    template DppParams<T> make_dpp_params<T>(std::size_t, std::size_t, double);                          \
    template Var<T> content_parse<T>(Var<T>, Var<T>, int);                                               \
    template ProjectionMap<T> normalize_map<T>(Var<T>);                                                  \
    template WarpGrid<T> compute_mapping<T>(const ProjectionMap<T>&, std::size_t, std::size_t, double); \
    template Var<T> warp<T>(Var<T>, const WarpGrid<T>&);                                                 \
    template DppOutput<T> dpp_forward<T>(Record<T>&, Var<T>, BackboneModel<T>&, DppParams<T>&);

FRPT_INSTANTIATE_DPP(float)
FRPT_INSTANTIATE_DPP(double)

}  // namespace frpt
