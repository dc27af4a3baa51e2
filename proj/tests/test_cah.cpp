#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "frpt/cah.hpp"
#include "frpt/ops.hpp"
#include "support.hpp"

using namespace frpt;
using frpt::testing::random_tensor;

namespace {

std::vector<double> in_oracle(const Tensor<double>& x, double eps) {
    const std::size_t C = x.dim(0), N = x.dim(1) * x.dim(2);
    std::vector<double> out(x.size());
    for (std::size_t c = 0; c < C; ++c) {
        double mean = 0.0, var = 0.0;
        for (std::size_t i = 0; i < N; ++i) mean += x[c * N + i];
        mean /= double(N);
        for (std::size_t i = 0; i < N; ++i) var += (x[c * N + i] - mean) * (x[c * N + i] - mean);
        var /= double(N);
        for (std::size_t i = 0; i < N; ++i) out[c * N + i] = (x[c * N + i] - mean) / std::sqrt(var + eps);
    }
    return out;
}

}  // namespace

TEST(ChannelAttention, ZeroLiftGivesHalf) {
    auto p = make_cah_params<double>(16, 8, 1e-5, 1);
    std::mt19937_64 rng(1);
    Record<double> rec;
    auto w = channel_attention(rec.constant(random_tensor<double>({16, 4, 4}, rng)), rec.leaf(p.w_f), rec.leaf(p.w_l));
    ASSERT_EQ(w.shape(), (Shape{16}));
    for (double v : w.value()) EXPECT_EQ(v, 0.5);
}

TEST(ChannelAttention, MatchesCompositionOracleAndStaysInOpenInterval) {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        Tensor<double> m = random_tensor<double>({8, 3, 5}, rng, -2.0, 2.0);
        Tensor<double> wf = random_tensor<double>({2, 8}, rng, -3.0, 3.0), wl = random_tensor<double>({8, 2}, rng, -3.0, 3.0);
        Record<double> rec;
        auto w = channel_attention(rec.constant(m), rec.constant(wf), rec.constant(wl));
        std::vector<double> g(8, 0.0), hid(2, 0.0);
        for (std::size_t c = 0; c < 8; ++c) {
            for (std::size_t i = 0; i < 15; ++i) g[c] += m[c * 15 + i];
            g[c] /= 15.0;
        }
        for (std::size_t j = 0; j < 2; ++j) {
            for (std::size_t c = 0; c < 8; ++c) hid[j] += wf[j * 8 + c] * g[c];
            hid[j] = std::max(hid[j], 0.0);
        }
        for (std::size_t c = 0; c < 8; ++c) {
            double z = 0.0;
            for (std::size_t j = 0; j < 2; ++j) z += wl[c * 2 + j] * hid[j];
            EXPECT_NEAR(w.value()[c], 1.0 / (1.0 + std::exp(-z)), 1e-6);
            EXPECT_GT(w.value()[c], 0.0);
            EXPECT_LT(w.value()[c], 1.0);
        }
    }
}

TEST(CahForward, GateOfOnesKeepsFeatures) {
    std::mt19937_64 rng(3);
    Tensor<double> m = random_tensor<double>({4, 3, 3}, rng);
    Record<double> rec;
    auto r = cah_forward(rec.constant(m), rec.constant(Tensor<double>({4}, 1.0)), 1e-5);
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_EQ(r.value()[i], m[i]);
}

TEST(CahForward, GateOfZerosGivesInstanceNorm) {
    std::mt19937_64 rng(4);
    Tensor<double> m = random_tensor<double>({4, 3, 3}, rng);
    Record<double> rec;
    auto r = cah_forward(rec.constant(m), rec.constant(Tensor<double>({4}, 0.0)), 1e-5);
    auto n = instance_norm(rec.constant(m), 1e-5);
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_EQ(r.value()[i], n.value()[i]);
}

TEST(CahForward, ConvexBlendOracleAndBoundedness) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        Tensor<double> m = random_tensor<double>({6, 4, 4}, rng, -3.0, 3.0);
        Tensor<double> wc = random_tensor<double>({6}, rng, 0.0, 1.0);
        Record<double> rec;
        auto r = cah_forward(rec.constant(m), rec.constant(wc), 1e-5);
        auto n = in_oracle(m, 1e-5);
        for (std::size_t c = 0; c < 6; ++c)
            for (std::size_t i = 0; i < 16; ++i) {
                const std::size_t k = c * 16 + i;
                const double want = wc[c] * m[k] + (1.0 - wc[c]) * n[k];
                EXPECT_NEAR(r.value()[k], want, 1e-6);
                EXPECT_GE(r.value()[k], std::min(m[k], n[k]) - 1e-12);
                EXPECT_LE(r.value()[k], std::max(m[k], n[k]) + 1e-12);
            }
    }
}

TEST(CahForward, WithoutNormalizationOnlyScales) {
    std::mt19937_64 rng(6);
    Tensor<double> m = random_tensor<double>({3, 2, 2}, rng);
    Tensor<double> wc = random_tensor<double>({3}, rng, 0.0, 1.0);
    Record<double> rec;
    auto r = cah_forward(rec.constant(m), rec.constant(wc), 1e-5, false);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(r.value()[c * 4 + i], wc[c] * m[c * 4 + i]);
}

TEST(CahParams, ShapesAndValidation) {
    auto p = make_cah_params<float>(64, 8, 1e-5, 0);
    EXPECT_EQ(p.w_f.shape(), (Shape{8, 64}));
    EXPECT_EQ(p.w_l.shape(), (Shape{64, 8}));
    EXPECT_TRUE(p.w_f.requires_grad());
    EXPECT_TRUE(p.w_l.requires_grad());
    for (float v : p.w_l.values()) EXPECT_EQ(v, 0.0f);
    EXPECT_THROW(make_cah_params<float>(60, 8, 1e-5, 0), ConfigError);
    EXPECT_THROW(validate_cah(p, 32), ConfigError);
}
