#include <random>

#include <gtest/gtest.h>

#include "frpt/retrieval.hpp"
#include "frpt/error.hpp"
#include "oracles.hpp"

using namespace frpt;

namespace {

EmbeddingIndex random_index(std::size_t n, std::size_t dim, std::size_t classes, std::mt19937_64& rng,
                            bool coarse = false) {
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    std::uniform_int_distribution<int> q(-2, 2);
    EmbeddingIndex index;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<float> e(dim);
        for (auto& v : e) v = coarse ? float(q(rng)) : u(rng);
        char id[16];
        std::snprintf(id, sizeof id, "img_%05zu", (i * 7919) % 100000);
        index.add(std::move(e), i % classes, id);
    }
    return index;
}

}  // namespace

TEST(Cosine, Examples) {
    std::vector<float> a{1, 2, 3}, b{-1, -2, -3}, c{3, 0, -1}, z{0, 0, 0};
    EXPECT_NEAR(cosine_distance(a, a), 0.0, 1e-12);
    EXPECT_NEAR(cosine_distance(a, c), 1.0, 1e-12);
    EXPECT_NEAR(cosine_distance(a, b), 2.0, 1e-12);
    EXPECT_EQ(cosine_distance(a, z), 1.0);
}

TEST(Recall, ExhaustiveWindowIsOne) {
    std::mt19937_64 rng(1);
    auto index = random_index(30, 4, 5, rng);
    EXPECT_EQ(recall_at_k(index, 29), 1.0);
    EXPECT_EQ(recall_at_k(index, 100), 1.0);
}

TEST(Recall, HandPlacedTwoClassCase) {
    EmbeddingIndex index;
    index.add({1.0f, 0.0f}, 0, "a");
    index.add({0.9f, 0.1f}, 1, "b");
    index.add({0.0f, 1.0f}, 1, "c");
    index.add({0.8f, 0.3f}, 0, "d");
    // a: nearest b (wrong); b: nearest a (wrong); c: nearest d (wrong);
    // d: nearest b (wrong).
    EXPECT_EQ(recall_at_k(index, 1), frpt::testing::recall_oracle(index, 1));
    EXPECT_EQ(recall_at_k(index, 1), 0.0);
    EXPECT_EQ(recall_at_k(index, 2), frpt::testing::recall_oracle(index, 2));
}

TEST(Recall, MatchesBruteForceExactly) {
    std::mt19937_64 rng(2);
    for (std::size_t n : {10u, 57u, 200u}) {
        for (bool coarse : {false, true}) {
            auto index = random_index(n, coarse ? 2 : 6, 1 + n / 8, rng, coarse);
            for (std::size_t k : {1u, 2u, 4u, 8u}) EXPECT_EQ(recall_at_k(index, k), frpt::testing::recall_oracle(index, k));
        }
    }
}

TEST(Recall, MonotoneInK) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 10; ++t) {
        auto index = random_index(60, 5, 12, rng);
        for (std::size_t k = 1; k < 20; ++k) EXPECT_GE(recall_at_k(index, k + 1), recall_at_k(index, k));
    }
}

TEST(Recall, ScaleInvariant) {
    std::mt19937_64 rng(4);
    auto index = random_index(80, 6, 10, rng);
    auto scaled = index;
    for (auto& e : scaled.embeddings)
        for (auto& v : e) v *= 4.0f;
    for (std::size_t k : {1u, 2u, 4u}) EXPECT_EQ(recall_at_k(index, k), recall_at_k(scaled, k));
}

TEST(Recall, SingletonQueriesExcluded) {
    EmbeddingIndex index;
    index.add({1, 0}, 0, "a");
    index.add({1, 0.1f}, 0, "b");
    index.add({0, 1}, 1, "c");
    auto report = recall_report(index, 1);
    EXPECT_EQ(report.excluded, 1u);
    EXPECT_EQ(report.queries, 2u);
    EXPECT_EQ(report.recall, 1.0);
    EXPECT_THROW(recall_report(index, 0), ConfigError);
}

TEST(Recall, TiesBreakByAscendingId) {
    EmbeddingIndex index;
    index.add({1, 0}, 0, "q");
    index.add({0, 1}, 1, "a");
    index.add({0, 1}, 0, "b");
    index.add({0, 1}, 1, "z");
    // q sees three equidistant candidates; "a" (wrong class) comes first.
    EXPECT_EQ(recall_report(index, 1).recall, frpt::testing::recall_oracle(index, 1));
    EmbeddingIndex only_q;
    only_q.add({1, 0}, 0, "q");
    only_q.add({0, 1}, 1, "a");
    only_q.add({0, 1}, 0, "b");
    EXPECT_EQ(recall_at_k(only_q, 1), frpt::testing::recall_oracle(only_q, 1));
}

TEST(Index, RejectsDuplicatesAndDimensionChanges) {
    EmbeddingIndex index;
    index.add({1, 2}, 0, "x");
    EXPECT_THROW(index.add({1, 2}, 0, "x"), ConfigError);
    EXPECT_THROW(index.add({1, 2, 3}, 0, "y"), ConfigError);
}

TEST(Split, Examples) {
    std::vector<std::size_t> c200(200), c32(32), c7(7);
    for (std::size_t i = 0; i < 200; ++i) c200[i] = i + 1;
    for (std::size_t i = 0; i < 32; ++i) c32[i] = i;
    for (std::size_t i = 0; i < 7; ++i) c7[i] = i;
    auto s = split_dataset(c200);
    ASSERT_EQ(s.train.size(), 100u);
    EXPECT_EQ(s.train.front(), 1u);
    EXPECT_EQ(s.train.back(), 100u);
    auto t = split_dataset(c32);
    EXPECT_EQ(t.train.size(), 16u);
    EXPECT_EQ(t.test.size(), 16u);
    for (auto a : t.train)
        for (auto b : t.test) EXPECT_NE(a, b);
    auto odd = split_dataset(c7);
    EXPECT_EQ(odd.train.size(), 3u);
    EXPECT_EQ(odd.test.size(), 4u);
    std::vector<std::size_t> one{0};
    EXPECT_THROW(split_dataset(one), ConfigError);
}
