#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

// Open-set retrieval evaluation with cosine distance.
namespace frpt {

struct EmbeddingIndex {
    std::vector<std::vector<float>> embeddings;
    std::vector<std::size_t> labels;
    std::vector<std::string> ids;

    // Throws ConfigError on a duplicate id or a dimension change.
    void add(std::vector<float> embedding, std::size_t label, std::string id);
    std::size_t size() const noexcept { return ids.size(); }
};

// 1 - a.b / (|a||b|), accumulated in double. Defined as 1 when either norm is
// zero.
double cosine_distance(std::span<const float> a, std::span<const float> b);

struct RecallReport {
    double recall = 0.0;
    std::size_t queries = 0;   // queries that entered the mean
    std::size_t excluded = 0;  // queries whose class has no other member
};

// Every item queries all others. A query scores 1 when one of its k nearest
// candidates shares its label. Equal distances are ordered by ascending id.
RecallReport recall_report(const EmbeddingIndex& index, std::size_t k);
double recall_at_k(const EmbeddingIndex& index, std::size_t k);

struct ClassSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// First half of the canonical class list trains, the rest is held out. With an
// odd count the extra class goes to test. Throws ConfigError for < 2 classes.
ClassSplit split_dataset(std::span<const std::size_t> classes);

}  // namespace frpt
