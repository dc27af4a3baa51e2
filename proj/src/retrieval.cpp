#include "frpt/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "frpt/error.hpp"

namespace frpt {

void EmbeddingIndex::add(std::vector<float> embedding, std::size_t label, std::string id) {
    if (!embeddings.empty() && embedding.size() != embeddings.front().size()) {
        throw ConfigError("embedding dimension changed within index");
    }
    if (std::find(ids.begin(), ids.end(), id) != ids.end()) throw ConfigError("duplicate image id " + id);
    embeddings.push_back(std::move(embedding));
    labels.push_back(label);
    ids.push_back(std::move(id));
}

double cosine_distance(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) throw ShapeError("cosine_distance: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        spdlog::debug("cosine_distance: zero-norm embedding, distance defined as 1");
        return 1.0;
    }
    return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

RecallReport recall_report(const EmbeddingIndex& index, std::size_t k) {
    if (k < 1) throw ConfigError("recall_at_k: k must be >= 1");
    const std::size_t n = index.size();
    if (index.embeddings.size() != n || index.labels.size() != n) {
        throw ConfigError("embedding index has unequal list lengths");
    }
    std::map<std::size_t, std::size_t> class_size;
    for (std::size_t l : index.labels) ++class_size[l];

    RecallReport report;
    std::size_t hits = 0;
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(n);
    for (std::size_t q = 0; q < n; ++q) {
        if (class_size[index.labels[q]] < 2) {
            ++report.excluded;
            continue;
        }
        cand.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == q) continue;
            cand.emplace_back(cosine_distance(index.embeddings[q], index.embeddings[j]), j);
        }
        const std::size_t top = std::min(k, cand.size());
        auto closer = [&](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first < b.first;
            return index.ids[a.second] < index.ids[b.second];
        };
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(top), cand.end(), closer);
        const bool hit = std::any_of(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(top),
                                     [&](const auto& c) { return index.labels[c.second] == index.labels[q]; });
        hits += hit ? 1 : 0;
        ++report.queries;
    }
    if (report.excluded > 0) {
        spdlog::info("recall@{}: excluded {} singleton-class queries", k, report.excluded);
    }
    report.recall = report.queries ? static_cast<double>(hits) / static_cast<double>(report.queries) : 0.0;
    return report;
}

double recall_at_k(const EmbeddingIndex& index, std::size_t k) { return recall_report(index, k).recall; }

ClassSplit split_dataset(std::span<const std::size_t> classes) {
    if (classes.size() < 2) throw ConfigError("split_dataset needs at least 2 classes");
    std::unordered_set<std::size_t> seen;
    for (std::size_t c : classes)
        if (!seen.insert(c).second) throw ConfigError("duplicate class id " + std::to_string(c));
    const std::size_t half = classes.size() / 2;
    ClassSplit s;
    s.train.assign(classes.begin(), classes.begin() + static_cast<std::ptrdiff_t>(half));
    s.test.assign(classes.begin() + static_cast<std::ptrdiff_t>(half), classes.end());
    return s;
}

}  // namespace frpt
