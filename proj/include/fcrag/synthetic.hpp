#pragma once

#include <cstdint>
#include <mutex>

#include "fcrag/embedding.hpp"

namespace fcrag {

/// Deterministic bag-of-words embedder for offline tooling and tests:
/// the embedding is the L2-normalized sum of per-token pseudo-gaussian
/// vectors seeded by a token hash, so texts sharing vocabulary land
/// near each other. No model, no network.
class HashedBagEmbedder : public EmbeddingProvider {
public:
    HashedBagEmbedder(int dimension, std::uint64_t seed);

    Eigen::VectorXd embed(const EmbeddingRequest& request) override;
    int dimension() const override { return dimension_; }

private:
    int dimension_;
    std::uint64_t seed_;
};

/// Wraps a provider and records every (lookup key, vector) pair it
/// serves, so a later run can replay the exact same embeddings from a
/// vector file.
class RecordingEmbeddingProvider : public EmbeddingProvider {
public:
    explicit RecordingEmbeddingProvider(EmbeddingProvider& inner) : inner_(inner) {}

    Eigen::VectorXd embed(const EmbeddingRequest& request) override;
    int dimension() const override { return inner_.dimension(); }

    const std::map<std::string, Eigen::VectorXd>& recorded() const { return recorded_; }

private:
    EmbeddingProvider& inner_;
    std::mutex mutex_;
    std::map<std::string, Eigen::VectorXd> recorded_;
};

}  // namespace fcrag
