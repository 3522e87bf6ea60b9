#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

namespace fcrag {

enum class EmbeddingKind { passage, query };

/// A single embedding request. `id` is an optional stable lookup key
/// (the chunk id for passages); file-mode providers fall back to the
/// prefixed text when it is empty.
struct EmbeddingRequest {
    EmbeddingKind kind = EmbeddingKind::passage;
    std::string text;
    std::string id;
};

/// "passage: <text>" or "query: <text>" — every outgoing embedding call
/// carries exactly one of the two prefixes.
std::string prefixed_text(const EmbeddingRequest& request);

class ProviderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    /// Returns the embedding or throws ProviderError. Identical requests
    /// must return identical vectors.
    virtual Eigen::VectorXd embed(const EmbeddingRequest& request) = 0;

    virtual int dimension() const = 0;

    /// Number of embed calls served by this provider so far.
    long calls() const { return calls_.load(); }

protected:
    void count_call() { calls_.fetch_add(1); }

private:
    std::atomic<long> calls_{0};
};

/// Parses a vector file: one record per line, `<id>\t<v0> <v1> ...`.
/// Throws on parse errors (with line number), duplicate ids, and
/// inconsistent dimensions.
std::map<std::string, Eigen::VectorXd> load_vector_file(const std::filesystem::path& path);

void save_vector_file(const std::filesystem::path& path,
                      const std::map<std::string, Eigen::VectorXd>& vectors);

/// Looks embeddings up in a preloaded map; unknown keys are an error,
/// never a zero vector.
class FileEmbeddingProvider : public EmbeddingProvider {
public:
    explicit FileEmbeddingProvider(std::map<std::string, Eigen::VectorXd> vectors);

    Eigen::VectorXd embed(const EmbeddingRequest& request) override;
    int dimension() const override { return dimension_; }

    static std::string lookup_key(const EmbeddingRequest& request);

private:
    std::map<std::string, Eigen::VectorXd> vectors_;
    int dimension_ = 0;
};

/// Remote embedding service: POST {"kind", "text"} to the endpoint,
/// response carries {"vector": [...]}.
class RemoteEmbeddingProvider : public EmbeddingProvider {
public:
    RemoteEmbeddingProvider(std::string endpoint, int expected_dimension,
                            int timeout_ms = 30000);

    Eigen::VectorXd embed(const EmbeddingRequest& request) override;
    int dimension() const override { return dimension_; }

private:
    std::string endpoint_;
    int dimension_;
    int timeout_ms_;
};

/// Memoizes an inner provider keyed by the file-mode lookup key, with
/// atomic get-or-insert semantics. A repeated request performs zero
/// inner calls.
class CachingEmbeddingProvider : public EmbeddingProvider {
public:
    explicit CachingEmbeddingProvider(EmbeddingProvider& inner) : inner_(inner) {}

    Eigen::VectorXd embed(const EmbeddingRequest& request) override;
    int dimension() const override { return inner_.dimension(); }

    long inner_calls() const { return inner_.calls(); }

private:
    EmbeddingProvider& inner_;
    std::mutex mutex_;
    std::map<std::string, Eigen::VectorXd> cache_;
};

}  // namespace fcrag
