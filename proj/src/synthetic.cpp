#include "fcrag/synthetic.hpp"

#include "fcrag/bm25.hpp"

namespace fcrag {

namespace {

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Irwin-Hall pseudo-gaussian: sum of 12 uniforms minus 6. Pure integer
// and multiply arithmetic, so bit-stable across platforms.
double pseudo_gaussian(std::uint64_t& state) {
    double sum = 0.0;
    for (int i = 0; i < 12; ++i)
        sum += static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    return sum - 6.0;
}

}  // namespace

HashedBagEmbedder::HashedBagEmbedder(int dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
    if (dimension < 1) throw std::invalid_argument("HashedBagEmbedder: dimension must be >= 1");
}

Eigen::VectorXd HashedBagEmbedder::embed(const EmbeddingRequest& request) {
    count_call();
    const std::string text = prefixed_text(request);
    const std::vector<std::string> tokens = Bm25Index::tokenize(text);
    if (tokens.empty()) throw ProviderError("HashedBagEmbedder: no tokens in request text");

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dimension_);
    for (const std::string& token : tokens) {
        std::uint64_t state = fnv1a64(token) ^ seed_;
        for (int d = 0; d < dimension_; ++d) sum[d] += pseudo_gaussian(state);
    }
    const double norm = sum.norm();
    if (norm == 0.0) throw ProviderError("HashedBagEmbedder: degenerate zero vector");
    return sum / norm;
}

Eigen::VectorXd RecordingEmbeddingProvider::embed(const EmbeddingRequest& request) {
    count_call();
    Eigen::VectorXd vec = inner_.embed(request);
    const std::string key = FileEmbeddingProvider::lookup_key(request);
    std::lock_guard lock(mutex_);
    recorded_.emplace(key, vec);
    return vec;
}

}  // namespace fcrag
