#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "fcrag/bm25.hpp"
#include "fcrag/chunking.hpp"
#include "fcrag/concept_graph.hpp"
#include "fcrag/truth.hpp"

namespace fcrag {

struct RoutingConfig {
    std::vector<double> thresholds{0.75, 0.75, 0.75};  // activation threshold per level
    double activation_floor = 0.05;

    double threshold_for(int level) const;
};

struct RetrievalSettings {
    double weight_bm25 = 0.3;
    double weight_cosine = 0.5;
    double weight_fuzzy = 0.2;
    double boost_summary = 1.2;  // cluster-summary virtual chunks
    double boost_bridge = 1.3;   // bridge-node provenance (takes precedence)
    int pool_size = 200;         // per-channel candidate pool
    bool brute_force = false;    // score every surviving chunk
    RoutingConfig routing;
};

struct RetrievalCandidate {
    Eigen::Index chunk = -1;
    std::string chunk_id;
    double bm25_raw = 0.0;
    double bm25_norm = 0.0;  // min-max over the query's candidate pool
    double cosine = 0.0;
    double fuzzy = 0.0;
    double boost = 1.0;
    double final_score = 0.0;
    std::vector<int> provenance;  // lattice node ids behind the fuzzy score
};

class RetrievalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-owning view over the pieces hybrid search needs. Chunk indices
/// >= real_chunk_count are summary virtual chunks; graph extents cover
/// only the real chunks.
struct RetrievalContext {
    const std::vector<Chunk>* chunks = nullptr;
    const Eigen::MatrixXd* vectors = nullptr;  // rows align with chunks
    Eigen::Index real_chunk_count = 0;
    const ConceptGraph* graph = nullptr;
    const Bm25Index* bm25 = nullptr;
    RetrievalSettings settings;
};

/// Cosine similarity mapped into [0,1]: (1 + cos)/2.
double similarity_unit(const Eigen::Ref<const Eigen::VectorXd>& a,
                       const Eigen::Ref<const Eigen::VectorXd>& b);

/// Query-to-concept activation: Lukasiewicz t-norm over the node's
/// levels of residuum(threshold_level, similarity_level).
TruthValue activation(const Eigen::Ref<const Eigen::VectorXd>& query_vec, const ConceptNode& node,
                      const RoutingConfig& config);

struct FuzzyChannelResult {
    double score = 0.0;
    std::vector<int> provenance;  // nodes attaining within 1e-12 of the max
};

/// Max over activated nodes of tnorm(activation, extent(chunk)); zero
/// score carries empty provenance.
FuzzyChannelResult fuzzy_channel(const Eigen::Ref<const Eigen::VectorXd>& query_vec,
                                 const ConceptGraph& graph, Eigen::Index chunk,
                                 const RoutingConfig& config);

/// Per-query scoring state: BM25 raw scores and normalization bounds,
/// dense cosines, and node activations are computed once. Normalization
/// bounds come from the unfiltered candidate pool so that per-chunk
/// scores do not depend on the doc filter.
class QueryScorer {
public:
    QueryScorer(const RetrievalContext& context, const std::string& query_text,
                Eigen::VectorXd query_vec);

    /// Full candidate record for one chunk (any chunk, filtered or not).
    RetrievalCandidate score(Eigen::Index chunk) const;

    /// Pool, score, sort (final desc, chunk id asc), truncate to k.
    std::vector<RetrievalCandidate> search(const std::optional<std::string>& doc_filter,
                                           int k) const;

private:
    const RetrievalContext& context_;
    Eigen::VectorXd query_vec_;
    Eigen::VectorXd bm25_raw_;
    Eigen::VectorXd cosines_;
    std::vector<double> node_activation_;
    double bm25_min_ = 0.0;
    double bm25_max_ = 0.0;
};

std::vector<RetrievalCandidate> hybrid_search(const RetrievalContext& context,
                                              const std::string& query_text,
                                              const Eigen::Ref<const Eigen::VectorXd>& query_vec,
                                              const std::optional<std::string>& doc_filter, int k);

}  // namespace fcrag
