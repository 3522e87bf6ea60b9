#include "fcrag/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace fcrag {

namespace {
constexpr double kProvenanceSlack = 1e-12;
}

double RoutingConfig::threshold_for(int level) const {
    if (thresholds.empty()) throw std::invalid_argument("RoutingConfig: no thresholds");
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(level), thresholds.size() - 1);
    return thresholds[idx];
}

double similarity_unit(const Eigen::Ref<const Eigen::VectorXd>& a,
                       const Eigen::Ref<const Eigen::VectorXd>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("similarity_unit: dimension mismatch");
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("similarity_unit: zero-norm vector");
    return (1.0 + a.dot(b) / (na * nb)) / 2.0;
}

TruthValue activation(const Eigen::Ref<const Eigen::VectorXd>& query_vec, const ConceptNode& node,
                      const RoutingConfig& config) {
    if (node.centroid_per_level.empty())
        throw std::invalid_argument("activation: node has no centroids");
    double mu = 1.0;
    for (const auto& [level, centroid] : node.centroid_per_level) {
        const double s = similarity_unit(query_vec, centroid);
        mu = luk_tnorm(mu, luk_residuum(config.threshold_for(level), s));
    }
    return TruthValue(mu);
}

namespace {

std::vector<double> all_node_activations(const Eigen::Ref<const Eigen::VectorXd>& query_vec,
                                         const ConceptGraph& graph, const RoutingConfig& config) {
    std::vector<double> out;
    out.reserve(graph.nodes().size());
    for (const ConceptNode& node : graph.nodes())
        out.push_back(activation(query_vec, node, config).value());
    return out;
}

FuzzyChannelResult fuzzy_from_activations(const std::vector<double>& activations,
                                          const ConceptGraph& graph, Eigen::Index chunk,
                                          double floor) {
    FuzzyChannelResult result;
    double best = 0.0;
    for (const ConceptNode& node : graph.nodes()) {
        const double mu = activations[static_cast<std::size_t>(node.id)];
        if (mu < floor) continue;
        best = std::max(best, luk_tnorm(mu, node.extent(chunk)));
    }
    if (best <= 0.0) return result;
    result.score = best;
    for (const ConceptNode& node : graph.nodes()) {
        const double mu = activations[static_cast<std::size_t>(node.id)];
        if (mu < floor) continue;
        if (luk_tnorm(mu, node.extent(chunk)) >= best - kProvenanceSlack)
            result.provenance.push_back(node.id);
    }
    return result;
}

}  // namespace

FuzzyChannelResult fuzzy_channel(const Eigen::Ref<const Eigen::VectorXd>& query_vec,
                                 const ConceptGraph& graph, Eigen::Index chunk,
                                 const RoutingConfig& config) {
    const std::vector<double> activations = all_node_activations(query_vec, graph, config);
    return fuzzy_from_activations(activations, graph, chunk, config.activation_floor);
}

QueryScorer::QueryScorer(const RetrievalContext& context, const std::string& query_text,
                         Eigen::VectorXd query_vec)
    : context_(context), query_vec_(std::move(query_vec)) {
    if (!context_.chunks || !context_.vectors || !context_.graph || !context_.bm25)
        throw std::invalid_argument("QueryScorer: incomplete retrieval context");
    const Eigen::Index n = static_cast<Eigen::Index>(context_.chunks->size());
    if (context_.vectors->rows() != n)
        throw std::invalid_argument("QueryScorer: vector matrix does not match chunks");
    if (query_vec_.size() != context_.vectors->cols())
        throw std::invalid_argument("QueryScorer: query vector dimension mismatch");
    if (query_vec_.norm() == 0.0)
        throw std::invalid_argument("QueryScorer: zero-norm query vector");

    const std::vector<std::string> terms = Bm25Index::tokenize(query_text);
    bm25_raw_ = context_.bm25->score_all(terms);

    cosines_.resize(n);
    const double qn = query_vec_.norm();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double vn = context_.vectors->row(i).norm();
        cosines_[i] = vn == 0.0 ? 0.0 : context_.vectors->row(i).dot(query_vec_) / (vn * qn);
    }

    node_activation_ =
        all_node_activations(query_vec_, *context_.graph, context_.settings.routing);

    // Normalization bounds over the unfiltered candidate pool (all chunks
    // in brute-force mode, otherwise the union of the per-channel top
    // pool_size) so scores are independent of any doc filter.
    std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    if (!context_.settings.brute_force &&
        n > static_cast<Eigen::Index>(context_.settings.pool_size)) {
        std::set<Eigen::Index> selected;
        auto take_top = [&](const Eigen::VectorXd& key) {
            std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
                if (key[a] != key[b]) return key[a] > key[b];
                return a < b;
            });
            for (int t = 0; t < context_.settings.pool_size; ++t) selected.insert(order[static_cast<std::size_t>(t)]);
        };
        take_top(bm25_raw_);
        take_top(cosines_);
        pool.assign(selected.begin(), selected.end());
    }
    bm25_min_ = bm25_raw_[pool.front()];
    bm25_max_ = bm25_raw_[pool.front()];
    for (Eigen::Index idx : pool) {
        bm25_min_ = std::min(bm25_min_, bm25_raw_[idx]);
        bm25_max_ = std::max(bm25_max_, bm25_raw_[idx]);
    }
}

RetrievalCandidate QueryScorer::score(Eigen::Index chunk) const {
    const RetrievalSettings& s = context_.settings;
    RetrievalCandidate cand;
    cand.chunk = chunk;
    cand.chunk_id = (*context_.chunks)[static_cast<std::size_t>(chunk)].id;
    cand.bm25_raw = bm25_raw_[chunk];
    cand.bm25_norm =
        bm25_max_ > bm25_min_
            ? std::clamp((cand.bm25_raw - bm25_min_) / (bm25_max_ - bm25_min_), 0.0, 1.0)
            : 0.0;
    cand.cosine = cosines_[chunk];

    if (chunk < context_.real_chunk_count) {
        FuzzyChannelResult fuzzy = fuzzy_from_activations(node_activation_, *context_.graph,
                                                          chunk, s.routing.activation_floor);
        cand.fuzzy = fuzzy.score;
        cand.provenance = std::move(fuzzy.provenance);
    }

    bool bridge = false;
    for (int id : cand.provenance)
        if (context_.graph->node(id).bridge) bridge = true;
    if (bridge)
        cand.boost = s.boost_bridge;
    else if (chunk >= context_.real_chunk_count)
        cand.boost = s.boost_summary;

    cand.final_score = cand.boost * (s.weight_bm25 * cand.bm25_norm +
                                     s.weight_cosine * cand.cosine + s.weight_fuzzy * cand.fuzzy);
    return cand;
}

std::vector<RetrievalCandidate> QueryScorer::search(const std::optional<std::string>& doc_filter,
                                                    int k) const {
    if (k < 1) throw std::invalid_argument("hybrid_search: k must be >= 1");
    const Eigen::Index n = static_cast<Eigen::Index>(context_.chunks->size());

    std::vector<Eigen::Index> survivors;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (doc_filter && (*context_.chunks)[static_cast<std::size_t>(i)].doc_id != *doc_filter)
            continue;
        survivors.push_back(i);
    }
    if (survivors.empty()) throw RetrievalError("no chunks survive the doc filter");

    std::vector<Eigen::Index> scored;
    if (context_.settings.brute_force ||
        static_cast<int>(survivors.size()) <= context_.settings.pool_size) {
        scored = survivors;
    } else {
        std::set<Eigen::Index> selected;
        auto take_top = [&](const Eigen::VectorXd& key) {
            std::vector<Eigen::Index> order = survivors;
            std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
                if (key[a] != key[b]) return key[a] > key[b];
                return a < b;
            });
            const auto limit = std::min<std::size_t>(order.size(),
                                                     static_cast<std::size_t>(context_.settings.pool_size));
            for (std::size_t t = 0; t < limit; ++t) selected.insert(order[t]);
        };
        take_top(bm25_raw_);
        take_top(cosines_);
        scored.assign(selected.begin(), selected.end());
    }

    std::vector<RetrievalCandidate> candidates;
    candidates.reserve(scored.size());
    for (Eigen::Index idx : scored) candidates.push_back(score(idx));

    std::sort(candidates.begin(), candidates.end(),
              [](const RetrievalCandidate& a, const RetrievalCandidate& b) {
                  if (a.final_score != b.final_score) return a.final_score > b.final_score;
                  return a.chunk_id < b.chunk_id;
              });
    if (static_cast<int>(candidates.size()) > k) candidates.resize(static_cast<std::size_t>(k));
    return candidates;
}

std::vector<RetrievalCandidate> hybrid_search(const RetrievalContext& context,
                                              const std::string& query_text,
                                              const Eigen::Ref<const Eigen::VectorXd>& query_vec,
                                              const std::optional<std::string>& doc_filter, int k) {
    return QueryScorer(context, query_text, query_vec).search(doc_filter, k);
}

}  // namespace fcrag
