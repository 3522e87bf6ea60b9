#include "fcrag/concept_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace fcrag {

const char* node_kind_name(NodeKind kind) {
    switch (kind) {
        case NodeKind::seed: return "seed";
        case NodeKind::join: return "join";
        case NodeKind::meet: return "meet";
        case NodeKind::summary: return "summary";
    }
    return "unknown";
}

NodeKind node_kind_from_name(const std::string& name) {
    if (name == "seed") return NodeKind::seed;
    if (name == "join") return NodeKind::join;
    if (name == "meet") return NodeKind::meet;
    if (name == "summary") return NodeKind::summary;
    throw std::invalid_argument("unknown node kind: " + name);
}

int ConceptGraph::add_node(ConceptNode node) {
    if (node.id != static_cast<int>(nodes_.size()))
        throw std::invalid_argument("ConceptGraph: node id must be sequential");
    nodes_.push_back(std::move(node));
    return nodes_.back().id;
}

void ConceptGraph::add_edge(GraphEdge edge) {
    if (edge.a < 0 || edge.b < 0 || edge.a >= static_cast<int>(nodes_.size()) ||
        edge.b >= static_cast<int>(nodes_.size()))
        throw std::invalid_argument("ConceptGraph: edge endpoint does not exist");
    if (edge.a == edge.b) throw std::invalid_argument("ConceptGraph: self-loop");
    edges_.push_back(edge);
}

std::vector<ConceptNode> build_seed_nodes(const CodebookHierarchy& hierarchy,
                                          const std::vector<MembershipMatrix>& memberships,
                                          const OccupancyReport& occupancy_report) {
    const Eigen::Index n = hierarchy.assignments.rows();
    if (n == 0) throw std::invalid_argument("build_seed_nodes: empty hierarchy");

    std::map<int, const MembershipMatrix*> by_level;
    for (const MembershipMatrix& mm : memberships) by_level[mm.level] = &mm;

    std::vector<ConceptNode> seeds;
    int next_id = 0;
    for (const LevelOccupancy& lo : occupancy_report.per_level) {
        const bool retained = lo.level == 0 || lo.interpretation != "degenerate";
        if (!retained) continue;
        const auto it = by_level.find(lo.level);
        if (it == by_level.end())
            throw std::invalid_argument("build_seed_nodes: missing memberships for retained level");
        const MembershipMatrix& mm = *it->second;
        const Codebook& cb = hierarchy.codebooks[static_cast<std::size_t>(lo.level)];

        Eigen::VectorXi counts = Eigen::VectorXi::Zero(cb.centroids.rows());
        for (Eigen::Index i = 0; i < n; ++i) counts[hierarchy.assignments(i, lo.level)] += 1;

        int created = 0;
        for (Eigen::Index c = 0; c < cb.centroids.rows(); ++c) {
            if (counts[c] == 0) continue;
            ConceptNode node;
            node.id = next_id++;
            node.kind = NodeKind::seed;
            node.level = lo.level;
            node.cluster = static_cast<int>(c);
            node.centroid_per_level[lo.level] = cb.centroids.row(c).transpose();
            node.extent = FuzzySet(mm.values.col(c));
            seeds.push_back(std::move(node));
            ++created;
        }
        if (created == 0)
            throw std::invalid_argument("build_seed_nodes: retained level has no non-empty clusters");
    }
    return seeds;
}

namespace {

Eigen::VectorXd extent_weighted_centroid(const FuzzySet& extent,
                                         const Eigen::Ref<const Eigen::MatrixXd>& embeddings) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(embeddings.cols());
    double mass = 0.0;
    for (Eigen::Index g = 0; g < extent.size(); ++g) {
        const double w = extent(g);
        if (w == 0.0) continue;
        sum += w * embeddings.row(g).transpose();
        mass += w;
    }
    if (mass > 0.0) sum /= mass;
    return sum;
}

ConceptNode derive_common(const ConceptNode& a, const ConceptNode& b,
                          const Eigen::Ref<const Eigen::MatrixXd>& embeddings, int id,
                          NodeKind kind) {
    if (a.id == b.id) throw std::invalid_argument("derived node: identical parents");
    if (a.kind != NodeKind::seed || b.kind != NodeKind::seed)
        throw std::invalid_argument("derived node: parents must be seeds");
    if (a.level != b.level)
        throw std::invalid_argument("derived node: parents must share a level");
    if (embeddings.rows() != a.extent.size())
        throw std::invalid_argument("derived node: embeddings do not match extent universe");

    ConceptNode node;
    node.id = id;
    node.kind = kind;
    node.level = a.level;
    node.parents = {std::min(a.id, b.id), std::max(a.id, b.id)};
    node.extent = kind == NodeKind::join ? pointwise_max(a.extent, b.extent)
                                         : pointwise_min(a.extent, b.extent);
    node.centroid_per_level[0] = extent_weighted_centroid(node.extent, embeddings);
    return node;
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.dot(b) / (na * nb);
}

}  // namespace

ConceptNode derive_join_node(const ConceptNode& a, const ConceptNode& b,
                             const Eigen::Ref<const Eigen::MatrixXd>& embeddings, int id) {
    ConceptNode node = derive_common(a, b, embeddings, id, NodeKind::join);
    node.bridge = true;
    return node;
}

ConceptNode derive_meet_node(const ConceptNode& a, const ConceptNode& b,
                             const Eigen::Ref<const Eigen::MatrixXd>& embeddings, int id) {
    ConceptNode node = derive_common(a, b, embeddings, id, NodeKind::meet);
    node.meet_mass = node.extent.values().sum();
    return node;
}

std::vector<SelectedPair> select_derived_pairs(const std::vector<ConceptNode>& seeds,
                                               const PairSelectionConfig& config) {
    if (seeds.size() < 2) return {};

    std::vector<SelectedPair> meets, joins;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        for (std::size_t j = i + 1; j < seeds.size(); ++j) {
            const ConceptNode& a = seeds[i];
            const ConceptNode& b = seeds[j];
            if (a.level != b.level) continue;

            const double mass = a.extent.values().cwiseMin(b.extent.values()).sum();
            if (mass >= config.min_meet_mass)
                meets.push_back({a.id, b.id, NodeKind::meet, mass});

            const double sim = cosine(a.centroid_per_level.at(a.level),
                                      b.centroid_per_level.at(b.level));
            if (sim >= config.join_band_lo && sim <= config.join_band_hi)
                joins.push_back({a.id, b.id, NodeKind::join, sim});
        }
    }

    auto by_score = [](const SelectedPair& x, const SelectedPair& y) {
        if (x.score != y.score) return x.score > y.score;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    };
    std::sort(meets.begin(), meets.end(), by_score);
    std::sort(joins.begin(), joins.end(), by_score);
    if (static_cast<int>(meets.size()) > config.max_meets) meets.resize(config.max_meets);
    if (static_cast<int>(joins.size()) > config.max_joins) joins.resize(config.max_joins);

    std::vector<SelectedPair> out = std::move(meets);
    out.insert(out.end(), joins.begin(), joins.end());
    return out;
}

void build_cooccurrence_edges(ConceptGraph& graph,
                              const Eigen::Ref<const Eigen::MatrixXd>& embeddings,
                              const CooccurrenceConfig& config) {
    if (config.window < 2)
        throw std::invalid_argument("build_cooccurrence_edges: window must be >= 2");

    const Eigen::Index n = embeddings.rows();
    std::vector<int> seed_ids;
    for (const ConceptNode& node : graph.nodes())
        if (node.kind == NodeKind::seed) seed_ids.push_back(node.id);
    if (seed_ids.size() < 2 || n == 0) return;

    // Dominant seed concept per chunk (argmax extent, lowest id wins ties).
    std::vector<int> dominant(static_cast<std::size_t>(n), seed_ids.front());
    for (Eigen::Index g = 0; g < n; ++g) {
        double best = -1.0;
        for (int id : seed_ids) {
            const double v = graph.node(id).extent(g);
            if (v > best) {
                best = v;
                dominant[static_cast<std::size_t>(g)] = id;
            }
        }
    }

    std::map<std::pair<int, int>, double> pair_counts;
    std::vector<std::pair<double, Eigen::Index>> sims;
    for (Eigen::Index i = 0; i < n; ++i) {
        sims.clear();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            sims.emplace_back(cosine(embeddings.row(i).transpose(), embeddings.row(j).transpose()), j);
        }
        std::sort(sims.begin(), sims.end(), [](const auto& x, const auto& y) {
            if (x.first != y.first) return x.first > y.first;
            return x.second < y.second;
        });

        std::set<int> concepts{dominant[static_cast<std::size_t>(i)]};
        const auto neighbors = std::min<std::size_t>(sims.size(), static_cast<std::size_t>(config.window - 1));
        for (std::size_t t = 0; t < neighbors; ++t)
            concepts.insert(dominant[static_cast<std::size_t>(sims[t].second)]);

        for (auto it = concepts.begin(); it != concepts.end(); ++it)
            for (auto jt = std::next(it); jt != concepts.end(); ++jt)
                pair_counts[{*it, *jt}] += 1.0;
    }

    for (const auto& [pair, count] : pair_counts)
        if (count >= config.theta)
            graph.add_edge({pair.first, pair.second, EdgeKind::cooccurrence, count});
}

ConceptGraph build_concept_graph(const CodebookHierarchy& hierarchy,
                                 const std::vector<MembershipMatrix>& memberships,
                                 const OccupancyReport& occupancy_report,
                                 const Eigen::Ref<const Eigen::MatrixXd>& embeddings,
                                 const ConceptGraphConfig& config) {
    ConceptGraph graph;
    std::vector<ConceptNode> seeds = build_seed_nodes(hierarchy, memberships, occupancy_report);
    for (ConceptNode& seed : seeds) graph.add_node(std::move(seed));

    const std::vector<SelectedPair> selected = select_derived_pairs(graph.nodes(), config.pairs);
    for (const SelectedPair& sp : selected) {
        const int id = static_cast<int>(graph.nodes().size());
        ConceptNode derived = sp.kind == NodeKind::join
                                  ? derive_join_node(graph.node(sp.a), graph.node(sp.b), embeddings, id)
                                  : derive_meet_node(graph.node(sp.a), graph.node(sp.b), embeddings, id);
        graph.add_node(std::move(derived));
        graph.add_edge({id, sp.a, EdgeKind::lattice, 1.0});
        graph.add_edge({id, sp.b, EdgeKind::lattice, 1.0});
    }

    build_cooccurrence_edges(graph, embeddings, config.cooccurrence);
    return graph;
}

}  // namespace fcrag
