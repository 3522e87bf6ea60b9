#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <string>
#include <vector>

#include "fcrag/fuzzy_context.hpp"
#include "fcrag/rq_kmeans.hpp"

namespace fcrag {

enum class NodeKind { seed, join, meet, summary };

const char* node_kind_name(NodeKind kind);
NodeKind node_kind_from_name(const std::string& name);

/// A node of the finite fuzzy concept graph. Seeds come from clusters;
/// join/meet nodes are derived from exactly two same-level seed parents.
/// Summary virtual chunks reference nodes but are stored beside the
/// graph, not inside it.
struct ConceptNode {
    int id = -1;
    NodeKind kind = NodeKind::seed;
    int level = -1;    // seeds: codebook level; derived: parents' level
    int cluster = -1;  // seeds only
    std::array<int, 2> parents{-1, -1};
    std::map<int, Eigen::VectorXd> centroid_per_level;
    FuzzySet extent;  // over chunks
    bool bridge = false;
    double meet_mass = 0.0;
};

enum class EdgeKind { lattice, cooccurrence };

struct GraphEdge {
    int a = -1;
    int b = -1;
    EdgeKind kind = EdgeKind::lattice;
    double weight = 1.0;
};

class ConceptGraph {
public:
    const std::vector<ConceptNode>& nodes() const { return nodes_; }
    const std::vector<GraphEdge>& edges() const { return edges_; }

    const ConceptNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }

    /// Nodes get sequential ids; the node's id field must match.
    int add_node(ConceptNode node);
    void add_edge(GraphEdge edge);

private:
    std::vector<ConceptNode> nodes_;
    std::vector<GraphEdge> edges_;
};

/// One seed node per non-empty cluster at each retained level. Level 0 is
/// always retained; upper levels only while their occupancy label is not
/// degenerate. The seed extent is the membership column.
std::vector<ConceptNode> build_seed_nodes(const CodebookHierarchy& hierarchy,
                                          const std::vector<MembershipMatrix>& memberships,
                                          const OccupancyReport& occupancy_report);

/// Join node: extent = pointwise max of parent extents, marked as a
/// bridge. The centroid is the extent-weighted mean of chunk embeddings,
/// stored at level 0 (raw embedding space).
ConceptNode derive_join_node(const ConceptNode& a, const ConceptNode& b,
                             const Eigen::Ref<const Eigen::MatrixXd>& embeddings, int id);

/// Meet node: extent = pointwise min; records the extent mass.
ConceptNode derive_meet_node(const ConceptNode& a, const ConceptNode& b,
                             const Eigen::Ref<const Eigen::MatrixXd>& embeddings, int id);

struct PairSelectionConfig {
    int max_joins = 64;
    int max_meets = 64;
    double min_meet_mass = 1.0;
    double join_band_lo = 0.3;  // cosine band for useful bridges
    double join_band_hi = 0.9;
};

struct SelectedPair {
    int a = -1;  // seed node ids, a < b
    int b = -1;
    NodeKind kind = NodeKind::meet;
    double score = 0.0;  // meet mass or centroid cosine
};

/// Deterministic choice of which same-level seed pairs receive derived
/// nodes: meets by extent mass, joins by in-band centroid similarity.
std::vector<SelectedPair> select_derived_pairs(const std::vector<ConceptNode>& seeds,
                                               const PairSelectionConfig& config);

struct CooccurrenceConfig {
    int window = 5;
    double theta = 3.0;
};

/// Lateral edges between seed concepts whose chunks co-appear in
/// self-retrieval windows (each chunk plus its window-1 nearest cosine
/// neighbors) at least theta times. Edge weight = window count.
void build_cooccurrence_edges(ConceptGraph& graph,
                              const Eigen::Ref<const Eigen::MatrixXd>& embeddings,
                              const CooccurrenceConfig& config);

struct ConceptGraphConfig {
    PairSelectionConfig pairs;
    CooccurrenceConfig cooccurrence;
};

/// Full graph assembly: seeds, derived nodes with lattice edges to their
/// parents, then co-occurrence edges. Rebuilding from identical inputs
/// yields an identical graph.
ConceptGraph build_concept_graph(const CodebookHierarchy& hierarchy,
                                 const std::vector<MembershipMatrix>& memberships,
                                 const OccupancyReport& occupancy_report,
                                 const Eigen::Ref<const Eigen::MatrixXd>& embeddings,
                                 const ConceptGraphConfig& config);

}  // namespace fcrag
