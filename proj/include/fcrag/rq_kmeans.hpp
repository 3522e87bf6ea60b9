#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace fcrag {

/// One level of the residual-quantization hierarchy. The centroid count
/// may be smaller than requested_size when the level had fewer distinct
/// residual points than codewords (degenerate-level signal).
struct Codebook {
    int level = 0;
    int requested_size = 0;
    Eigen::MatrixXd centroids;  // rows = codewords, cols = embedding dim

    bool shrunk() const { return centroids.rows() < requested_size; }
};

struct CodebookHierarchy {
    std::vector<Codebook> codebooks;
    Eigen::MatrixXi assignments;      // rows = chunks, cols = levels
    Eigen::MatrixXd final_residuals;  // rows = chunks

    Eigen::Index levels() const { return static_cast<Eigen::Index>(codebooks.size()); }
    Eigen::Index dimension() const {
        return codebooks.empty() ? 0 : codebooks.front().centroids.cols();
    }

    /// Sum of the assigned centroids across levels for one training chunk.
    Eigen::VectorXd reconstruct(Eigen::Index chunk) const;
};

/// Fuzzy c-means memberships of chunks against one level's centroids.
/// Rows sum to 1; a zero-distance point gets a crisp one-hot row.
struct MembershipMatrix {
    Eigen::MatrixXd values;  // rows = chunks, cols = clusters
    int level = 0;
    double fuzziness_m = 2.0;
};

struct LevelOccupancy {
    int level = 0;
    Eigen::Index cluster_count = 0;
    double occupancy = 0.0;  // normalized assignment entropy in [0,1]
    std::string interpretation;
};

struct OccupancyReport {
    std::vector<LevelOccupancy> per_level;
};

/// Fits the residual-quantization k-means hierarchy: per level, k-means
/// (k-means++ seeding, Lloyd iterations) on the current residuals, then
/// nearest-codeword assignment and residual subtraction. Deterministic
/// for a fixed seed.
CodebookHierarchy fit_rq_kmeans(const Eigen::Ref<const Eigen::MatrixXd>& embeddings,
                                const std::vector<int>& level_sizes, std::uint64_t seed,
                                int max_iters = 100, double tol = 1e-6);

/// Greedy per-level nearest-codeword assignment for an unseen vector.
/// Ties break toward the lowest codeword index.
std::vector<int> assign(const CodebookHierarchy& hierarchy,
                        const Eigen::Ref<const Eigen::VectorXd>& x);

/// Residual inputs r^(level) seen by the given level during fitting
/// (level 0 returns the embeddings themselves).
Eigen::MatrixXd residual_inputs(const CodebookHierarchy& hierarchy,
                                const Eigen::Ref<const Eigen::MatrixXd>& embeddings, int level);

MembershipMatrix fcm_memberships(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                 const Eigen::Ref<const Eigen::MatrixXd>& centroids,
                                 double fuzziness_m, int level = 0);

/// Per-level normalized Shannon entropy of assignment counts, labeled
/// well-distributed (>= 0.8), moderate, or degenerate (< 0.2).
OccupancyReport occupancy(const CodebookHierarchy& hierarchy);

const char* occupancy_label(double value);

}  // namespace fcrag
