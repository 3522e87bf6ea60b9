#include "fcrag/rq_kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace fcrag {

namespace {

// Platform-independent uniform in [0,1): distributions in <random> are
// implementation-defined, the raw engine stream is not.
double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Eigen::Index nearest_row(const Eigen::MatrixXd& centroids,
                         const Eigen::Ref<const Eigen::VectorXd>& x) {
    Eigen::Index best = 0;
    double best_d = (centroids.row(0).transpose() - x).squaredNorm();
    for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
        const double d = (centroids.row(c).transpose() - x).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

Eigen::Index count_distinct_rows(const Eigen::MatrixXd& points) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(points.rows()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index j = 0; j < points.cols(); ++j) {
            if (points(a, j) != points(b, j)) return points(a, j) < points(b, j);
        }
        return false;
    });
    Eigen::Index distinct = points.rows() > 0 ? 1 : 0;
    for (std::size_t i = 1; i < order.size(); ++i)
        if (points.row(order[i]) != points.row(order[i - 1])) ++distinct;
    return distinct;
}

Eigen::MatrixXd kmeanspp_seed(const Eigen::MatrixXd& points, Eigen::Index k,
                              std::mt19937_64& rng) {
    const Eigen::Index n = points.rows();
    Eigen::MatrixXd centroids(k, points.cols());
    centroids.row(0) = points.row(static_cast<Eigen::Index>(next_unit(rng) * n));

    Eigen::VectorXd dist2(n);
    for (Eigen::Index i = 0; i < n; ++i)
        dist2[i] = (points.row(i) - centroids.row(0)).squaredNorm();

    for (Eigen::Index c = 1; c < k; ++c) {
        const double total = dist2.sum();
        Eigen::Index pick = 0;
        if (total > 0.0) {
            const double r = next_unit(rng) * total;
            double acc = 0.0;
            pick = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += dist2[i];
                if (acc > r) {
                    pick = i;
                    break;
                }
            }
        }
        centroids.row(c) = points.row(pick);
        for (Eigen::Index i = 0; i < n; ++i)
            dist2[i] = std::min(dist2[i], (points.row(i) - centroids.row(c)).squaredNorm());
    }
    return centroids;
}

// Lloyd iterations with deterministic tie-breaks and fixed summation
// order. Empty clusters are re-seeded to the point farthest from its
// assigned centroid.
Eigen::MatrixXd lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd centroids, int max_iters,
                      double tol) {
    const Eigen::Index n = points.rows();
    const Eigen::Index k = centroids.rows();
    std::vector<Eigen::Index> assignment(static_cast<std::size_t>(n), 0);

    for (int iter = 0; iter < max_iters; ++iter) {
        for (Eigen::Index i = 0; i < n; ++i)
            assignment[static_cast<std::size_t>(i)] = nearest_row(centroids, points.row(i).transpose());

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
        Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(assignment[static_cast<std::size_t>(i)]) += points.row(i);
            counts[assignment[static_cast<std::size_t>(i)]] += 1;
        }

        Eigen::MatrixXd updated(k, points.cols());
        for (Eigen::Index c = 0; c < k; ++c) {
            if (counts[c] > 0)
                updated.row(c) = sums.row(c) / static_cast<double>(counts[c]);
            else
                updated.row(c) = centroids.row(c);
        }

        bool reseeded = false;
        std::vector<bool> taken(static_cast<std::size_t>(n), false);
        for (Eigen::Index c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            Eigen::Index far = -1;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (taken[static_cast<std::size_t>(i)]) continue;
                const double d =
                    (points.row(i) - updated.row(assignment[static_cast<std::size_t>(i)])).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (far >= 0) {
                updated.row(c) = points.row(far);
                taken[static_cast<std::size_t>(far)] = true;
                reseeded = true;
            }
        }

        double shift = 0.0;
        for (Eigen::Index c = 0; c < k; ++c) shift += (updated.row(c) - centroids.row(c)).norm();
        shift /= static_cast<double>(k);

        centroids = std::move(updated);
        if (!reseeded && shift < tol) break;
    }
    return centroids;
}

}  // namespace

Eigen::VectorXd CodebookHierarchy::reconstruct(Eigen::Index chunk) const {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dimension());
    for (Eigen::Index l = 0; l < levels(); ++l)
        sum += codebooks[static_cast<std::size_t>(l)].centroids.row(assignments(chunk, l)).transpose();
    return sum;
}

CodebookHierarchy fit_rq_kmeans(const Eigen::Ref<const Eigen::MatrixXd>& embeddings,
                                const std::vector<int>& level_sizes, std::uint64_t seed,
                                int max_iters, double tol) {
    if (embeddings.rows() == 0 || embeddings.cols() == 0)
        throw std::invalid_argument("fit_rq_kmeans: empty embedding matrix");
    if (!embeddings.allFinite())
        throw std::invalid_argument("fit_rq_kmeans: non-finite embeddings");
    if (level_sizes.empty())
        throw std::invalid_argument("fit_rq_kmeans: no level sizes");
    for (int s : level_sizes)
        if (s < 1) throw std::invalid_argument("fit_rq_kmeans: level size must be >= 1");

    const Eigen::Index n = embeddings.rows();
    const auto L = static_cast<Eigen::Index>(level_sizes.size());
    std::mt19937_64 rng(seed);

    CodebookHierarchy h;
    h.assignments.resize(n, L);
    Eigen::MatrixXd residuals = embeddings;

    for (Eigen::Index l = 0; l < L; ++l) {
        const int requested = level_sizes[static_cast<std::size_t>(l)];
        const Eigen::Index distinct = count_distinct_rows(residuals);
        const Eigen::Index k = std::min<Eigen::Index>(requested, distinct);

        Eigen::MatrixXd centroids = kmeanspp_seed(residuals, k, rng);
        centroids = lloyd(residuals, std::move(centroids), max_iters, tol);

        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index a = nearest_row(centroids, residuals.row(i).transpose());
            h.assignments(i, l) = static_cast<int>(a);
            residuals.row(i) -= centroids.row(a);
        }
        h.codebooks.push_back({static_cast<int>(l), requested, std::move(centroids)});
    }
    h.final_residuals = std::move(residuals);
    return h;
}

std::vector<int> assign(const CodebookHierarchy& hierarchy,
                        const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() != hierarchy.dimension())
        throw std::invalid_argument("assign: vector dimension does not match hierarchy");
    std::vector<int> out;
    out.reserve(hierarchy.codebooks.size());
    Eigen::VectorXd residual = x;
    for (const Codebook& cb : hierarchy.codebooks) {
        const Eigen::Index a = nearest_row(cb.centroids, residual);
        out.push_back(static_cast<int>(a));
        residual -= cb.centroids.row(a).transpose();
    }
    return out;
}

Eigen::MatrixXd residual_inputs(const CodebookHierarchy& hierarchy,
                                const Eigen::Ref<const Eigen::MatrixXd>& embeddings, int level) {
    if (level < 0 || level >= hierarchy.levels())
        throw std::invalid_argument("residual_inputs: level out of range");
    Eigen::MatrixXd residuals = embeddings;
    for (int l = 0; l < level; ++l) {
        const Eigen::MatrixXd& centroids = hierarchy.codebooks[static_cast<std::size_t>(l)].centroids;
        for (Eigen::Index i = 0; i < residuals.rows(); ++i)
            residuals.row(i) -= centroids.row(hierarchy.assignments(i, l));
    }
    return residuals;
}

MembershipMatrix fcm_memberships(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                 const Eigen::Ref<const Eigen::MatrixXd>& centroids,
                                 double fuzziness_m, int level) {
    if (centroids.rows() == 0) throw std::invalid_argument("fcm_memberships: no centroids");
    if (!(fuzziness_m > 1.0))
        throw std::invalid_argument("fcm_memberships: fuzziness exponent must exceed 1");
    if (points.cols() != centroids.cols())
        throw std::invalid_argument("fcm_memberships: dimension mismatch");

    const Eigen::Index n = points.rows();
    const Eigen::Index k = centroids.rows();
    const double exponent = 2.0 / (fuzziness_m - 1.0);

    MembershipMatrix mm;
    mm.level = level;
    mm.fuzziness_m = fuzziness_m;
    mm.values.resize(n, k);

    Eigen::VectorXd dist(k);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index zero_at = -1;
        for (Eigen::Index c = 0; c < k; ++c) {
            dist[c] = (points.row(i) - centroids.row(c)).norm();
            if (!std::isfinite(dist[c]))
                throw std::invalid_argument("fcm_memberships: non-finite distance");
            if (dist[c] == 0.0 && zero_at < 0) zero_at = c;
        }
        if (zero_at >= 0) {
            mm.values.row(i).setZero();
            mm.values(i, zero_at) = 1.0;
            continue;
        }
        for (Eigen::Index c = 0; c < k; ++c) {
            double denom = 0.0;
            for (Eigen::Index j = 0; j < k; ++j)
                denom += std::pow(dist[c] / dist[j], exponent);
            mm.values(i, c) = 1.0 / denom;
        }
    }
    return mm;
}

const char* occupancy_label(double value) {
    if (value >= 0.8) return "well-distributed";
    if (value < 0.2) return "degenerate";
    return "moderate";
}

OccupancyReport occupancy(const CodebookHierarchy& hierarchy) {
    OccupancyReport report;
    const Eigen::Index n = hierarchy.assignments.rows();
    for (Eigen::Index l = 0; l < hierarchy.levels(); ++l) {
        const Eigen::Index k = hierarchy.codebooks[static_cast<std::size_t>(l)].centroids.rows();
        double value = 0.0;
        if (k > 1 && n > 0) {
            Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
            for (Eigen::Index i = 0; i < n; ++i) counts[hierarchy.assignments(i, l)] += 1.0;
            double entropy = 0.0;
            for (Eigen::Index c = 0; c < k; ++c) {
                if (counts[c] == 0.0) continue;
                const double p = counts[c] / static_cast<double>(n);
                entropy -= p * std::log(p);
            }
            value = entropy / std::log(static_cast<double>(k));
        }
        report.per_level.push_back(
            {static_cast<int>(l), k, value, occupancy_label(value)});
    }
    return report;
}

}  // namespace fcrag
