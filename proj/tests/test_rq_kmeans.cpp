#include <doctest.h>

#include <random>

#include "fcrag/rq_kmeans.hpp"

using namespace fcrag;

namespace {

Eigen::MatrixXd toy_points() {
    Eigen::MatrixXd x(4, 1);
    x << 0.0, 1.0, 10.0, 11.0;
    return x;
}

std::vector<double> sorted_centroid_values(const Codebook& cb) {
    std::vector<double> v;
    for (Eigen::Index i = 0; i < cb.centroids.rows(); ++i) v.push_back(cb.centroids(i, 0));
    std::sort(v.begin(), v.end());
    return v;
}

// Gaussian mixture without <random> distributions so draws are
// reproducible across standard libraries.
Eigen::MatrixXd gaussian_mixture(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d,
                                 int components) {
    auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    auto gauss = [&] {
        double s = 0.0;
        for (int i = 0; i < 12; ++i) s += unit();
        return s - 6.0;
    };
    Eigen::MatrixXd centers(components, d);
    for (Eigen::Index c = 0; c < components; ++c)
        for (Eigen::Index j = 0; j < d; ++j) centers(c, j) = 10.0 * gauss();
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto c = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(components));
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = centers(c, j) + gauss();
    }
    return x;
}

}  // namespace

TEST_CASE("toy 1-D corpus reproduces the hand-derived codebooks") {
    const CodebookHierarchy h = fit_rq_kmeans(toy_points(), {2, 2}, 7);

    REQUIRE(h.levels() == 2);
    CHECK(sorted_centroid_values(h.codebooks[0]) == std::vector<double>{0.5, 10.5});
    CHECK(sorted_centroid_values(h.codebooks[1]) == std::vector<double>{-0.5, 0.5});
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(h.final_residuals(i, 0) == 0.0);

    // level-0 residuals are +-0.5 around the assigned centroid
    const Eigen::MatrixXd r1 = residual_inputs(h, toy_points(), 1);
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(std::abs(r1(i, 0)) == 0.5);
}

TEST_CASE("single point with one codeword") {
    Eigen::MatrixXd x(1, 3);
    x << 1.0, 2.0, 3.0;
    const CodebookHierarchy h = fit_rq_kmeans(x, {1}, 0);
    CHECK(h.codebooks[0].centroids.row(0) == x.row(0));
    CHECK(h.final_residuals.row(0).norm() == 0.0);
}

TEST_CASE("fit_rq_kmeans input validation") {
    CHECK_THROWS_AS(fit_rq_kmeans(Eigen::MatrixXd(0, 0), {2}, 1), std::invalid_argument);
    CHECK_THROWS_AS(fit_rq_kmeans(toy_points(), {}, 1), std::invalid_argument);
    CHECK_THROWS_AS(fit_rq_kmeans(toy_points(), {0}, 1), std::invalid_argument);
    Eigen::MatrixXd nan_points = toy_points();
    nan_points(0, 0) = std::nan("");
    CHECK_THROWS_AS(fit_rq_kmeans(nan_points, {2}, 1), std::invalid_argument);
}

TEST_CASE("degenerate levels shrink to the distinct point count") {
    Eigen::MatrixXd x(6, 2);
    x << 1, 1, 1, 1, 1, 1, 5, 5, 5, 5, 5, 5;  // two distinct points
    const CodebookHierarchy h = fit_rq_kmeans(x, {4, 3}, 3);
    CHECK(h.codebooks[0].centroids.rows() == 2);
    CHECK(h.codebooks[0].requested_size == 4);
    CHECK(h.codebooks[0].shrunk());
    // second level sees a single distinct residual (zero)
    CHECK(h.codebooks[1].centroids.rows() == 1);
    CHECK(h.codebooks[1].shrunk());
    CHECK(h.final_residuals.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("assign matches training assignments and breaks ties low") {
    const Eigen::MatrixXd x = toy_points();
    const CodebookHierarchy h = fit_rq_kmeans(x, {2, 2}, 7);

    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const std::vector<int> a = assign(h, x.row(i).transpose());
        CHECK(a[0] == h.assignments(i, 0));
        CHECK(a[1] == h.assignments(i, 1));
    }

    // 10.9 goes to the 10.5 centroid, then the +0.5 residual codeword
    Eigen::VectorXd probe(1);
    probe << 10.9;
    const std::vector<int> a = assign(h, probe);
    CHECK(h.codebooks[0].centroids(a[0], 0) == 10.5);
    CHECK(h.codebooks[1].centroids(a[1], 0) == 0.5);

    // equidistant probe picks the lower codeword index
    Eigen::VectorXd mid(1);
    mid << 5.5;
    CHECK(assign(h, mid)[0] == 0);

    Eigen::VectorXd wrong_dim(2);
    wrong_dim << 1.0, 2.0;
    CHECK_THROWS_AS(assign(h, wrong_dim), std::invalid_argument);
}

TEST_CASE("residual telescoping and monotone reconstruction error") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index n = 60 + static_cast<Eigen::Index>(rng() % 120);
        const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng() % 14);
        const Eigen::MatrixXd x = gaussian_mixture(rng, n, d, 4);
        const CodebookHierarchy h = fit_rq_kmeans(x, {6, 3, 2}, trial);

        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::VectorXd recon = h.reconstruct(i) + h.final_residuals.row(i).transpose();
            CHECK((recon - x.row(i).transpose()).cwiseAbs().maxCoeff() <= 1e-9);
        }

        double prev = x.rowwise().squaredNorm().mean();
        for (int level = 0; level < 3; ++level) {
            const Eigen::MatrixXd next = residual_inputs(h, x, level);
            Eigen::MatrixXd after = next;
            const Eigen::MatrixXd& centroids = h.codebooks[static_cast<std::size_t>(level)].centroids;
            for (Eigen::Index i = 0; i < n; ++i)
                after.row(i) -= centroids.row(h.assignments(i, level));
            const double mean_sq = after.rowwise().squaredNorm().mean();
            CHECK(mean_sq <= prev + 1e-12);
            prev = mean_sq;
        }
    }
}

TEST_CASE("fitting is deterministic for a fixed seed") {
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd x = gaussian_mixture(rng, 150, 8, 5);
    const CodebookHierarchy a = fit_rq_kmeans(x, {8, 4}, 1234);
    const CodebookHierarchy b = fit_rq_kmeans(x, {8, 4}, 1234);
    for (std::size_t l = 0; l < 2; ++l)
        CHECK(a.codebooks[l].centroids == b.codebooks[l].centroids);
    CHECK(a.assignments == b.assignments);
    CHECK(a.final_residuals == b.final_residuals);
}

TEST_CASE("fcm membership hand cases") {
    Eigen::MatrixXd centroids(2, 1);
    centroids << 0.0, 3.0;
    Eigen::MatrixXd point(1, 1);
    point << 1.0;
    const MembershipMatrix mm = fcm_memberships(point, centroids, 2.0);
    CHECK(mm.values(0, 0) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(mm.values(0, 1) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("fcm symmetric point splits exactly") {
    Eigen::MatrixXd centroids(2, 1);
    centroids << 0.0, 2.0;
    Eigen::MatrixXd point(1, 1);
    point << 1.0;
    const MembershipMatrix mm = fcm_memberships(point, centroids, 2.0);
    CHECK(mm.values(0, 0) == 0.5);
    CHECK(mm.values(0, 1) == 0.5);
}

TEST_CASE("fcm zero-distance point gets a crisp row") {
    Eigen::MatrixXd centroids(3, 2);
    centroids << 0, 0, 1, 1, 1, 1;  // duplicated centroid: lowest index wins
    Eigen::MatrixXd point(1, 2);
    point << 1, 1;
    const MembershipMatrix mm = fcm_memberships(point, centroids, 2.0);
    CHECK(mm.values(0, 0) == 0.0);
    CHECK(mm.values(0, 1) == 1.0);
    CHECK(mm.values(0, 2) == 0.0);
}

TEST_CASE("fcm rows are stochastic and sharpen toward hard assignment") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd x = gaussian_mixture(rng, 40, 4, 3);
        const CodebookHierarchy h = fit_rq_kmeans(x, {3}, trial);
        const MembershipMatrix soft = fcm_memberships(x, h.codebooks[0].centroids, 2.0);
        const MembershipMatrix sharp = fcm_memberships(x, h.codebooks[0].centroids, 1.01);

        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            CHECK(std::abs(soft.values.row(i).sum() - 1.0) <= 1e-9);
            CHECK(soft.values.row(i).minCoeff() >= 0.0);
            CHECK(soft.values.row(i).maxCoeff() <= 1.0);

            Eigen::Index argmax = 0;
            sharp.values.row(i).maxCoeff(&argmax);
            CHECK(argmax == h.assignments(i, 0));
        }
    }
}

TEST_CASE("fcm input validation") {
    Eigen::MatrixXd p(1, 1), c(1, 1);
    p << 0.0;
    c << 1.0;
    CHECK_THROWS_AS(fcm_memberships(p, Eigen::MatrixXd(0, 1), 2.0), std::invalid_argument);
    CHECK_THROWS_AS(fcm_memberships(p, c, 1.0), std::invalid_argument);
    Eigen::MatrixXd inf_p(1, 1);
    inf_p << std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(fcm_memberships(inf_p, c, 2.0), std::invalid_argument);
}

TEST_CASE("occupancy is 1 for uniform and 0 for collapsed assignments") {
    // four points, two clusters used evenly
    Eigen::MatrixXd even(4, 1);
    even << 0.0, 0.0, 10.0, 10.0;
    const CodebookHierarchy h_even = fit_rq_kmeans(even, {2}, 1);
    const OccupancyReport r_even = occupancy(h_even);
    CHECK(r_even.per_level[0].occupancy == doctest::Approx(1.0));
    CHECK(r_even.per_level[0].interpretation == "well-distributed");

    // identical points: the level shrinks to one cluster, occupancy 0
    Eigen::MatrixXd same(4, 1);
    same << 3.0, 3.0, 3.0, 3.0;
    const CodebookHierarchy h_same = fit_rq_kmeans(same, {2}, 1);
    const OccupancyReport r_same = occupancy(h_same);
    CHECK(r_same.per_level[0].occupancy == 0.0);
    CHECK(r_same.per_level[0].interpretation == "degenerate");

    CHECK(std::string(occupancy_label(0.8)) == "well-distributed");
    CHECK(std::string(occupancy_label(0.5)) == "moderate");
    CHECK(std::string(occupancy_label(0.19)) == "degenerate");
}
