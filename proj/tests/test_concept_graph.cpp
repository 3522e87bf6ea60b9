#include <doctest.h>

#include <random>
#include <set>

#include "fcrag/concept_graph.hpp"

using namespace fcrag;

namespace {

// Two tight 1-D clusters around 0 and 10.
struct ToyBuild {
    Eigen::MatrixXd points;
    CodebookHierarchy hierarchy;
    std::vector<MembershipMatrix> memberships;
    OccupancyReport occ;
};

ToyBuild toy_build() {
    ToyBuild t;
    t.points.resize(4, 1);
    t.points << 0.0, 1.0, 10.0, 11.0;
    t.hierarchy = fit_rq_kmeans(t.points, {2}, 7);
    t.memberships.push_back(fcm_memberships(t.points, t.hierarchy.codebooks[0].centroids, 2.0, 0));
    t.occ = occupancy(t.hierarchy);
    return t;
}

ConceptNode seed_with_extent(int id, const Eigen::VectorXd& extent, int level = 0) {
    ConceptNode n;
    n.id = id;
    n.kind = NodeKind::seed;
    n.level = level;
    n.cluster = id;
    n.centroid_per_level[level] = Eigen::VectorXd::Ones(2);
    n.extent = FuzzySet(extent);
    return n;
}

}  // namespace

TEST_CASE("seed nodes carry cluster centroids and membership columns") {
    const ToyBuild t = toy_build();
    const std::vector<ConceptNode> seeds = build_seed_nodes(t.hierarchy, t.memberships, t.occ);

    REQUIRE(seeds.size() == 2);
    for (const ConceptNode& seed : seeds) {
        CHECK(seed.kind == NodeKind::seed);
        CHECK(seed.level == 0);
        CHECK(seed.centroid_per_level.at(0) ==
              t.hierarchy.codebooks[0].centroids.row(seed.cluster).transpose());
        CHECK(seed.extent.values() == t.memberships[0].values.col(seed.cluster));
    }
    CHECK(seeds[0].id == 0);
    CHECK(seeds[1].id == 1);
}

TEST_CASE("degenerate upper levels keep only level-0 seeds") {
    Eigen::MatrixXd points(6, 1);
    points << 0, 0.2, 0.4, 9.6, 9.8, 10.0;
    const CodebookHierarchy h = fit_rq_kmeans(points, {2, 2}, 3);
    const OccupancyReport occ = occupancy(h);

    std::vector<MembershipMatrix> memberships;
    memberships.push_back(fcm_memberships(points, h.codebooks[0].centroids, 2.0, 0));
    // no level-1 memberships on purpose: if level 1 is degenerate the
    // builder must not ask for them
    if (occ.per_level[1].interpretation != "degenerate")
        memberships.push_back(
            fcm_memberships(residual_inputs(h, points, 1), h.codebooks[1].centroids, 2.0, 1));

    const std::vector<ConceptNode> seeds = build_seed_nodes(h, memberships, occ);
    for (const ConceptNode& s : seeds)
        if (occ.per_level[1].interpretation == "degenerate") CHECK(s.level == 0);
}

TEST_CASE("join and meet hand cases") {
    Eigen::MatrixXd embeddings(4, 2);
    embeddings << 1, 0, 2, 0, 0, 1, 0, 2;

    Eigen::VectorXd ea(4), eb(4);
    ea << 1, 0, 0, 0;
    eb << 0, 0, 1, 0;
    const ConceptNode a = seed_with_extent(0, ea);
    const ConceptNode b = seed_with_extent(1, eb);

    const ConceptNode join = derive_join_node(a, b, embeddings, 2);
    CHECK(join.kind == NodeKind::join);
    CHECK(join.bridge);
    CHECK(join.extent.values() == (Eigen::VectorXd(4) << 1, 0, 1, 0).finished());
    CHECK(join.parents == std::array<int, 2>{0, 1});
    // extent-weighted mean of rows 0 and 2
    CHECK(join.centroid_per_level.at(0) == (Eigen::VectorXd(2) << 0.5, 0.5).finished());

    const ConceptNode meet = derive_meet_node(a, b, embeddings, 3);
    CHECK(meet.extent.values().maxCoeff() == 0.0);
    CHECK(meet.meet_mass == 0.0);

    Eigen::VectorXd fa(4), fb(4);
    fa << 0.8, 0.2, 0, 0;
    fb << 0.3, 0.7, 0, 0;
    const ConceptNode fa_node = seed_with_extent(0, fa);
    const ConceptNode fb_node = seed_with_extent(1, fb);
    const ConceptNode fuzzy_join = derive_join_node(fa_node, fb_node, embeddings, 2);
    CHECK(fuzzy_join.extent.values()(0) == 0.8);
    CHECK(fuzzy_join.extent.values()(1) == 0.7);
    const ConceptNode fuzzy_meet = derive_meet_node(fa_node, fb_node, embeddings, 2);
    CHECK(fuzzy_meet.extent.values()(0) == 0.3);
    CHECK(fuzzy_meet.extent.values()(1) == 0.2);
    CHECK(fuzzy_meet.meet_mass == 0.5);

    CHECK_THROWS_AS(derive_join_node(a, a, embeddings, 9), std::invalid_argument);
    CHECK_THROWS_AS(derive_meet_node(b, b, embeddings, 9), std::invalid_argument);
}

TEST_CASE("join and meet are commutative and bounded by their parents") {
    std::mt19937_64 rng(17);
    Eigen::MatrixXd embeddings(6, 3);
    for (Eigen::Index i = 0; i < 6; ++i)
        for (Eigen::Index j = 0; j < 3; ++j)
            embeddings(i, j) = static_cast<double>(rng() % 100) / 10.0;

    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd ea(6), eb(6);
        for (Eigen::Index i = 0; i < 6; ++i) {
            ea[i] = static_cast<double>(rng() % 65) / 64.0;
            eb[i] = static_cast<double>(rng() % 65) / 64.0;
        }
        const ConceptNode a = seed_with_extent(0, ea);
        const ConceptNode b = seed_with_extent(1, eb);

        const ConceptNode ab_join = derive_join_node(a, b, embeddings, 2);
        const ConceptNode ba_join = derive_join_node(b, a, embeddings, 2);
        CHECK(ab_join.extent == ba_join.extent);
        CHECK(ab_join.centroid_per_level.at(0) == ba_join.centroid_per_level.at(0));

        const ConceptNode ab_meet = derive_meet_node(a, b, embeddings, 2);
        CHECK(ab_meet.extent == derive_meet_node(b, a, embeddings, 2).extent);

        CHECK(pointwise_leq(ab_meet.extent, a.extent));
        CHECK(pointwise_leq(ab_meet.extent, b.extent));
        CHECK(pointwise_leq(a.extent, ab_join.extent));
        CHECK(pointwise_leq(b.extent, ab_join.extent));
    }
}

TEST_CASE("pair selection policies") {
    Eigen::VectorXd e0(4), e1(4), e2(4);
    e0 << 1, 1, 0, 0;
    e1 << 1, 1, 0, 0;
    e2 << 0, 0, 1, 0;
    std::vector<ConceptNode> seeds{seed_with_extent(0, e0), seed_with_extent(1, e1),
                                   seed_with_extent(2, e2)};
    seeds[0].centroid_per_level[0] = (Eigen::VectorXd(2) << 1.0, 0.0).finished();
    seeds[1].centroid_per_level[0] = (Eigen::VectorXd(2) << 1.0, 0.3).finished();
    seeds[2].centroid_per_level[0] = (Eigen::VectorXd(2) << 0.0, 1.0).finished();

    PairSelectionConfig cfg;
    cfg.min_meet_mass = 0.0;
    cfg.max_meets = 8;
    cfg.max_joins = 1;
    cfg.join_band_lo = 0.3;
    cfg.join_band_hi = 0.99;

    const std::vector<SelectedPair> selected = select_derived_pairs(seeds, cfg);

    // identical extents have maximal meet mass: the (0,1) pair leads
    REQUIRE(!selected.empty());
    CHECK(selected[0].kind == NodeKind::meet);
    CHECK(selected[0].a == 0);
    CHECK(selected[0].b == 1);

    // exactly one join, the in-band pair with the highest similarity
    int joins = 0;
    for (const SelectedPair& sp : selected)
        if (sp.kind == NodeKind::join) {
            ++joins;
            CHECK(sp.a == 0);
            CHECK(sp.b == 1);
        }
    CHECK(joins == 1);

    // orthogonal crisp seeds produce no meets under a positive mass floor
    PairSelectionConfig strict;
    strict.min_meet_mass = 0.5;
    std::vector<ConceptNode> disjoint{seed_with_extent(0, e0), seed_with_extent(2, e2)};
    for (const SelectedPair& sp : select_derived_pairs(disjoint, strict))
        CHECK(sp.kind != NodeKind::meet);

    CHECK(select_derived_pairs({seeds[0]}, cfg).empty());
}

TEST_CASE("co-occurrence edges count co-retrieved concepts") {
    // Two clusters whose chunks always co-retrieve within a window of 3.
    Eigen::MatrixXd embeddings(6, 2);
    embeddings << 1.0, 0.0,
                  0.9, 0.1,
                  0.8, 0.2,
                  0.0, 1.0,
                  0.1, 0.9,
                  0.2, 0.8;

    ConceptGraph graph;
    Eigen::VectorXd ea(6), eb(6);
    ea << 1, 1, 1, 0, 0, 0;
    eb << 0, 0, 0, 1, 1, 1;
    graph.add_node(seed_with_extent(0, ea));
    graph.add_node(seed_with_extent(1, eb));

    SUBCASE("infinite threshold yields no edges") {
        build_cooccurrence_edges(graph, embeddings, {6, std::numeric_limits<double>::infinity()});
        CHECK(graph.edges().empty());
    }

    SUBCASE("window spanning both clusters links the two seeds") {
        build_cooccurrence_edges(graph, embeddings, {6, 1.0});
        REQUIRE(graph.edges().size() == 1);
        const GraphEdge& e = graph.edges()[0];
        CHECK(e.kind == EdgeKind::cooccurrence);
        CHECK(e.a == 0);
        CHECK(e.b == 1);
        CHECK(e.weight == 6.0);  // every window spans both concepts
    }

    SUBCASE("tight windows stay within one cluster") {
        build_cooccurrence_edges(graph, embeddings, {3, 1.0});
        CHECK(graph.edges().empty());
    }

    SUBCASE("window below 2 is rejected") {
        CHECK_THROWS_AS(build_cooccurrence_edges(graph, embeddings, {1, 1.0}),
                        std::invalid_argument);
    }
}

TEST_CASE("single-cluster corpora never self-loop") {
    Eigen::MatrixXd embeddings(3, 2);
    embeddings << 1, 0, 1, 0.1, 1, 0.2;
    ConceptGraph graph;
    Eigen::VectorXd e(3);
    e << 1, 1, 1;
    graph.add_node(seed_with_extent(0, e));
    build_cooccurrence_edges(graph, embeddings, {3, 1.0});
    CHECK(graph.edges().empty());
}

TEST_CASE("full graph build: well-formedness and deterministic rebuild") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 8; ++trial) {
        const Eigen::Index n = 24 + static_cast<Eigen::Index>(rng() % 30);
        Eigen::MatrixXd embeddings(n, 4);
        for (Eigen::Index i = 0; i < n; ++i) {
            const int cluster = static_cast<int>(rng() % 3);
            for (Eigen::Index j = 0; j < 4; ++j)
                embeddings(i, j) = (j == cluster ? 5.0 : 0.0) +
                                   static_cast<double>(rng() % 100) / 50.0;
        }
        const CodebookHierarchy h = fit_rq_kmeans(embeddings, {3, 2}, trial);
        const OccupancyReport occ = occupancy(h);
        std::vector<MembershipMatrix> memberships;
        for (const LevelOccupancy& lo : occ.per_level) {
            if (lo.level != 0 && lo.interpretation == "degenerate") continue;
            memberships.push_back(fcm_memberships(residual_inputs(h, embeddings, lo.level),
                                                  h.codebooks[static_cast<std::size_t>(lo.level)].centroids,
                                                  2.0, lo.level));
        }

        ConceptGraphConfig cfg;
        cfg.pairs.min_meet_mass = 0.5;
        cfg.pairs.max_joins = 4;
        cfg.pairs.max_meets = 4;
        cfg.pairs.join_band_lo = -1.0;
        cfg.pairs.join_band_hi = 1.0;
        cfg.cooccurrence = {4, 2.0};

        const ConceptGraph g1 = build_concept_graph(h, memberships, occ, embeddings, cfg);
        const ConceptGraph g2 = build_concept_graph(h, memberships, occ, embeddings, cfg);

        // node ids are unique and sequential
        for (std::size_t i = 0; i < g1.nodes().size(); ++i)
            CHECK(g1.nodes()[i].id == static_cast<int>(i));

        for (const ConceptNode& node : g1.nodes()) {
            if (node.kind == NodeKind::seed) continue;
            // derived nodes: exactly two lattice edges to their parents
            int lattice_edges = 0;
            for (const GraphEdge& e : g1.edges())
                if (e.kind == EdgeKind::lattice && e.a == node.id) {
                    ++lattice_edges;
                    CHECK((e.b == node.parents[0] || e.b == node.parents[1]));
                }
            CHECK(lattice_edges == 2);

            const ConceptNode& pa = g1.node(node.parents[0]);
            const ConceptNode& pb = g1.node(node.parents[1]);
            if (node.kind == NodeKind::join) {
                CHECK(node.extent == pointwise_max(pa.extent, pb.extent));
                CHECK(node.bridge);
            } else {
                CHECK(node.extent == pointwise_min(pa.extent, pb.extent));
            }
        }

        for (const GraphEdge& e : g1.edges()) {
            CHECK(e.a != e.b);
            CHECK(e.a < static_cast<int>(g1.nodes().size()));
            CHECK(e.b < static_cast<int>(g1.nodes().size()));
            if (e.kind == EdgeKind::cooccurrence) CHECK(e.weight >= cfg.cooccurrence.theta);
        }

        // deterministic rebuild: identical nodes and edges
        REQUIRE(g1.nodes().size() == g2.nodes().size());
        REQUIRE(g1.edges().size() == g2.edges().size());
        for (std::size_t i = 0; i < g1.nodes().size(); ++i) {
            CHECK(g1.nodes()[i].id == g2.nodes()[i].id);
            CHECK(g1.nodes()[i].kind == g2.nodes()[i].kind);
            CHECK(g1.nodes()[i].extent == g2.nodes()[i].extent);
        }
        for (std::size_t i = 0; i < g1.edges().size(); ++i) {
            CHECK(g1.edges()[i].a == g2.edges()[i].a);
            CHECK(g1.edges()[i].b == g2.edges()[i].b);
            CHECK(g1.edges()[i].weight == g2.edges()[i].weight);
        }
    }
}
