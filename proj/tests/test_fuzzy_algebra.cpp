#include <doctest.h>

#include <random>

#include "fcrag/fuzzy_context.hpp"
#include "fcrag/truth.hpp"

using namespace fcrag;

namespace {

// Random values on the 1/64 dyadic grid: every Lukasiewicz expression
// over them is exact in double precision, so law checks need no
// tolerance at all.
double dyadic(std::mt19937_64& rng) { return static_cast<double>(rng() % 65) / 64.0; }

FuzzyContext random_context(std::mt19937_64& rng, Eigen::Index max_side) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(max_side));
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(max_side));
    Eigen::MatrixXd incidence(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) incidence(i, j) = dyadic(rng);
    return FuzzyContext(std::move(incidence));
}

FuzzySet random_set(std::mt19937_64& rng, Eigen::Index size) {
    Eigen::VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i) v[i] = dyadic(rng);
    return FuzzySet(std::move(v));
}

}  // namespace

TEST_CASE("TruthValue enforces the unit interval") {
    CHECK_THROWS_AS(TruthValue(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(TruthValue(1.1), std::invalid_argument);
    CHECK_THROWS_AS(TruthValue(std::nan("")), std::invalid_argument);
    CHECK(TruthValue(0.5).value() == 0.5);
    CHECK(TruthValue().value() == 0.0);
}

TEST_CASE("Lukasiewicz t-norm hand cases") {
    CHECK(luk_tnorm(0.7, 0.6) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(luk_tnorm(0.3, 0.3) == 0.0);
    // 1 is the exact identity, bit for bit, including awkward values.
    for (double a : {0.0, 0.05, 0.3, 1e-17, 0.9999, 1.0}) {
        CHECK(luk_tnorm(a, 1.0) == a);
        CHECK(luk_tnorm(1.0, a) == a);
    }
}

TEST_CASE("Lukasiewicz residuum hand cases") {
    CHECK(luk_residuum(0.4, 0.9) == 1.0);
    CHECK(luk_residuum(0.9, 0.4) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(luk_residuum(1.0, 0.0) == 0.0);
    CHECK(luk_residuum(0.3, 0.3) == 1.0);
}

TEST_CASE("negation is 1-a and involutive on dyadic values") {
    CHECK(luk_negation(0.3) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(luk_negation(1.0) == 0.0);
    CHECK(luk_negation(0.0) == 1.0);
    std::mt19937_64 rng(11);
    for (int t = 0; t < 500; ++t) {
        const double a = dyadic(rng);
        CHECK(luk_negation(luk_negation(a)) == a);
    }
}

TEST_CASE("t-norm laws hold exactly on dyadic samples") {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 3000; ++t) {
        const double a = dyadic(rng), b = dyadic(rng), c = dyadic(rng);
        CHECK(luk_tnorm(a, b) == luk_tnorm(b, a));
        CHECK(luk_tnorm(luk_tnorm(a, b), c) == luk_tnorm(a, luk_tnorm(b, c)));
        // monotone in both arguments
        if (a <= b) CHECK(luk_tnorm(a, c) <= luk_tnorm(b, c));
        // adjointness both ways
        CHECK((luk_tnorm(a, b) <= c) == (a <= luk_residuum(b, c)));
    }
}

TEST_CASE("TruthValue overloads mirror the scalar kernels") {
    const TruthValue a(0.7), b(0.6);
    CHECK(luk_tnorm(a, b).value() == luk_tnorm(0.7, 0.6));
    CHECK(luk_residuum(a, b).value() == luk_residuum(0.7, 0.6));
    CHECK(luk_negation(a).value() == luk_negation(0.7));
}

TEST_CASE("FuzzySet validates memberships") {
    Eigen::VectorXd bad(2);
    bad << 0.5, 1.5;
    CHECK_THROWS_AS(FuzzySet(bad), std::invalid_argument);
    FuzzySet s(3);
    CHECK(s.size() == 3);
    CHECK(s(1) == 0.0);
    s.set(1, TruthValue(0.25));
    CHECK(s.at(1).value() == 0.25);
}

TEST_CASE("FuzzyContext validates incidence") {
    Eigen::MatrixXd bad(1, 2);
    bad << 0.5, -0.1;
    CHECK_THROWS_AS(FuzzyContext(bad), std::invalid_argument);
}

TEST_CASE("fuzzy_up hand cases") {
    Eigen::MatrixXd I(2, 2);
    I << 1.0, 0.5, 0.5, 1.0;
    const FuzzyContext ctx(I);

    Eigen::VectorXd a(2);
    a << 1.0, 0.0;
    const FuzzySet up = fuzzy_up(ctx, FuzzySet(a));
    CHECK(up(0) == 1.0);
    CHECK(up(1) == 0.5);

    // all-zero object set derives the full attribute set
    const FuzzySet top = fuzzy_up(ctx, FuzzySet(2));
    CHECK(top(0) == 1.0);
    CHECK(top(1) == 1.0);

    CHECK_THROWS_AS(fuzzy_up(ctx, FuzzySet(3)), std::invalid_argument);
}

TEST_CASE("fuzzy_down hand cases") {
    Eigen::MatrixXd I(2, 2);
    I << 1.0, 0.5, 0.5, 1.0;
    const FuzzyContext ctx(I);

    Eigen::VectorXd b(2);
    b << 0.0, 1.0;
    const FuzzySet down = fuzzy_down(ctx, FuzzySet(b));
    CHECK(down(0) == 0.5);
    CHECK(down(1) == 1.0);

    const FuzzySet top = fuzzy_down(ctx, FuzzySet(2));
    CHECK(top(0) == 1.0);
    CHECK(top(1) == 1.0);

    CHECK_THROWS_AS(fuzzy_down(ctx, FuzzySet(3)), std::invalid_argument);
}

TEST_CASE("crisp singleton reduces to the object's attribute row") {
    Eigen::MatrixXd I(3, 4);
    I << 1, 0, 1, 0,
         0, 1, 1, 0,
         1, 1, 0, 1;
    const FuzzyContext ctx(I);
    for (Eigen::Index g = 0; g < 3; ++g) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(3);
        a[g] = 1.0;
        const FuzzySet up = fuzzy_up(ctx, FuzzySet(a));
        for (Eigen::Index m = 0; m < 4; ++m) CHECK(up(m) == I(g, m));
    }
}

TEST_CASE("Galois antitonicity, extensivity, and exact closure idempotence") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const FuzzyContext ctx = random_context(rng, 12);
        const FuzzySet a1 = random_set(rng, ctx.object_count());

        // a2 >= a1 pointwise
        Eigen::VectorXd bumped = a1.values();
        for (Eigen::Index i = 0; i < bumped.size(); ++i)
            bumped[i] = std::min(1.0, bumped[i] + dyadic(rng) / 4.0);
        const FuzzySet a2{[&] {
            Eigen::VectorXd v = bumped;
            for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::round(v[i] * 64.0) / 64.0;
            return v;
        }()};

        CHECK(pointwise_leq(a1, a2));
        CHECK(pointwise_leq(fuzzy_up(ctx, a2), fuzzy_up(ctx, a1)));

        const FuzzySet up1 = fuzzy_up(ctx, a1);
        const FuzzySet closure = fuzzy_down(ctx, up1);
        CHECK(pointwise_leq(a1, closure));
        CHECK(fuzzy_up(ctx, closure) == up1);  // exact, no tolerance
    }
}

namespace {

FuzzyContext random_crisp_context(std::mt19937_64& rng, Eigen::Index max_side) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(max_side));
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(max_side));
    Eigen::MatrixXd incidence(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) incidence(i, j) = rng() % 2 ? 1.0 : 0.0;
    return FuzzyContext(std::move(incidence));
}

}  // namespace

TEST_CASE("crisp_concepts hand cases") {
    {
        Eigen::MatrixXd I(1, 1);
        I << 1.0;
        const auto concepts = crisp_concepts(FuzzyContext(I));
        REQUIRE(concepts.size() == 1);  // top and bottom coincide
        CHECK(concepts[0].extent == std::vector<bool>{true});
        CHECK(concepts[0].intent == std::vector<bool>{true});
    }
    {
        const auto concepts = crisp_concepts(FuzzyContext(Eigen::MatrixXd::Identity(2, 2)));
        CHECK(concepts.size() == 4);
    }
    {
        const auto concepts = crisp_concepts(FuzzyContext(Eigen::MatrixXd::Zero(2, 2)));
        REQUIRE(concepts.size() == 2);
        CHECK(concepts[0].extent == std::vector<bool>{false, false});
        CHECK(concepts[0].intent == std::vector<bool>{true, true});
        CHECK(concepts[1].extent == std::vector<bool>{true, true});
        CHECK(concepts[1].intent == std::vector<bool>{false, false});
    }
}

TEST_CASE("crisp_concepts rejects bad inputs") {
    Eigen::MatrixXd fuzzy(1, 1);
    fuzzy << 0.5;
    CHECK_THROWS_AS(crisp_concepts(FuzzyContext(fuzzy)), std::invalid_argument);
    CHECK_THROWS_AS(crisp_concepts(FuzzyContext(Eigen::MatrixXd::Zero(21, 21))),
                    std::invalid_argument);
}

TEST_CASE("fuzzy operators reduce to the crisp Galois connection on 0/1 contexts") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        const FuzzyContext ctx = random_crisp_context(rng, 5);
        const auto concepts = crisp_concepts(ctx);
        REQUIRE(!concepts.empty());

        for (const CrispConcept& concept : concepts) {
            Eigen::VectorXd extent(ctx.object_count());
            for (Eigen::Index g = 0; g < ctx.object_count(); ++g)
                extent[g] = concept.extent[static_cast<std::size_t>(g)] ? 1.0 : 0.0;
            Eigen::VectorXd intent(ctx.attribute_count());
            for (Eigen::Index m = 0; m < ctx.attribute_count(); ++m)
                intent[m] = concept.intent[static_cast<std::size_t>(m)] ? 1.0 : 0.0;

            CHECK(fuzzy_up(ctx, FuzzySet(extent)) == FuzzySet(intent));
            CHECK(fuzzy_down(ctx, FuzzySet(intent)) == FuzzySet(extent));
        }

        // closures of random crisp subsets are concepts
        Eigen::VectorXd subset(ctx.object_count());
        for (Eigen::Index g = 0; g < ctx.object_count(); ++g) subset[g] = rng() % 2 ? 1.0 : 0.0;
        const FuzzySet up = fuzzy_up(ctx, FuzzySet(subset));
        const FuzzySet closed = fuzzy_down(ctx, up);
        bool found = false;
        for (const CrispConcept& concept : concepts) {
            bool same = true;
            for (Eigen::Index g = 0; g < ctx.object_count(); ++g)
                if ((closed(g) == 1.0) != concept.extent[static_cast<std::size_t>(g)]) same = false;
            if (same) found = true;
        }
        CHECK(found);
    }
}
