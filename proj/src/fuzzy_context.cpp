#include "fcrag/fuzzy_context.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <set>
#include <stdexcept>

namespace fcrag {

FuzzySet pointwise_max(const FuzzySet& a, const FuzzySet& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("pointwise_max: universe size mismatch");
    return FuzzySet(a.values().cwiseMax(b.values()));
}

FuzzySet pointwise_min(const FuzzySet& a, const FuzzySet& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("pointwise_min: universe size mismatch");
    return FuzzySet(a.values().cwiseMin(b.values()));
}

bool pointwise_leq(const FuzzySet& a, const FuzzySet& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("pointwise_leq: universe size mismatch");
    return (a.values().array() <= b.values().array()).all();
}

FuzzyContext::FuzzyContext(Eigen::MatrixXd incidence) : incidence_(std::move(incidence)) {
    for (Eigen::Index i = 0; i < incidence_.rows(); ++i)
        for (Eigen::Index j = 0; j < incidence_.cols(); ++j)
            if (!(incidence_(i, j) >= 0.0 && incidence_(i, j) <= 1.0))
                throw std::invalid_argument("FuzzyContext incidence outside [0,1]");
}

bool FuzzyContext::is_crisp() const {
    for (Eigen::Index i = 0; i < incidence_.rows(); ++i)
        for (Eigen::Index j = 0; j < incidence_.cols(); ++j)
            if (incidence_(i, j) != 0.0 && incidence_(i, j) != 1.0) return false;
    return true;
}

FuzzySet fuzzy_up(const FuzzyContext& context, const FuzzySet& objects) {
    if (objects.size() != context.object_count())
        throw std::invalid_argument("fuzzy_up: fuzzy set universe does not match objects");
    Eigen::VectorXd out(context.attribute_count());
    for (Eigen::Index m = 0; m < context.attribute_count(); ++m) {
        double inf = 1.0;
        for (Eigen::Index g = 0; g < context.object_count(); ++g)
            inf = std::min(inf, luk_residuum(objects(g), context.incidence()(g, m)));
        out[m] = inf;
    }
    return FuzzySet(std::move(out));
}

FuzzySet fuzzy_down(const FuzzyContext& context, const FuzzySet& attributes) {
    if (attributes.size() != context.attribute_count())
        throw std::invalid_argument("fuzzy_down: fuzzy set universe does not match attributes");
    Eigen::VectorXd out(context.object_count());
    for (Eigen::Index g = 0; g < context.object_count(); ++g) {
        double inf = 1.0;
        for (Eigen::Index m = 0; m < context.attribute_count(); ++m)
            inf = std::min(inf, luk_residuum(attributes(m), context.incidence()(g, m)));
        out[g] = inf;
    }
    return FuzzySet(std::move(out));
}

namespace {

std::vector<bool> mask_to_bools(std::uint32_t mask, Eigen::Index n) {
    std::vector<bool> out(static_cast<std::size_t>(n), false);
    for (Eigen::Index i = 0; i < n; ++i)
        if (mask & (1u << i)) out[static_cast<std::size_t>(i)] = true;
    return out;
}

}  // namespace

std::vector<CrispConcept> crisp_concepts(const FuzzyContext& context) {
    const Eigen::Index n = context.object_count();
    const Eigen::Index m = context.attribute_count();
    if (n * m > 400)
        throw std::invalid_argument("crisp_concepts: context exceeds oracle scale (|G|*|M| <= 400)");
    if (!context.is_crisp())
        throw std::invalid_argument("crisp_concepts: context has non-binary entries");

    // Bitmask rows/columns; enumerate subsets of the smaller side so the
    // subset count stays bounded (min side <= 20 given the size cap).
    std::vector<std::uint32_t> obj_attrs(static_cast<std::size_t>(n), 0);
    std::vector<std::uint32_t> attr_objs(static_cast<std::size_t>(m), 0);
    for (Eigen::Index g = 0; g < n; ++g)
        for (Eigen::Index a = 0; a < m; ++a)
            if (context.incidence()(g, a) == 1.0) {
                obj_attrs[static_cast<std::size_t>(g)] |= 1u << a;
                attr_objs[static_cast<std::size_t>(a)] |= 1u << g;
            }

    const std::uint32_t all_objects = n == 32 ? ~0u : (1u << n) - 1u;
    const std::uint32_t all_attrs = m == 32 ? ~0u : (1u << m) - 1u;

    auto up = [&](std::uint32_t extent) {
        std::uint32_t intent = all_attrs;
        for (Eigen::Index g = 0; g < n; ++g)
            if (extent & (1u << g)) intent &= obj_attrs[static_cast<std::size_t>(g)];
        return intent;
    };
    auto down = [&](std::uint32_t intent) {
        std::uint32_t extent = all_objects;
        for (Eigen::Index a = 0; a < m; ++a)
            if (intent & (1u << a)) extent &= attr_objs[static_cast<std::size_t>(a)];
        return extent;
    };

    std::set<std::pair<std::uint32_t, std::uint32_t>> found;
    if (m <= n) {
        for (std::uint64_t b = 0; b < (1ull << m); ++b) {
            const std::uint32_t extent = down(static_cast<std::uint32_t>(b));
            found.emplace(extent, up(extent));
        }
    } else {
        for (std::uint64_t a = 0; a < (1ull << n); ++a) {
            const std::uint32_t intent = up(static_cast<std::uint32_t>(a));
            found.emplace(down(intent), intent);
        }
    }

    std::vector<std::pair<std::uint32_t, std::uint32_t>> ordered(found.begin(), found.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) {
        const int px = std::popcount(x.first), py = std::popcount(y.first);
        if (px != py) return px < py;
        return x.first < y.first;
    });

    std::vector<CrispConcept> out;
    out.reserve(ordered.size());
    for (const auto& [extent, intent] : ordered)
        out.push_back({mask_to_bools(extent, n), mask_to_bools(intent, m)});
    return out;
}

}  // namespace fcrag
