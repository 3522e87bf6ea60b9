#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fcrag/truth.hpp"

namespace fcrag {

/// A fuzzy set over an indexed universe, stored densely. Elements absent
/// from the universe do not exist; entries default to membership 0.
class FuzzySet {
public:
    FuzzySet() = default;

    explicit FuzzySet(Eigen::Index universe_size)
        : values_(Eigen::VectorXd::Zero(universe_size)) {}

    explicit FuzzySet(Eigen::VectorXd values) : values_(std::move(values)) {
        for (Eigen::Index i = 0; i < values_.size(); ++i) {
            if (!(values_[i] >= 0.0 && values_[i] <= 1.0))
                throw std::invalid_argument("FuzzySet membership outside [0,1]");
        }
    }

    Eigen::Index size() const { return values_.size(); }

    double operator()(Eigen::Index i) const { return values_[i]; }

    TruthValue at(Eigen::Index i) const { return TruthValue(values_[i]); }

    void set(Eigen::Index i, TruthValue v) { values_[i] = v.value(); }

    const Eigen::VectorXd& values() const { return values_; }

    friend bool operator==(const FuzzySet& a, const FuzzySet& b) {
        return a.values_.size() == b.values_.size() && a.values_ == b.values_;
    }

private:
    Eigen::VectorXd values_;
};

FuzzySet pointwise_max(const FuzzySet& a, const FuzzySet& b);
FuzzySet pointwise_min(const FuzzySet& a, const FuzzySet& b);

/// True when a(i) <= b(i) for every element.
bool pointwise_leq(const FuzzySet& a, const FuzzySet& b);

/// A fuzzy formal context: objects as rows, attributes as columns,
/// incidence graded in [0,1].
class FuzzyContext {
public:
    explicit FuzzyContext(Eigen::MatrixXd incidence);

    Eigen::Index object_count() const { return incidence_.rows(); }
    Eigen::Index attribute_count() const { return incidence_.cols(); }
    const Eigen::MatrixXd& incidence() const { return incidence_; }

    /// All entries exactly 0 or 1.
    bool is_crisp() const;

private:
    Eigen::MatrixXd incidence_;
};

/// Fuzzy Galois up-derivation: per attribute m, inf over objects g of
/// residuum(A(g), I(g,m)). The infimum over an empty object set is 1.
FuzzySet fuzzy_up(const FuzzyContext& context, const FuzzySet& objects);

/// Dual down-derivation over attributes.
FuzzySet fuzzy_down(const FuzzyContext& context, const FuzzySet& attributes);

struct CrispConcept {
    std::vector<bool> extent;  // over objects
    std::vector<bool> intent;  // over attributes
};

/// Brute-force enumeration of all formal concepts of a crisp context.
/// Test oracle only: requires 0/1 entries and |G|*|M| <= 400. The result
/// is ordered by extent inclusion (cardinality, then lexicographic).
std::vector<CrispConcept> crisp_concepts(const FuzzyContext& context);

}  // namespace fcrag
