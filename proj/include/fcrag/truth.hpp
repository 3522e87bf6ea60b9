#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fcrag {

// Scalar kernels for the Lukasiewicz residuated lattice on [0,1].
// The boundary guards keep the unit laws exact in floating point:
// tnorm(a, 1) returns a bit-for-bit and residuum(a, b) is exactly 1
// whenever a <= b.

inline double luk_tnorm(double a, double b) {
    if (a == 1.0) return b;
    if (b == 1.0) return a;
    return std::max(0.0, a + b - 1.0);
}

inline double luk_residuum(double a, double b) {
    if (a <= b) return 1.0;
    return std::min(1.0, (1.0 - a) + b);
}

inline double luk_negation(double a) {
    return 1.0 - a;
}

/// A degree of truth in [0,1]. Construction outside the interval throws.
class TruthValue {
public:
    TruthValue() = default;

    explicit TruthValue(double v) : value_(v) {
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("TruthValue outside [0,1]");
    }

    double value() const { return value_; }

    friend bool operator==(TruthValue a, TruthValue b) { return a.value_ == b.value_; }
    friend auto operator<=>(TruthValue a, TruthValue b) { return a.value_ <=> b.value_; }

private:
    double value_ = 0.0;
};

inline TruthValue luk_tnorm(TruthValue a, TruthValue b) {
    return TruthValue(luk_tnorm(a.value(), b.value()));
}

inline TruthValue luk_residuum(TruthValue a, TruthValue b) {
    return TruthValue(luk_residuum(a.value(), b.value()));
}

inline TruthValue luk_negation(TruthValue a) {
    return TruthValue(luk_negation(a.value()));
}

}  // namespace fcrag
