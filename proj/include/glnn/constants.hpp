#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace glnn {

// Roots of p^2 + p - 1 = 0 and the hyperparameters derived from them.
// Everything is computed from sqrt(5) at full double precision; the familiar
// rounded values (0.618, 0.874, 0.016) are display approximations only.

inline std::pair<double, double> golden_roots() {
    const double s5 = std::sqrt(5.0);
    return {(s5 - 1.0) / 2.0, (-s5 - 1.0) / 2.0};
}

// momentum weight: alpha = p1 * sqrt(2) ~ 0.874032
inline double momentum_weight() {
    return golden_roots().first * std::sqrt(2.0);
}

// learning rate: eta = (1 - alpha)^2 ~ 0.015868
inline double learning_rate() {
    const double a = momentum_weight();
    return (1.0 - a) * (1.0 - a);
}

struct GoldenConstants {
    double p1;
    double p2;
    double alpha;
    double eta;

    static GoldenConstants compute() {
        auto [p1, p2] = golden_roots();
        return {p1, p2, momentum_weight(), learning_rate()};
    }
};

// extracellular concentration / true-signal probability, domain [1/2, 1]
struct SignalLevel {
    double p;

    explicit SignalLevel(double value) : p(value) {
        if (!(value >= 0.5 && value <= 1.0)) {
            throw std::domain_error("SignalLevel: p must lie in [0.5, 1]");
        }
    }
};

// expected information carried by the signal (1-p)/p:
//   E = -p * ln((1-p)/p)
// E(0.5) = 0; E tends to +inf as p -> 1 (the boundary returns +inf so sweeps
// can include it).
inline double expected_information(SignalLevel s) {
    if (s.p == 1.0) {
        return std::numeric_limits<double>::infinity();
    }
    return -s.p * std::log((1.0 - s.p) / s.p);
}

}  // namespace glnn
