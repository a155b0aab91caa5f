#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "glnn/constants.hpp"

using namespace glnn;

namespace {
// values frozen from a 40-digit reference evaluation
constexpr double kP1 = 0.6180339887498949;
constexpr double kP2 = -1.618033988749895;
constexpr double kAlpha = 0.8740320488976421;
constexpr double kEta = 0.015867924704926020;
}  // namespace

TEST_CASE("roots satisfy the defining equation") {
    auto [p1, p2] = golden_roots();
    CHECK(std::abs(p1 * p1 + p1 - 1.0) < 1e-12);
    CHECK(std::abs(p2 * p2 + p2 - 1.0) < 1e-12);
    CHECK(p1 > 0.0);
    CHECK(p2 < 0.0);
}

TEST_CASE("root values match the frozen reference") {
    auto [p1, p2] = golden_roots();
    CHECK(std::abs(p1 - kP1) < 1e-15);
    CHECK(std::abs(p2 - kP2) < 1e-15);
}

TEST_CASE("root identities") {
    auto [p1, p2] = golden_roots();
    // 1 - p = p^2 for both roots
    CHECK(std::abs((1.0 - p1) - p1 * p1) < 1e-12);
    CHECK(std::abs((1.0 - p2) - p2 * p2) < 1e-12);
    // sum and product from the monic quadratic
    CHECK(std::abs(p1 + p2 + 1.0) < 1e-12);
    CHECK(std::abs(p1 * p2 + 1.0) < 1e-12);
}

TEST_CASE("negated roots solve the conjugate quadratic") {
    auto [p1, p2] = golden_roots();
    // -p1 and -p2 are the roots of s^2 - s - 1 = 0, where 1 - s = -1/s
    for (double s : {-p1, -p2}) {
        CHECK(std::abs(s * s - s - 1.0) < 1e-12);
        CHECK(std::abs((1.0 - s) + 1.0 / s) < 1e-12);
    }
}

TEST_CASE("momentum weight is the positive root scaled by sqrt(2)") {
    const double alpha = momentum_weight();
    auto [p1, p2] = golden_roots();
    (void)p2;
    CHECK(std::abs(alpha - p1 * std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(alpha / std::sqrt(2.0) - p1) < 1e-12);
    CHECK(std::abs(alpha - kAlpha) < 1e-15);
}

TEST_CASE("learning rate is the squared complement of the momentum weight") {
    const double eta = learning_rate();
    const double alpha = momentum_weight();
    CHECK(std::abs(eta - (1.0 - alpha) * (1.0 - alpha)) < 1e-15);
    CHECK(std::abs(std::sqrt(eta) + alpha - 1.0) < 1e-12);
    CHECK(std::abs(eta - kEta) < 1e-15);
}

TEST_CASE("three-decimal display values") {
    auto round3 = [](double x) { return std::round(x * 1000.0) / 1000.0; };
    CHECK(round3(golden_roots().first) == 0.618);
    CHECK(round3(momentum_weight()) == 0.874);
    CHECK(round3(learning_rate()) == 0.016);
}

TEST_CASE("constants are pure recomputations") {
    const GoldenConstants a = GoldenConstants::compute();
    const GoldenConstants b = GoldenConstants::compute();
    CHECK(a.p1 == b.p1);
    CHECK(a.p2 == b.p2);
    CHECK(a.alpha == b.alpha);
    CHECK(a.eta == b.eta);
    CHECK(a.p1 == golden_roots().first);
    CHECK(a.p2 == golden_roots().second);
    CHECK(a.alpha == momentum_weight());
    CHECK(a.eta == learning_rate());
}

TEST_CASE("signal level domain") {
    CHECK_NOTHROW(SignalLevel(0.5));
    CHECK_NOTHROW(SignalLevel(1.0));
    CHECK_NOTHROW(SignalLevel(golden_roots().first));
    CHECK_THROWS_AS(SignalLevel(0.49), std::domain_error);
    CHECK_THROWS_AS(SignalLevel(1.01), std::domain_error);
    CHECK_THROWS_AS(SignalLevel(-1.0), std::domain_error);
    CHECK_THROWS_AS(SignalLevel(std::numeric_limits<double>::quiet_NaN()),
                    std::domain_error);
}

TEST_CASE("expected information anchor values") {
    CHECK(expected_information(SignalLevel(0.5)) == 0.0);
    CHECK(std::abs(expected_information(SignalLevel(golden_roots().first)) -
                   0.29740526367520332) < 1e-15);
    CHECK(std::abs(expected_information(SignalLevel(0.75)) -
                   0.82395921650108227) < 1e-15);
    CHECK(std::isinf(expected_information(SignalLevel(1.0))));
    CHECK(expected_information(SignalLevel(1.0)) > 0.0);
}

TEST_CASE("expected information increases with signal level") {
    double prev = expected_information(SignalLevel(0.5));
    for (int i = 1; i <= 1000; ++i) {
        // stay below 1 so every value is finite
        const double p = 0.5 + 0.4999 * static_cast<double>(i) / 1000.0;
        const double e = expected_information(SignalLevel(p));
        CHECK(e > prev);
        prev = e;
    }
}
