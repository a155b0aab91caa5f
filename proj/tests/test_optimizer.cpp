#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "glnn/constants.hpp"
#include "glnn/layers.hpp"
#include "glnn/optimizer.hpp"
#include "glnn/rng.hpp"
#include "glnn/tensor.hpp"

using namespace glnn;

namespace {

Tensor scalar(double v) {
    Tensor t({1});
    t.data[0] = v;
    return t;
}

ParamGrads random_grads(const ParamSet& params, SplitMix64& rng) {
    ParamGrads grads;
    for (const Tensor* t : params.trainable()) {
        Tensor g = Tensor::zeros_like(*t);
        for (double& v : g.data) v = rng.uniform(-1.0, 1.0);
        grads.push_back(std::move(g));
    }
    return grads;
}

}  // namespace

TEST_CASE("config validation and the golden preset") {
    CHECK_THROWS_AS(OptimizerConfig{0.0}.validate(), std::invalid_argument);
    CHECK_THROWS_AS(OptimizerConfig{-0.1}.validate(), std::invalid_argument);
    CHECK_THROWS_AS((OptimizerConfig{0.1, -0.01}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((OptimizerConfig{0.1, 1.0}.validate()), std::invalid_argument);
    CHECK_NOTHROW((OptimizerConfig{0.1, 0.0}.validate()));
    CHECK_NOTHROW((OptimizerConfig{0.1, 0.99}.validate()));

    const OptimizerConfig g = OptimizerConfig::golden();
    CHECK(g.eta == learning_rate());
    CHECK(g.alpha == momentum_weight());
    CHECK(g.momentum_enabled);
    CHECK_NOTHROW(g.validate());
}

TEST_CASE("plain gradient step") {
    Tensor w = scalar(1.0);
    apply_sgd(w, scalar(0.0), 0.1);
    CHECK(w.data[0] == 1.0);
    apply_sgd(w, scalar(0.5), 0.1);
    CHECK(w.data[0] == doctest::Approx(0.95).epsilon(1e-15));

    Tensor bad({2});
    CHECK_THROWS_AS(apply_sgd(w, bad, 0.1), std::invalid_argument);
}

TEST_CASE("gradient descent contracts a quadratic bowl") {
    // loss w^2 has gradient 2w; with eta = 1/4 each step exactly halves w
    Tensor w = scalar(1.0);
    for (int i = 0; i < 10; ++i) {
        apply_sgd(w, scalar(2.0 * w.data[0]), 0.25);
    }
    CHECK(w.data[0] == 0.0009765625);  // 2^-10
}

TEST_CASE("momentum accumulates past gradients") {
    // constant gradient 1, eta 0.1, alpha 0.5: deltas -0.1, -0.15, -0.175, ...
    Tensor w = scalar(0.0);
    Tensor delta = scalar(0.0);
    const Tensor g = scalar(1.0);
    apply_momentum(w, g, delta, 0.1, 0.5);
    CHECK(delta.data[0] == doctest::Approx(-0.1).epsilon(1e-15));
    apply_momentum(w, g, delta, 0.1, 0.5);
    CHECK(delta.data[0] == doctest::Approx(-0.15).epsilon(1e-15));
    apply_momentum(w, g, delta, 0.1, 0.5);
    CHECK(delta.data[0] == doctest::Approx(-0.175).epsilon(1e-15));

    // the geometric series approaches -eta/(1 - alpha)
    for (int i = 0; i < 60; ++i) apply_momentum(w, g, delta, 0.1, 0.5);
    CHECK(std::abs(delta.data[0] + 0.2) < 1e-15);
}

TEST_CASE("momentum damps oscillation on the bowl") {
    Tensor w = scalar(1.0);
    Tensor delta = scalar(0.0);
    for (int i = 0; i < 200; ++i) {
        apply_momentum(w, scalar(2.0 * w.data[0]), delta, 0.1, 0.5);
    }
    CHECK(std::abs(w.data[0]) < 1e-8);
}

TEST_CASE("recursive deltas equal the unrolled geometric sum") {
    // dyadic eta/alpha and integer gradients make every operation exact,
    // so the recursion and the unrolled sum agree to the last bit
    const double eta = 0.25;
    const double alpha = 0.5;
    SplitMix64 rng(101);
    for (int seq = 0; seq < 10; ++seq) {
        std::vector<double> g(10);
        for (double& v : g) v = static_cast<double>(rng.below(17)) - 8.0;

        Tensor w = scalar(0.0);
        Tensor delta = scalar(0.0);
        for (int t = 0; t < 10; ++t) {
            apply_momentum(w, scalar(g[t]), delta, eta, alpha);
            double unrolled = 0.0;
            for (int k = 0; k <= t; ++k) {
                unrolled += std::pow(alpha, k) * g[t - k];
            }
            unrolled *= -eta;
            CHECK(delta.data[0] == unrolled);
        }
    }
}

TEST_CASE("unrolled sum also matches for general values") {
    const double eta = 0.07;
    const double alpha = 0.9;
    SplitMix64 rng(103);
    for (int seq = 0; seq < 10; ++seq) {
        std::vector<double> g(10);
        for (double& v : g) v = rng.uniform(-2.0, 2.0);

        Tensor w = scalar(0.0);
        Tensor delta = scalar(0.0);
        for (int t = 0; t < 10; ++t) {
            apply_momentum(w, scalar(g[t]), delta, eta, alpha);
            double unrolled = 0.0;
            for (int k = 0; k <= t; ++k) {
                unrolled += std::pow(alpha, k) * g[t - k];
            }
            unrolled *= -eta;
            CHECK(delta.data[0] == doctest::Approx(unrolled).epsilon(1e-14));
        }
    }
}

TEST_CASE("zero momentum weight reduces to plain descent bit for bit") {
    const NetworkSpec spec = NetworkSpec::tiny();
    SplitMix64 rng(107);
    ParamSet a = ParamSet::init(spec, rng);
    ParamSet b = a;
    Velocity vel = Velocity::zeros_for(b);

    for (int step = 0; step < 5; ++step) {
        const ParamGrads grads = random_grads(a, rng);
        sgd_step(a, grads, OptimizerConfig{0.037, 0.0, false});
        momentum_step(b, grads, vel, OptimizerConfig{0.037, 0.0, true});
    }
    auto ta = a.trainable();
    auto tb = b.trainable();
    for (std::size_t t = 0; t < ta.size(); ++t) {
        for (std::size_t i = 0; i < ta[t]->size(); ++i) {
            CHECK(ta[t]->data[i] == tb[t]->data[i]);
        }
    }
}

TEST_CASE("first step scales linearly with the gradient") {
    for (double c : {2.0, -3.0, 0.25}) {
        Tensor w1 = scalar(0.0), d1 = scalar(0.0);
        Tensor w2 = scalar(0.0), d2 = scalar(0.0);
        apply_momentum(w1, scalar(0.3), d1, 0.1, 0.8);
        apply_momentum(w2, scalar(0.3 * c), d2, 0.1, 0.8);
        CHECK(d2.data[0] == doctest::Approx(c * d1.data[0]).epsilon(1e-14));
    }
}

TEST_CASE("velocity buffers mirror the trainable tensors") {
    SplitMix64 rng(109);
    const ParamSet p = ParamSet::init(NetworkSpec::digits(), rng);
    const Velocity v = Velocity::zeros_for(p);
    auto t = p.trainable();
    REQUIRE(v.deltas.size() == t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(v.deltas[i].same_shape(*t[i]));
        for (double x : v.deltas[i].data) CHECK(x == 0.0);
    }
}

TEST_CASE("whole-set steps reject bad input") {
    SplitMix64 rng(113);
    ParamSet p = ParamSet::init(NetworkSpec::tiny(), rng);
    ParamGrads grads = random_grads(p, rng);

    CHECK_THROWS_AS(sgd_step(p, grads, OptimizerConfig{0.1, 0.0, true}), std::logic_error);
    CHECK_THROWS_AS(sgd_step(p, grads, OptimizerConfig{0.0, 0.0, false}),
                    std::invalid_argument);

    ParamGrads short_grads(grads.begin(), grads.end() - 1);
    CHECK_THROWS_AS(sgd_step(p, short_grads, OptimizerConfig{0.1, 0.0, false}),
                    std::invalid_argument);
    Velocity vel = Velocity::zeros_for(p);
    CHECK_THROWS_AS(momentum_step(p, short_grads, vel, OptimizerConfig{0.1, 0.5, true}),
                    std::invalid_argument);
}
