#include "glnn/optimizer.hpp"

#include <stdexcept>

#include "glnn/constants.hpp"

namespace glnn {

OptimizerConfig OptimizerConfig::golden() {
    const auto c = GoldenConstants::compute();
    return OptimizerConfig{c.eta, c.alpha, true};
}

void OptimizerConfig::validate() const {
    if (!(eta > 0.0)) {
        throw std::invalid_argument("OptimizerConfig: eta must be positive");
    }
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("OptimizerConfig: alpha must lie in [0, 1)");
    }
}

Velocity Velocity::zeros_for(const ParamSet& params) {
    Velocity v;
    for (const Tensor* t : params.trainable()) {
        v.deltas.push_back(Tensor::zeros_like(*t));
    }
    return v;
}

void apply_sgd(Tensor& w, const Tensor& g, double eta) {
    require_same_shape(w, g, "apply_sgd");
    const std::int64_t n = static_cast<std::int64_t>(w.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        w.data[i] -= eta * g.data[i];
    }
}

void apply_momentum(Tensor& w, const Tensor& g, Tensor& delta, double eta, double alpha) {
    require_same_shape(w, g, "apply_momentum");
    require_same_shape(w, delta, "apply_momentum velocity");
    const std::int64_t n = static_cast<std::int64_t>(w.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        delta.data[i] = -eta * g.data[i] + alpha * delta.data[i];
        w.data[i] += delta.data[i];
    }
}

void sgd_step(ParamSet& params, const ParamGrads& grads, const OptimizerConfig& cfg) {
    cfg.validate();
    if (cfg.momentum_enabled) {
        throw std::logic_error("sgd_step: config has momentum enabled");
    }
    auto weights = params.trainable();
    if (grads.size() != weights.size()) {
        throw std::invalid_argument("sgd_step: gradient count does not match parameters");
    }
    for (std::size_t i = 0; i < weights.size(); ++i) {
        apply_sgd(*weights[i], grads[i], cfg.eta);
    }
}

void momentum_step(ParamSet& params, const ParamGrads& grads, Velocity& velocity,
                   const OptimizerConfig& cfg) {
    cfg.validate();
    auto weights = params.trainable();
    if (grads.size() != weights.size() || velocity.deltas.size() != weights.size()) {
        throw std::invalid_argument("momentum_step: gradient/velocity count mismatch");
    }
    for (std::size_t i = 0; i < weights.size(); ++i) {
        apply_momentum(*weights[i], grads[i], velocity.deltas[i], cfg.eta, cfg.alpha);
    }
}

}  // namespace glnn
