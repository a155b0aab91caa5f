#pragma once

#include "glnn/layers.hpp"
#include "glnn/tensor.hpp"

namespace glnn {

struct OptimizerConfig {
    double eta;
    double alpha = 0.0;
    bool momentum_enabled = false;

    // eta and alpha derived from the golden-ratio roots, momentum on
    static OptimizerConfig golden();

    // throws std::invalid_argument unless eta > 0 and alpha in [0, 1)
    void validate() const;
};

// Previous deltas, one buffer per trainable tensor, zeros before the first
// step. Owned by a single training loop alongside its ParamSet.
struct Velocity {
    std::vector<Tensor> deltas;

    static Velocity zeros_for(const ParamSet& params);
};

// w <- w - eta*g  on a single tensor
void apply_sgd(Tensor& w, const Tensor& g, double eta);

// delta <- -eta*g + alpha*delta; w <- w + delta
void apply_momentum(Tensor& w, const Tensor& g, Tensor& delta, double eta, double alpha);

// plain gradient descent over a whole ParamSet; cfg must have momentum off
void sgd_step(ParamSet& params, const ParamGrads& grads, const OptimizerConfig& cfg);

// momentum update over a whole ParamSet, velocity updated in lockstep
void momentum_step(ParamSet& params, const ParamGrads& grads, Velocity& velocity,
                   const OptimizerConfig& cfg);

}  // namespace glnn
