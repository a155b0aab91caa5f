#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "glnn/rng.hpp"
#include "glnn/tensor.hpp"

namespace glnn {

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;  // EMA factor for running stats

enum class Mode { train, infer };

// The layer stack is fixed in kind -- image input, one convolution, optional
// batch norm, relu, one dense layer, softmax -- but parametric in size so the
// same code runs the 28x28 digit network and the reduced gradient-check nets.
struct NetworkSpec {
    std::size_t input_h = 28;
    std::size_t input_w = 28;
    std::size_t input_c = 1;
    std::size_t conv_filters = 20;
    std::size_t conv_kernel = 5;
    bool batchnorm = true;
    std::size_t classes = 10;

    // 28x28x1 -> conv 20 5x5 -> batchnorm -> relu -> dense 10 -> softmax
    static NetworkSpec digits();
    // 6x6x1 -> conv 2 3x3 -> relu -> dense 3 -> softmax
    static NetworkSpec tiny();

    std::size_t conv_out_h() const { return input_h - conv_kernel + 1; }
    std::size_t conv_out_w() const { return input_w - conv_kernel + 1; }
    std::size_t dense_inputs() const { return conv_filters * conv_out_h() * conv_out_w(); }

    // fail fast if the layer shapes cannot chain
    void validate() const;
};

// All weights and biases of one network, plus batch-norm running statistics.
struct ParamSet {
    Tensor conv_w;   // {F, C, K, K}
    Tensor conv_b;   // {F}
    Tensor bn_gamma; // {F} (empty when the spec has no batchnorm)
    Tensor bn_beta;  // {F}
    Tensor fc_w;     // {classes, F*OH*OW}
    Tensor fc_b;     // {classes}

    Tensor bn_run_mean;  // {F}
    Tensor bn_run_var;   // {F}
    bool bn_ready = false;  // set once a training pass has produced batch stats

    // glorot-uniform weights, zero biases, gamma 1 / beta 0
    static ParamSet init(const NetworkSpec& spec, SplitMix64& rng);

    // trainable tensors in fixed order (running stats excluded)
    std::vector<Tensor*> trainable();
    std::vector<const Tensor*> trainable() const;
};

// gradients aligned with ParamSet::trainable()
using ParamGrads = std::vector<Tensor>;

// ---- individual layers ------------------------------------------------
// Forward passes take {N, C, H, W} activations; backward passes return exact
// gradients of the forward map. Inner loops parallelize with OpenMP over
// independent output elements, so results are bit-deterministic.

Tensor conv_forward(const Tensor& input, const Tensor& weights, const Tensor& biases);

struct ConvGrads {
    Tensor input;
    Tensor weights;
    Tensor biases;
};
ConvGrads conv_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weights);

struct BatchNormCache {
    Tensor x_hat;    // normalized input, same shape as input
    Tensor inv_std;  // {C}
};

struct BatchNormStats {
    Tensor* run_mean = nullptr;
    Tensor* run_var = nullptr;
    bool* ready = nullptr;
};

// train mode normalizes with batch statistics and folds them into the running
// stats; infer mode uses the running stats and requires a prior training pass
Tensor batchnorm_forward(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                         BatchNormStats stats, Mode mode, BatchNormCache* cache = nullptr);

struct BatchNormGrads {
    Tensor input;
    Tensor gamma;
    Tensor beta;
};
BatchNormGrads batchnorm_backward(const Tensor& grad_out, const Tensor& gamma,
                                  const BatchNormCache& cache);

Tensor relu_forward(const Tensor& input);
Tensor relu_backward(const Tensor& grad_out, const Tensor& cached_input);

// input {N, D}, weights {K, D}, biases {K} -> {N, K}
Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& biases);

struct DenseGrads {
    Tensor input;
    Tensor weights;
    Tensor biases;
};
DenseGrads dense_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weights);

// rowwise, stabilized by max subtraction; rows sum to 1
Tensor softmax_forward(const Tensor& logits);
Tensor softmax_backward(const Tensor& grad_out, const Tensor& probs);

// ---- whole network -----------------------------------------------------

struct ForwardCache {
    Tensor input;      // {N, C, H, W}
    Tensor conv_out;   // {N, F, OH, OW}
    Tensor bn_out;     // pre-relu activations actually fed to relu
    Tensor relu_flat;  // {N, F*OH*OW}
    Tensor probs;      // {N, classes}
    BatchNormCache bn;
};

// batch {N, C, H, W} of images normalized to [0, 1] -> rowwise probabilities.
// Train mode updates the running batch-norm statistics in `params`.
Tensor network_forward(const NetworkSpec& spec, ParamSet& params, const Tensor& batch,
                       Mode mode, ForwardCache* cache = nullptr);

// consumes the N x K loss gradient and returns gradients for every trainable
// parameter, aligned with ParamSet::trainable()
ParamGrads network_backward(const NetworkSpec& spec, const ParamSet& params,
                            const ForwardCache& cache, const Tensor& dloss_dy);

// ---- checkpoints ---------------------------------------------------------
// Versioned binary container: magic "GLNN", version u32 LE, then per entry
// name length u64 LE + UTF-8 name, rank u64 LE + dims u64 LE, f64 LE data.
// Round-trips bit-exactly.

void write_named_tensors(std::ostream& os,
                         const std::vector<std::pair<std::string, const Tensor*>>& entries);
std::vector<std::pair<std::string, Tensor>> read_named_tensors(std::istream& is);

void save_checkpoint(const std::string& path, const ParamSet& params);
ParamSet load_checkpoint(const std::string& path, const NetworkSpec& spec);

}  // namespace glnn
