#pragma once

#include "glnn/layers.hpp"
#include "glnn/loss.hpp"
#include "glnn/tensor.hpp"

// Plain-loop reference versions of the parallel kernels. Deliberately naive:
// same arithmetic, same summation order, no pragmas. Tests pin the parallel
// kernels against these bit for bit, and the benchmark target measures the
// speedup over them.
namespace glnn::serial {

Tensor conv_forward(const Tensor& input, const Tensor& weights, const Tensor& biases);
ConvGrads conv_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weights);

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& biases);
DenseGrads dense_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weights);

Tensor softmax_forward(const Tensor& logits);

double batch_proposed_loss(const LossBatch& batch);

}  // namespace glnn::serial
