#include "glnn/serial_ref.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace glnn::serial {

Tensor conv_forward(const Tensor& input, const Tensor& weights, const Tensor& biases) {
    const std::size_t n = input.shape[0], c = input.shape[1];
    const std::size_t h = input.shape[2], w = input.shape[3];
    const std::size_t f = weights.shape[0], k = weights.shape[2];
    const std::size_t oh = h - k + 1, ow = w - k + 1;
    Tensor out({n, f, oh, ow});
    for (std::size_t in = 0; in < n; ++in) {
        for (std::size_t fo = 0; fo < f; ++fo) {
            for (std::size_t y = 0; y < oh; ++y) {
                for (std::size_t x = 0; x < ow; ++x) {
                    double acc = biases.data[fo];
                    for (std::size_t ci = 0; ci < c; ++ci) {
                        for (std::size_t ky = 0; ky < k; ++ky) {
                            for (std::size_t kx = 0; kx < k; ++kx) {
                                acc += input.data[((in * c + ci) * h + y + ky) * w + x + kx] *
                                       weights.data[((fo * c + ci) * k + ky) * k + kx];
                            }
                        }
                    }
                    out.data[((in * f + fo) * oh + y) * ow + x] = acc;
                }
            }
        }
    }
    return out;
}

ConvGrads conv_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weights) {
    const std::size_t n = input.shape[0], c = input.shape[1];
    const std::size_t h = input.shape[2], w = input.shape[3];
    const std::size_t f = weights.shape[0], k = weights.shape[2];
    const std::size_t oh = h - k + 1, ow = w - k + 1;

    ConvGrads g;
    g.input = Tensor::zeros_like(input);
    g.weights = Tensor::zeros_like(weights);
    g.biases = Tensor({f});

    for (std::size_t fo = 0; fo < f; ++fo) {
        for (std::size_t ci = 0; ci < c; ++ci) {
            for (std::size_t ky = 0; ky < k; ++ky) {
                for (std::size_t kx = 0; kx < k; ++kx) {
                    double acc = 0.0;
                    for (std::size_t in = 0; in < n; ++in) {
                        for (std::size_t y = 0; y < oh; ++y) {
                            for (std::size_t x = 0; x < ow; ++x) {
                                acc += grad_out.data[((in * f + fo) * oh + y) * ow + x] *
                                       input.data[((in * c + ci) * h + y + ky) * w + x + kx];
                            }
                        }
                    }
                    g.weights.data[((fo * c + ci) * k + ky) * k + kx] = acc;
                }
            }
        }
    }

    for (std::size_t fo = 0; fo < f; ++fo) {
        double acc = 0.0;
        for (std::size_t in = 0; in < n; ++in) {
            for (std::size_t i = 0; i < oh * ow; ++i) {
                acc += grad_out.data[(in * f + fo) * oh * ow + i];
            }
        }
        g.biases.data[fo] = acc;
    }

    for (std::size_t in = 0; in < n; ++in) {
        for (std::size_t ci = 0; ci < c; ++ci) {
            for (std::size_t fo = 0; fo < f; ++fo) {
                for (std::size_t y = 0; y < oh; ++y) {
                    for (std::size_t x = 0; x < ow; ++x) {
                        const double gv = grad_out.data[((in * f + fo) * oh + y) * ow + x];
                        for (std::size_t ky = 0; ky < k; ++ky) {
                            for (std::size_t kx = 0; kx < k; ++kx) {
                                g.input.data[((in * c + ci) * h + y + ky) * w + x + kx] +=
                                    gv * weights.data[((fo * c + ci) * k + ky) * k + kx];
                            }
                        }
                    }
                }
            }
        }
    }
    return g;
}

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& biases) {
    const std::size_t n = input.shape[0], d = input.shape[1];
    const std::size_t k = weights.shape[0];
    Tensor out({n, k});
    for (std::size_t in = 0; in < n; ++in) {
        for (std::size_t j = 0; j < k; ++j) {
            double acc = biases.data[j];
            for (std::size_t i = 0; i < d; ++i) {
                acc += weights.data[j * d + i] * input.data[in * d + i];
            }
            out.data[in * k + j] = acc;
        }
    }
    return out;
}

DenseGrads dense_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weights) {
    const std::size_t n = input.shape[0], d = input.shape[1];
    const std::size_t k = weights.shape[0];
    DenseGrads g;
    g.input = Tensor({n, d});
    g.weights = Tensor({k, d});
    g.biases = Tensor({k});

    for (std::size_t j = 0; j < k; ++j) {
        double gb = 0.0;
        for (std::size_t in = 0; in < n; ++in) {
            const double gv = grad_out.data[in * k + j];
            gb += gv;
            for (std::size_t i = 0; i < d; ++i) {
                g.weights.data[j * d + i] += gv * input.data[in * d + i];
            }
        }
        g.biases.data[j] = gb;
    }

    for (std::size_t in = 0; in < n; ++in) {
        for (std::size_t j = 0; j < k; ++j) {
            const double gv = grad_out.data[in * k + j];
            for (std::size_t i = 0; i < d; ++i) {
                g.input.data[in * d + i] += gv * weights.data[j * d + i];
            }
        }
    }
    return g;
}

Tensor softmax_forward(const Tensor& logits) {
    const std::size_t n = logits.shape[0], k = logits.shape[1];
    Tensor out({n, k});
    for (std::size_t in = 0; in < n; ++in) {
        double mx = logits.data[in * k];
        for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, logits.data[in * k + j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            out.data[in * k + j] = std::exp(logits.data[in * k + j] - mx);
            sum += out.data[in * k + j];
        }
        for (std::size_t j = 0; j < k; ++j) out.data[in * k + j] /= sum;
    }
    return out;
}

double batch_proposed_loss(const LossBatch& batch) {
    const std::size_t n = batch.observations();
    const std::size_t k = batch.classes();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const auto d = AngularDifference::from_outputs(batch.predictions.at(i, j),
                                                           batch.targets.at(i, j));
            acc += proposed_loss(d);
        }
        total += acc;
    }
    return total / static_cast<double>(n);
}

}  // namespace glnn::serial
