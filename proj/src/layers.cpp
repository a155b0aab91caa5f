#include "glnn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace glnn {

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* where) {
    if (t.rank() != rank) {
        throw std::invalid_argument(std::string(where) + ": expected rank " +
                                    std::to_string(rank) + ", got " + t.shape_str());
    }
}

// debug builds verify every stage stays finite on valid input
#ifndef NDEBUG
void assert_finite(const Tensor& t, const char* stage) {
    for (double v : t.data) {
        if (!std::isfinite(v)) {
            throw std::logic_error(std::string("non-finite value after ") + stage);
        }
    }
}
#define GLNN_ASSERT_FINITE(t, stage) assert_finite(t, stage)
#else
#define GLNN_ASSERT_FINITE(t, stage) ((void)0)
#endif

Tensor glorot_uniform(std::vector<std::size_t> shape, std::size_t fan_in,
                      std::size_t fan_out, SplitMix64& rng) {
    Tensor t(std::move(shape));
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : t.data) {
        v = rng.uniform(-limit, limit);
    }
    return t;
}

}  // namespace

NetworkSpec NetworkSpec::digits() {
    return NetworkSpec{};
}

NetworkSpec NetworkSpec::tiny() {
    NetworkSpec s;
    s.input_h = 6;
    s.input_w = 6;
    s.input_c = 1;
    s.conv_filters = 2;
    s.conv_kernel = 3;
    s.batchnorm = false;
    s.classes = 3;
    return s;
}

void NetworkSpec::validate() const {
    if (input_h == 0 || input_w == 0 || input_c == 0 || conv_filters == 0 ||
        conv_kernel == 0 || classes == 0) {
        throw std::invalid_argument("NetworkSpec: all dimensions must be positive");
    }
    if (conv_kernel > input_h || conv_kernel > input_w) {
        throw std::invalid_argument("NetworkSpec: kernel larger than input");
    }
}

ParamSet ParamSet::init(const NetworkSpec& spec, SplitMix64& rng) {
    spec.validate();
    ParamSet p;
    const std::size_t k = spec.conv_kernel;
    const std::size_t taps = spec.input_c * k * k;
    p.conv_w = glorot_uniform({spec.conv_filters, spec.input_c, k, k},
                              taps, spec.conv_filters * k * k, rng);
    p.conv_b = Tensor({spec.conv_filters});
    if (spec.batchnorm) {
        p.bn_gamma = Tensor({spec.conv_filters});
        std::fill(p.bn_gamma.data.begin(), p.bn_gamma.data.end(), 1.0);
        p.bn_beta = Tensor({spec.conv_filters});
        p.bn_run_mean = Tensor({spec.conv_filters});
        p.bn_run_var = Tensor({spec.conv_filters});
        std::fill(p.bn_run_var.data.begin(), p.bn_run_var.data.end(), 1.0);
    }
    p.fc_w = glorot_uniform({spec.classes, spec.dense_inputs()},
                            spec.dense_inputs(), spec.classes, rng);
    p.fc_b = Tensor({spec.classes});
    return p;
}

std::vector<Tensor*> ParamSet::trainable() {
    return {&conv_w, &conv_b, &bn_gamma, &bn_beta, &fc_w, &fc_b};
}

std::vector<const Tensor*> ParamSet::trainable() const {
    return {&conv_w, &conv_b, &bn_gamma, &bn_beta, &fc_w, &fc_b};
}

// ---- convolution (valid cross-correlation, stride 1, no padding) ----------

Tensor conv_forward(const Tensor& input, const Tensor& weights, const Tensor& biases) {
    require_rank(input, 4, "conv_forward input");
    require_rank(weights, 4, "conv_forward weights");
    const std::size_t n = input.shape[0], c = input.shape[1];
    const std::size_t h = input.shape[2], w = input.shape[3];
    const std::size_t f = weights.shape[0], k = weights.shape[2];
    if (weights.shape[1] != c || weights.shape[3] != k || biases.size() != f) {
        throw std::invalid_argument("conv_forward: weight/bias shapes do not match input");
    }
    if (k > h || k > w) {
        throw std::invalid_argument("conv_forward: kernel larger than input");
    }
    const std::size_t oh = h - k + 1, ow = w - k + 1;
    Tensor out({n, f, oh, ow});

#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t in = 0; in < static_cast<std::int64_t>(n); ++in) {
        for (std::int64_t fo = 0; fo < static_cast<std::int64_t>(f); ++fo) {
            const double bias = biases.data[fo];
            for (std::size_t y = 0; y < oh; ++y) {
                for (std::size_t x = 0; x < ow; ++x) {
                    double acc = bias;
                    for (std::size_t ci = 0; ci < c; ++ci) {
                        const double* in_base = &input.data[((in * c + ci) * h + y) * w + x];
                        const double* w_base = &weights.data[((fo * c + ci) * k) * k];
                        for (std::size_t ky = 0; ky < k; ++ky) {
                            const double* in_row = in_base + ky * w;
                            const double* w_row = w_base + ky * k;
                            for (std::size_t kx = 0; kx < k; ++kx) {
                                acc += in_row[kx] * w_row[kx];
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
    require_rank(grad_out, 4, "conv_backward grad_out");
    const std::size_t n = input.shape[0], c = input.shape[1];
    const std::size_t h = input.shape[2], w = input.shape[3];
    const std::size_t f = weights.shape[0], k = weights.shape[2];
    const std::size_t oh = h - k + 1, ow = w - k + 1;
    if (grad_out.shape != std::vector<std::size_t>{n, f, oh, ow}) {
        throw std::invalid_argument("conv_backward: grad_out shape mismatch " +
                                    grad_out.shape_str());
    }

    ConvGrads g;
    g.input = Tensor::zeros_like(input);
    g.weights = Tensor::zeros_like(weights);
    g.biases = Tensor({f});

    // weight gradients: one parallel task per filter tap, summed over the
    // batch in a fixed order
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t fo = 0; fo < static_cast<std::int64_t>(f); ++fo) {
        for (std::int64_t ci = 0; ci < static_cast<std::int64_t>(c); ++ci) {
            for (std::size_t ky = 0; ky < k; ++ky) {
                for (std::size_t kx = 0; kx < k; ++kx) {
                    double acc = 0.0;
                    for (std::size_t in = 0; in < n; ++in) {
                        for (std::size_t y = 0; y < oh; ++y) {
                            const double* go_row = &grad_out.data[((in * f + fo) * oh + y) * ow];
                            const double* in_row =
                                &input.data[((in * c + ci) * h + y + ky) * w + kx];
                            for (std::size_t x = 0; x < ow; ++x) {
                                acc += go_row[x] * in_row[x];
                            }
                        }
                    }
                    g.weights.data[((fo * c + ci) * k + ky) * k + kx] = acc;
                }
            }
        }
    }

#pragma omp parallel for schedule(static)
    for (std::int64_t fo = 0; fo < static_cast<std::int64_t>(f); ++fo) {
        double acc = 0.0;
        for (std::size_t in = 0; in < n; ++in) {
            const double* go = &grad_out.data[(in * f + fo) * oh * ow];
            for (std::size_t i = 0; i < oh * ow; ++i) {
                acc += go[i];
            }
        }
        g.biases.data[fo] = acc;
    }

    // input gradients: full correlation of grad_out with the flipped kernel
#pragma omp parallel for schedule(static)
    for (std::int64_t in = 0; in < static_cast<std::int64_t>(n); ++in) {
        for (std::size_t ci = 0; ci < c; ++ci) {
            double* gi = &g.input.data[(in * c + ci) * h * w];
            for (std::size_t fo = 0; fo < f; ++fo) {
                const double* go = &grad_out.data[(in * f + fo) * oh * ow];
                const double* wt = &weights.data[(fo * c + ci) * k * k];
                for (std::size_t y = 0; y < oh; ++y) {
                    for (std::size_t x = 0; x < ow; ++x) {
                        const double gv = go[y * ow + x];
                        for (std::size_t ky = 0; ky < k; ++ky) {
                            double* gi_row = gi + (y + ky) * w + x;
                            const double* w_row = wt + ky * k;
                            for (std::size_t kx = 0; kx < k; ++kx) {
                                gi_row[kx] += gv * w_row[kx];
                            }
                        }
                    }
                }
            }
        }
    }
    return g;
}

// ---- batch normalization ---------------------------------------------------

Tensor batchnorm_forward(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                         BatchNormStats stats, Mode mode, BatchNormCache* cache) {
    require_rank(input, 4, "batchnorm_forward input");
    const std::size_t n = input.shape[0], c = input.shape[1];
    const std::size_t spatial = input.shape[2] * input.shape[3];
    if (gamma.size() != c || beta.size() != c) {
        throw std::invalid_argument("batchnorm_forward: gamma/beta must have one entry per channel");
    }
    if (mode == Mode::infer && (stats.ready == nullptr || !*stats.ready)) {
        throw std::logic_error("batchnorm_forward: infer mode before any training step");
    }

    const double m = static_cast<double>(n * spatial);
    Tensor out = Tensor::zeros_like(input);
    Tensor x_hat = Tensor::zeros_like(input);
    Tensor inv_std({c});

#pragma omp parallel for schedule(static)
    for (std::int64_t ch = 0; ch < static_cast<std::int64_t>(c); ++ch) {
        double mean, var;
        if (mode == Mode::train) {
            double sum = 0.0;
            for (std::size_t in = 0; in < n; ++in) {
                const double* p = &input.data[(in * c + ch) * spatial];
                for (std::size_t i = 0; i < spatial; ++i) sum += p[i];
            }
            mean = sum / m;
            double sq = 0.0;
            for (std::size_t in = 0; in < n; ++in) {
                const double* p = &input.data[(in * c + ch) * spatial];
                for (std::size_t i = 0; i < spatial; ++i) {
                    const double dlt = p[i] - mean;
                    sq += dlt * dlt;
                }
            }
            var = sq / m;
            if (stats.run_mean != nullptr) {
                double& rm = stats.run_mean->data[ch];
                double& rv = stats.run_var->data[ch];
                rm = (1.0 - kBatchNormMomentum) * rm + kBatchNormMomentum * mean;
                rv = (1.0 - kBatchNormMomentum) * rv + kBatchNormMomentum * var;
            }
        } else {
            mean = stats.run_mean->data[ch];
            var = stats.run_var->data[ch];
        }
        const double is = 1.0 / std::sqrt(var + kBatchNormEps);
        inv_std.data[ch] = is;
        const double g = gamma.data[ch], b = beta.data[ch];
        for (std::size_t in = 0; in < n; ++in) {
            const double* p = &input.data[(in * c + ch) * spatial];
            double* xh = &x_hat.data[(in * c + ch) * spatial];
            double* o = &out.data[(in * c + ch) * spatial];
            for (std::size_t i = 0; i < spatial; ++i) {
                xh[i] = (p[i] - mean) * is;
                o[i] = g * xh[i] + b;
            }
        }
    }

    if (mode == Mode::train && stats.ready != nullptr) {
        *stats.ready = true;
    }
    if (cache != nullptr) {
        cache->x_hat = std::move(x_hat);
        cache->inv_std = std::move(inv_std);
    }
    return out;
}

BatchNormGrads batchnorm_backward(const Tensor& grad_out, const Tensor& gamma,
                                  const BatchNormCache& cache) {
    require_same_shape(grad_out, cache.x_hat, "batchnorm_backward");
    const std::size_t n = grad_out.shape[0], c = grad_out.shape[1];
    const std::size_t spatial = grad_out.shape[2] * grad_out.shape[3];
    const double m = static_cast<double>(n * spatial);

    BatchNormGrads g;
    g.input = Tensor::zeros_like(grad_out);
    g.gamma = Tensor({c});
    g.beta = Tensor({c});

#pragma omp parallel for schedule(static)
    for (std::int64_t ch = 0; ch < static_cast<std::int64_t>(c); ++ch) {
        double sum_g = 0.0, sum_gx = 0.0;
        for (std::size_t in = 0; in < n; ++in) {
            const double* go = &grad_out.data[(in * c + ch) * spatial];
            const double* xh = &cache.x_hat.data[(in * c + ch) * spatial];
            for (std::size_t i = 0; i < spatial; ++i) {
                sum_g += go[i];
                sum_gx += go[i] * xh[i];
            }
        }
        g.beta.data[ch] = sum_g;
        g.gamma.data[ch] = sum_gx;

        // dx = gamma*inv_std/m * (m*g - sum(g) - x_hat*sum(g*x_hat))
        const double scale = gamma.data[ch] * cache.inv_std.data[ch] / m;
        for (std::size_t in = 0; in < n; ++in) {
            const double* go = &grad_out.data[(in * c + ch) * spatial];
            const double* xh = &cache.x_hat.data[(in * c + ch) * spatial];
            double* gi = &g.input.data[(in * c + ch) * spatial];
            for (std::size_t i = 0; i < spatial; ++i) {
                gi[i] = scale * (m * go[i] - sum_g - xh[i] * sum_gx);
            }
        }
    }
    return g;
}

// ---- relu / dense / softmax -----------------------------------------------

Tensor relu_forward(const Tensor& input) {
    Tensor out = input;
    for (double& v : out.data) {
        if (v < 0.0) v = 0.0;
    }
    return out;
}

Tensor relu_backward(const Tensor& grad_out, const Tensor& cached_input) {
    require_same_shape(grad_out, cached_input, "relu_backward");
    Tensor g = grad_out;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (cached_input.data[i] <= 0.0) g.data[i] = 0.0;
    }
    return g;
}

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& biases) {
    require_rank(input, 2, "dense_forward input");
    require_rank(weights, 2, "dense_forward weights");
    const std::size_t n = input.shape[0], d = input.shape[1];
    const std::size_t k = weights.shape[0];
    if (weights.shape[1] != d || biases.size() != k) {
        throw std::invalid_argument("dense_forward: weight/bias shapes do not match input");
    }
    Tensor out({n, k});
#pragma omp parallel for schedule(static)
    for (std::int64_t in = 0; in < static_cast<std::int64_t>(n); ++in) {
        const double* x = &input.data[in * d];
        for (std::size_t j = 0; j < k; ++j) {
            const double* wr = &weights.data[j * d];
            double acc = biases.data[j];
            for (std::size_t i = 0; i < d; ++i) {
                acc += wr[i] * x[i];
            }
            out.data[in * k + j] = acc;
        }
    }
    return out;
}

DenseGrads dense_backward(const Tensor& grad_out, const Tensor& input, const Tensor& weights) {
    const std::size_t n = input.shape[0], d = input.shape[1];
    const std::size_t k = weights.shape[0];
    if (grad_out.shape != std::vector<std::size_t>{n, k}) {
        throw std::invalid_argument("dense_backward: grad_out shape mismatch " +
                                    grad_out.shape_str());
    }
    DenseGrads g;
    g.input = Tensor({n, d});
    g.weights = Tensor({k, d});
    g.biases = Tensor({k});

#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < static_cast<std::int64_t>(k); ++j) {
        double* gw = &g.weights.data[j * d];
        double gb = 0.0;
        for (std::size_t in = 0; in < n; ++in) {
            const double gv = grad_out.data[in * k + j];
            gb += gv;
            const double* x = &input.data[in * d];
            for (std::size_t i = 0; i < d; ++i) {
                gw[i] += gv * x[i];
            }
        }
        g.biases.data[j] = gb;
    }

#pragma omp parallel for schedule(static)
    for (std::int64_t in = 0; in < static_cast<std::int64_t>(n); ++in) {
        double* gi = &g.input.data[in * d];
        for (std::size_t j = 0; j < k; ++j) {
            const double gv = grad_out.data[in * k + j];
            const double* wr = &weights.data[j * d];
            for (std::size_t i = 0; i < d; ++i) {
                gi[i] += gv * wr[i];
            }
        }
    }
    return g;
}

Tensor softmax_forward(const Tensor& logits) {
    require_rank(logits, 2, "softmax_forward");
    const std::size_t n = logits.shape[0], k = logits.shape[1];
    Tensor out({n, k});
#pragma omp parallel for schedule(static)
    for (std::int64_t in = 0; in < static_cast<std::int64_t>(n); ++in) {
        const double* z = &logits.data[in * k];
        double* y = &out.data[in * k];
        double mx = z[0];
        for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, z[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            y[j] = std::exp(z[j] - mx);
            sum += y[j];
        }
        for (std::size_t j = 0; j < k; ++j) y[j] /= sum;
    }
    return out;
}

Tensor softmax_backward(const Tensor& grad_out, const Tensor& probs) {
    require_same_shape(grad_out, probs, "softmax_backward");
    const std::size_t n = probs.shape[0], k = probs.shape[1];
    Tensor g({n, k});
#pragma omp parallel for schedule(static)
    for (std::int64_t in = 0; in < static_cast<std::int64_t>(n); ++in) {
        const double* go = &grad_out.data[in * k];
        const double* y = &probs.data[in * k];
        double dot = 0.0;
        for (std::size_t j = 0; j < k; ++j) dot += go[j] * y[j];
        for (std::size_t j = 0; j < k; ++j) {
            g.data[in * k + j] = y[j] * (go[j] - dot);
        }
    }
    return g;
}

// ---- whole network ----------------------------------------------------------

Tensor network_forward(const NetworkSpec& spec, ParamSet& params, const Tensor& batch,
                       Mode mode, ForwardCache* cache) {
    spec.validate();
    require_rank(batch, 4, "network_forward batch");
    if (batch.shape[1] != spec.input_c || batch.shape[2] != spec.input_h ||
        batch.shape[3] != spec.input_w) {
        throw std::invalid_argument("network_forward: batch shape " + batch.shape_str() +
                                    " does not match the network input");
    }

    Tensor conv_out = conv_forward(batch, params.conv_w, params.conv_b);
    GLNN_ASSERT_FINITE(conv_out, "conv");
    Tensor pre_relu;
    BatchNormCache bn_cache;
    if (spec.batchnorm) {
        BatchNormStats stats{&params.bn_run_mean, &params.bn_run_var, &params.bn_ready};
        pre_relu = batchnorm_forward(conv_out, params.bn_gamma, params.bn_beta, stats, mode,
                                     cache != nullptr ? &bn_cache : nullptr);
        GLNN_ASSERT_FINITE(pre_relu, "batchnorm");
    } else {
        pre_relu = conv_out;
    }
    Tensor relu_out = relu_forward(pre_relu);
    Tensor flat = relu_out;
    flat.reshape({batch.shape[0], spec.dense_inputs()});
    Tensor logits = dense_forward(flat, params.fc_w, params.fc_b);
    GLNN_ASSERT_FINITE(logits, "dense");
    Tensor probs = softmax_forward(logits);
    GLNN_ASSERT_FINITE(probs, "softmax");

    if (cache != nullptr) {
        cache->input = batch;
        cache->conv_out = std::move(conv_out);
        cache->bn_out = std::move(pre_relu);
        cache->relu_flat = std::move(flat);
        cache->probs = probs;
        cache->bn = std::move(bn_cache);
    }
    return probs;
}

ParamGrads network_backward(const NetworkSpec& spec, const ParamSet& params,
                            const ForwardCache& cache, const Tensor& dloss_dy) {
    Tensor dlogits = softmax_backward(dloss_dy, cache.probs);
    DenseGrads dg = dense_backward(dlogits, cache.relu_flat, params.fc_w);

    Tensor drelu = dg.input;
    drelu.reshape(cache.bn_out.shape);
    Tensor dpre = relu_backward(drelu, cache.bn_out);

    Tensor dconv_out;
    Tensor dgamma, dbeta;
    if (spec.batchnorm) {
        BatchNormGrads bg = batchnorm_backward(dpre, params.bn_gamma, cache.bn);
        dconv_out = std::move(bg.input);
        dgamma = std::move(bg.gamma);
        dbeta = std::move(bg.beta);
    } else {
        dconv_out = std::move(dpre);
    }
    ConvGrads cg = conv_backward(dconv_out, cache.input, params.conv_w);

    ParamGrads grads;
    grads.push_back(std::move(cg.weights));
    grads.push_back(std::move(cg.biases));
    grads.push_back(std::move(dgamma));
    grads.push_back(std::move(dbeta));
    grads.push_back(std::move(dg.weights));
    grads.push_back(std::move(dg.biases));
    return grads;
}

// ---- checkpoints --------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'G', 'L', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(os, bits);
}

bool get_u64(std::istream& is, std::uint64_t& v) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) return false;
    v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return true;
}

std::uint64_t need_u64(std::istream& is, const char* what) {
    std::uint64_t v;
    if (!get_u64(is, v)) {
        throw std::runtime_error(std::string("checkpoint: truncated reading ") + what);
    }
    return v;
}

}  // namespace

void write_named_tensors(std::ostream& os,
                         const std::vector<std::pair<std::string, const Tensor*>>& entries) {
    os.write(kMagic, 4);
    put_u32(os, kVersion);
    for (const auto& [name, t] : entries) {
        put_u64(os, name.size());
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u64(os, t->rank());
        for (std::size_t d : t->shape) put_u64(os, d);
        for (double v : t->data) put_f64(os, v);
    }
}

std::vector<std::pair<std::string, Tensor>> read_named_tensors(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("checkpoint: bad magic");
    }
    unsigned char vb[4];
    if (!is.read(reinterpret_cast<char*>(vb), 4)) {
        throw std::runtime_error("checkpoint: truncated version");
    }
    std::uint32_t version = 0;
    for (int i = 3; i >= 0; --i) version = (version << 8) | vb[i];
    if (version != kVersion) {
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    }

    std::vector<std::pair<std::string, Tensor>> entries;
    for (;;) {
        std::uint64_t name_len;
        if (!get_u64(is, name_len)) break;  // clean EOF
        std::string name(name_len, '\0');
        if (!is.read(name.data(), static_cast<std::streamsize>(name_len))) {
            throw std::runtime_error("checkpoint: truncated name");
        }
        const std::uint64_t rank = need_u64(is, "rank");
        std::vector<std::size_t> dims(rank);
        for (auto& d : dims) d = need_u64(is, "dims");
        Tensor t(dims);
        for (double& v : t.data) {
            std::uint64_t bits = need_u64(is, "data");
            std::memcpy(&v, &bits, 8);
        }
        entries.emplace_back(std::move(name), std::move(t));
    }
    return entries;
}

void save_checkpoint(const std::string& path, const ParamSet& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    }
    std::vector<std::pair<std::string, const Tensor*>> entries = {
        {"conv.w", &params.conv_w}, {"conv.b", &params.conv_b},
        {"fc.w", &params.fc_w},     {"fc.b", &params.fc_b},
    };
    if (params.bn_gamma.size() > 0) {
        entries.push_back({"bn.gamma", &params.bn_gamma});
        entries.push_back({"bn.beta", &params.bn_beta});
        if (params.bn_ready) {
            entries.push_back({"bn.run_mean", &params.bn_run_mean});
            entries.push_back({"bn.run_var", &params.bn_run_var});
        }
    }
    write_named_tensors(os, entries);
    if (!os) {
        throw std::runtime_error("checkpoint: write failed for " + path);
    }
}

ParamSet load_checkpoint(const std::string& path, const NetworkSpec& spec) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw std::runtime_error("checkpoint: cannot open " + path);
    }
    auto entries = read_named_tensors(is);
    SplitMix64 dummy(0);
    ParamSet p = ParamSet::init(spec, dummy);
    p.bn_ready = false;
    auto take = [&](const std::string& name, Tensor& dst, bool required) {
        for (auto& [n, t] : entries) {
            if (n == name) {
                if (!t.same_shape(dst)) {
                    throw std::runtime_error("checkpoint: " + name + " has shape " +
                                             t.shape_str() + ", expected " + dst.shape_str());
                }
                dst = std::move(t);
                return true;
            }
        }
        if (required) {
            throw std::runtime_error("checkpoint: missing entry " + name);
        }
        return false;
    };
    take("conv.w", p.conv_w, true);
    take("conv.b", p.conv_b, true);
    take("fc.w", p.fc_w, true);
    take("fc.b", p.fc_b, true);
    if (spec.batchnorm) {
        take("bn.gamma", p.bn_gamma, true);
        take("bn.beta", p.bn_beta, true);
        const bool has_mean = take("bn.run_mean", p.bn_run_mean, false);
        const bool has_var = take("bn.run_var", p.bn_run_var, false);
        p.bn_ready = has_mean && has_var;
    }
    return p;
}

}  // namespace glnn
