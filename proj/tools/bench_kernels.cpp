#include <benchmark/benchmark.h>

#include "glnn/layers.hpp"
#include "glnn/loss.hpp"
#include "glnn/rng.hpp"
#include "glnn/serial_ref.hpp"

// parallel kernels against their plain-loop references, digit-network sizes

namespace {

glnn::Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed, double lo,
                           double hi) {
    glnn::SplitMix64 rng(seed);
    glnn::Tensor t(std::move(shape));
    for (double& v : t.data) v = rng.uniform(lo, hi);
    return t;
}

struct ConvSetup {
    glnn::Tensor x = random_tensor({32, 1, 28, 28}, 1, 0.0, 1.0);
    glnn::Tensor w = random_tensor({20, 1, 5, 5}, 2, -0.3, 0.3);
    glnn::Tensor b = random_tensor({20}, 3, -0.1, 0.1);
    glnn::Tensor gout = random_tensor({32, 20, 24, 24}, 4, -1.0, 1.0);
};

struct DenseSetup {
    glnn::Tensor x = random_tensor({128, 11520}, 5, 0.0, 1.0);
    glnn::Tensor w = random_tensor({10, 11520}, 6, -0.05, 0.05);
    glnn::Tensor b = random_tensor({10}, 7, -0.1, 0.1);
};

glnn::LossBatch loss_setup() {
    glnn::SplitMix64 rng(8);
    glnn::Tensor y({512, 10});
    for (double& v : y.data) v = rng.uniform(0.01, 0.99);
    glnn::Tensor t({512, 10});
    for (std::size_t i = 0; i < 512; ++i) t.at(i, rng.below(10)) = 1.0;
    return glnn::LossBatch(std::move(y), std::move(t));
}

void BM_conv_forward_omp(benchmark::State& state) {
    const ConvSetup s;
    for (auto _ : state) {
        benchmark::DoNotOptimize(glnn::conv_forward(s.x, s.w, s.b));
    }
}
BENCHMARK(BM_conv_forward_omp);

void BM_conv_forward_serial(benchmark::State& state) {
    const ConvSetup s;
    for (auto _ : state) {
        benchmark::DoNotOptimize(glnn::serial::conv_forward(s.x, s.w, s.b));
    }
}
BENCHMARK(BM_conv_forward_serial);

void BM_conv_backward_omp(benchmark::State& state) {
    const ConvSetup s;
    for (auto _ : state) {
        benchmark::DoNotOptimize(glnn::conv_backward(s.gout, s.x, s.w));
    }
}
BENCHMARK(BM_conv_backward_omp);

void BM_conv_backward_serial(benchmark::State& state) {
    const ConvSetup s;
    for (auto _ : state) {
        benchmark::DoNotOptimize(glnn::serial::conv_backward(s.gout, s.x, s.w));
    }
}
BENCHMARK(BM_conv_backward_serial);

void BM_dense_forward_omp(benchmark::State& state) {
    const DenseSetup s;
    for (auto _ : state) {
        benchmark::DoNotOptimize(glnn::dense_forward(s.x, s.w, s.b));
    }
}
BENCHMARK(BM_dense_forward_omp);

void BM_dense_forward_serial(benchmark::State& state) {
    const DenseSetup s;
    for (auto _ : state) {
        benchmark::DoNotOptimize(glnn::serial::dense_forward(s.x, s.w, s.b));
    }
}
BENCHMARK(BM_dense_forward_serial);

void BM_proposed_loss_omp(benchmark::State& state) {
    const auto batch = loss_setup();
    for (auto _ : state) {
        benchmark::DoNotOptimize(glnn::batch_proposed_loss(batch));
    }
}
BENCHMARK(BM_proposed_loss_omp);

void BM_proposed_loss_serial(benchmark::State& state) {
    const auto batch = loss_setup();
    for (auto _ : state) {
        benchmark::DoNotOptimize(glnn::serial::batch_proposed_loss(batch));
    }
}
BENCHMARK(BM_proposed_loss_serial);

}  // namespace

BENCHMARK_MAIN();
