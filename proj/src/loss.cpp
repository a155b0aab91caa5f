#include "glnn/loss.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace glnn {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

double clamp_angle(double d) {
    if (d < kAngleEps) return kAngleEps;
    if (d > kPi / 2.0 - kAngleEps) return kPi / 2.0 - kAngleEps;
    return d;
}

// derivative of L_I with respect to d (the bracket term of the chain rule)
double bracket(double d) {
    const double s = std::sin(d);
    const double c = std::cos(d);
    return s * s / c - c * c / s + s * std::log(s) - c * std::log(c);
}

double inner_sigmoid(double d) {
    const double shifted = information_loss(AngularDifference{d}) - information_loss_min();
    return 1.0 / (1.0 + std::exp(-shifted / kSqrt2));
}

void validate_batch(const Tensor& y, const Tensor& t, const char* where) {
    if (y.rank() != 2) {
        throw std::invalid_argument(std::string(where) + ": predictions must be N x K, got " +
                                    y.shape_str());
    }
    require_same_shape(y, t, where);
}

}  // namespace

AngularDifference AngularDifference::from_outputs(double y, double t) {
    if (!(y >= 0.0 && y <= 1.0) || !(t >= 0.0 && t <= 1.0)) {
        throw std::domain_error("angular_difference: inputs must lie in [0, 1]");
    }
    return AngularDifference{(y - t + 1.0) * kPi / 4.0};
}

AngularDifference AngularDifference::from_radians(double radians) {
    if (!(radians >= 0.0 && radians <= kPi / 2.0)) {
        throw std::domain_error("AngularDifference: radians must lie in [0, pi/2]");
    }
    return AngularDifference{radians};
}

double information_loss(AngularDifference d) {
    const double a = clamp_angle(d.d);
    const double s = std::sin(a);
    const double c = std::cos(a);
    return -(s * std::log(c) + c * std::log(s));
}

double information_loss_min() {
    return kSqrt2 * std::log(kSqrt2);
}

double sigmoid_loss(AngularDifference d) {
    return 1.0 / (1.0 + std::exp(-information_loss(d) / kSqrt2));
}

double proposed_loss(AngularDifference d) {
    const double s = inner_sigmoid(clamp_angle(d.d));
    return s * s;
}

double proposed_loss_grad(AngularDifference d) {
    const double a = clamp_angle(d.d);
    const double s = inner_sigmoid(a);
    return 2.0 * s * s * (1.0 - s) * (kPi / (4.0 * kSqrt2)) * bracket(a);
}

double sigmoid_loss_grad(AngularDifference d) {
    const double a = clamp_angle(d.d);
    const double l = sigmoid_loss(AngularDifference{a});
    return (kPi / (4.0 * kSqrt2)) * l * (1.0 - l) * bracket(a);
}

LossBatch::LossBatch(Tensor y, Tensor t)
    : predictions(std::move(y)), targets(std::move(t)) {
    validate_batch(predictions, targets, "LossBatch");
    const std::size_t n = predictions.shape[0];
    const std::size_t k = predictions.shape[1];
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t ones = 0;
        for (std::size_t j = 0; j < k; ++j) {
            const double tv = targets.at(i, j);
            if (tv == 1.0) {
                ++ones;
            } else if (tv != 0.0) {
                throw std::invalid_argument("LossBatch: targets must be one-hot");
            }
            const double yv = predictions.at(i, j);
            if (!(yv >= 0.0 && yv <= 1.0)) {
                throw std::invalid_argument("LossBatch: predictions must lie in [0, 1]");
            }
        }
        if (ones != 1) {
            throw std::invalid_argument("LossBatch: each target row needs exactly one 1");
        }
    }
}

double batch_proposed_loss(const LossBatch& batch) {
    const std::int64_t n = static_cast<std::int64_t>(batch.observations());
    const std::size_t k = batch.classes();
    std::vector<double> row_sums(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const auto d = AngularDifference::from_outputs(batch.predictions.at(i, j),
                                                           batch.targets.at(i, j));
            acc += proposed_loss(d);
        }
        row_sums[static_cast<std::size_t>(i)] = acc;
    }
    // fixed-order reduction keeps the result deterministic under threading
    double total = 0.0;
    for (double v : row_sums) total += v;
    return total / static_cast<double>(n);
}

Tensor batch_proposed_grad(const LossBatch& batch) {
    const std::int64_t n = static_cast<std::int64_t>(batch.observations());
    const std::size_t k = batch.classes();
    Tensor grad({static_cast<std::size_t>(n), k});
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const auto d = AngularDifference::from_outputs(batch.predictions.at(i, j),
                                                           batch.targets.at(i, j));
            grad.at(i, j) = proposed_loss_grad(d) / static_cast<double>(n);
        }
    }
    return grad;
}

double sse_loss(const LossBatch& batch) {
    const std::size_t n = batch.observations();
    double total = 0.0;
    for (std::size_t idx = 0; idx < batch.predictions.size(); ++idx) {
        const double diff = batch.predictions.data[idx] - batch.targets.data[idx];
        total += diff * diff;
    }
    return total / static_cast<double>(n);
}

Tensor sse_grad(const LossBatch& batch) {
    const std::size_t n = batch.observations();
    Tensor grad = Tensor::zeros_like(batch.predictions);
    for (std::size_t idx = 0; idx < grad.size(); ++idx) {
        grad.data[idx] =
            2.0 * (batch.predictions.data[idx] - batch.targets.data[idx]) / static_cast<double>(n);
    }
    return grad;
}

}  // namespace glnn
