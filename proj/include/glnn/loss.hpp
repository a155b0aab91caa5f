#pragma once

#include "glnn/tensor.hpp"

namespace glnn {

// angles are clamped to [kAngleEps, pi/2 - kAngleEps] before any log or
// division, bounding the loss near 1 and the gradient at a finite value
inline constexpr double kAngleEps = 1e-9;

// Angular encoding of the error between a network output y and a teaching
// input t, both in [0, 1]:
//   d = (y - t + 1) * pi/4,  d in [0, pi/2]
// d = pi/4 is the equilibrium (y == t); the end points are maximal error.
struct AngularDifference {
    double d;

    static AngularDifference from_outputs(double y, double t);
    static AngularDifference from_radians(double radians);
};

// information loss, symmetric about pi/4 and tending to +inf at the clamped
// boundaries:
//   L_I(d) = -( sin(d)*ln(cos(d)) + cos(d)*ln(sin(d)) )
double information_loss(AngularDifference d);

// analytic minimum of L_I, attained at d = pi/4: sqrt(2)*ln(sqrt(2))
double information_loss_min();

// sigmoid of the information loss scaled by the equilibrium signal 1/sqrt(2):
//   L(d) = 1 / (1 + exp(-L_I(d)/sqrt(2)))
double sigmoid_loss(AngularDifference d);

// the training loss: squared sigmoid of the min-shifted information loss,
//   Loss(d) = [ 1/(1 + exp(-(L_I(d) - min)/sqrt(2))) ]^2
// range [0.25, 1), minimum only at d = pi/4
double proposed_loss(AngularDifference d);

// dLoss/dy by the chain rule through d = (y - t + 1)*pi/4:
//   2*S * S*(1-S) * pi/(4*sqrt(2)) * B(d)
// where S is the inner sigmoid of Loss and
//   B(d) = sin^2(d)/cos(d) - cos^2(d)/sin(d)
//        + sin(d)*ln(sin(d)) - cos(d)*ln(cos(d))
double proposed_loss_grad(AngularDifference d);

// dL/dy of the unshifted sigmoid loss: pi/(4*sqrt(2)) * L*(1-L) * B(d)
double sigmoid_loss_grad(AngularDifference d);

// Predictions and one-hot targets for a batch, both N x K.
struct LossBatch {
    Tensor predictions;  // entries in [0, 1]
    Tensor targets;      // one-hot rows

    LossBatch(Tensor y, Tensor t);  // validates shapes and one-hot rows

    std::size_t observations() const { return predictions.shape[0]; }
    std::size_t classes() const { return predictions.shape[1]; }
};

// mean over observations, sum over classes, of the elementwise losses
double batch_proposed_loss(const LossBatch& batch);

// entry (n, k) = proposed_loss_grad(d_nk) / N
Tensor batch_proposed_grad(const LossBatch& batch);

// SSE baseline: (1/N) * sum_nk (Y - T)^2, and its gradient 2*(Y - T)/N
double sse_loss(const LossBatch& batch);
Tensor sse_grad(const LossBatch& batch);

}  // namespace glnn
