#pragma once

#include <functional>

#include "tsacap/autodiff.hpp"
#include "tsacap/rng.hpp"
#include "tsacap/tensor.hpp"

namespace tsacap {

// theta <- theta - lr * grad, elementwise. Parameter and gradient maps must
// carry the same names and shapes.
void sgd_step(ParamMap& params, const GradMap& grads, double learning_rate);

double gradient_norm(const GradMap& grads);

// Scales all gradients by max_norm/norm when the global L2 norm exceeds
// max_norm. No-op otherwise.
void clip_gradients(GradMap& grads, double max_norm);

// Central finite differences, (f(x+eps) - f(x-eps)) / (2 eps) per scalar
// entry. The independent oracle used to check every reverse-mode gradient in
// the test and gradcheck suites; it never touches the reverse pass.
GradMap finite_difference_gradient(const std::function<double(const ParamMap&)>& loss_fn,
                                   const ParamMap& params, double epsilon);

// Max over parameters of max-entry relative error |a-b| / max(|a|,|b|,1e-8).
double max_relative_error(const GradMap& a, const GradMap& b);

// Uniform in [-r, r] with r = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(Rng& rng, std::size_t rows, std::size_t cols);

}  // namespace tsacap
