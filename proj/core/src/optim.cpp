#include "tsacap/optim.hpp"

#include <cmath>

#include "tsacap/errors.hpp"

namespace tsacap {

void sgd_step(ParamMap& params, const GradMap& grads, double learning_rate) {
    if (params.size() != grads.size())
        throw ShapeError("sgd_step: " + std::to_string(params.size()) + " parameters vs " +
                         std::to_string(grads.size()) + " gradients");
    for (auto& [name, value] : params) {
        auto it = grads.find(name);
        if (it == grads.end()) throw ShapeError("sgd_step: no gradient for parameter '" + name + "'");
        const Tensor& g = it->second;
        if (!value.same_shape(g))
            throw ShapeError("sgd_step: parameter '" + name + "' has shape " + shape_str(value.shape()) +
                             ", gradient " + shape_str(g.shape()));
        for (std::size_t i = 0; i < value.size(); ++i) value[i] -= learning_rate * g[i];
    }
}

double gradient_norm(const GradMap& grads) {
    double sq = 0.0;
    for (const auto& [name, g] : grads)
        for (double v : g.data()) sq += v * v;
    return std::sqrt(sq);
}

void clip_gradients(GradMap& grads, double max_norm) {
    const double norm = gradient_norm(grads);
    if (norm <= max_norm || norm == 0.0) return;
    const double scale = max_norm / norm;
    for (auto& [name, g] : grads)
        for (std::size_t i = 0; i < g.size(); ++i) g[i] *= scale;
}

GradMap finite_difference_gradient(const std::function<double(const ParamMap&)>& loss_fn,
                                   const ParamMap& params, double epsilon) {
    if (epsilon <= 0.0) throw NumericError("finite_difference_gradient: epsilon must be positive");
    ParamMap work = params;
    GradMap grads;
    for (const auto& [name, value] : params) {
        Tensor g(value.shape());
        Tensor& slot = work[name];
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double saved = slot[i];
            slot[i] = saved + epsilon;
            const double hi = loss_fn(work);
            slot[i] = saved - epsilon;
            const double lo = loss_fn(work);
            slot[i] = saved;
            if (!std::isfinite(hi) || !std::isfinite(lo))
                throw NumericError("finite_difference_gradient: loss not finite when perturbing '" + name +
                                   "' entry " + std::to_string(i));
            g[i] = (hi - lo) / (2.0 * epsilon);
        }
        grads[name] = std::move(g);
    }
    return grads;
}

double max_relative_error(const GradMap& a, const GradMap& b) {
    if (a.size() != b.size()) throw ShapeError("max_relative_error: parameter sets differ");
    double worst = 0.0;
    for (const auto& [name, ta] : a) {
        auto it = b.find(name);
        if (it == b.end()) throw ShapeError("max_relative_error: '" + name + "' missing from second map");
        const Tensor& tb = it->second;
        if (!ta.same_shape(tb)) throw ShapeError("max_relative_error: shape mismatch for '" + name + "'");
        for (std::size_t i = 0; i < ta.size(); ++i) {
            const double denom = std::max({std::abs(ta[i]), std::abs(tb[i]), 1e-8});
            worst = std::max(worst, std::abs(ta[i] - tb[i]) / denom);
        }
    }
    return worst;
}

Tensor glorot_uniform(Rng& rng, std::size_t rows, std::size_t cols) {
    const double r = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Tensor t({rows, cols});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-r, r);
    return t;
}

}  // namespace tsacap
