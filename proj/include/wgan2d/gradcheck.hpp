#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "wgan2d/tape.hpp"

namespace wgan2d {

/// Builds a scalar-valued graph from a single input node. The function may
/// capture whatever fixed tensors it needs (network weights, targets); only
/// the node passed in is treated as the variable.
using ScalarGraphFn = std::function<NodeId(Tape&, NodeId)>;

/// Compares the reverse-mode gradient of f at x against central finite
/// differences with step h, componentwise. Returns the maximum relative error
/// with denominator max(|analytic|, |numeric|, 1e-8); any non-finite
/// intermediate is reported as failure by returning +infinity.
inline double check_gradient(const ScalarGraphFn& f, const Tensor& x, double h)
{
    const auto eval = [&](const Tensor& point) -> double {
        Tape tape;
        const NodeId out = f(tape, tape.input(point));
        if (!tape.value(out).is_scalar())
            throw ShapeError("check_gradient: f must be scalar-valued");
        return tape.value(out)[0];
    };

    Tensor analytic;
    try {
        Tape tape;
        const NodeId xn = tape.input(x);
        const NodeId out = f(tape, xn);
        analytic = tape.gradient_values(out, {xn})[0];
    } catch (const NumericError&) {
        return std::numeric_limits<double>::infinity();
    }

    double max_rel = 0.0;
    for (std::size_t i = 0; i < x.numel(); ++i) {
        Tensor hi = x, lo = x;
        hi[i] += h;
        lo[i] -= h;
        double numeric;
        try {
            numeric = (eval(hi) - eval(lo)) / (2.0 * h);
        } catch (const NumericError&) {
            return std::numeric_limits<double>::infinity();
        }
        if (!std::isfinite(numeric) || !std::isfinite(analytic[i]))
            return std::numeric_limits<double>::infinity();
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
        max_rel = std::max(max_rel, std::abs(analytic[i] - numeric) / denom);
    }
    return max_rel;
}

} // namespace wgan2d
