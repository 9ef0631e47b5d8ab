#pragma once

#include <functional>
#include <vector>

#include "bdrn/tensor.hpp"

namespace bdrn {

/// Central finite differences against an analytic gradient, double precision.
/// `scalar_fn` maps the inputs to one scalar; `analytic` holds d(scalar)/d(input_k)
/// for each input. Returns the max over all coordinates of
/// |a - f| / max(|a|, |f|, 1e-8).
inline double grad_check(
    const std::function<double(const std::vector<TensorD>&)>& scalar_fn,
    std::vector<TensorD> inputs, const std::vector<TensorD>& analytic,
    double fd_eps = 1e-5) {
    if (fd_eps < 1e-7 || fd_eps > 1e-3)
        throw std::invalid_argument("grad_check: fd_eps out of [1e-7, 1e-3]");
    if (analytic.size() != inputs.size())
        throw std::invalid_argument("grad_check: one analytic gradient per input required");
    double worst = 0.0;
    for (size_t k = 0; k < inputs.size(); ++k) {
        require_same_shape(inputs[k], analytic[k], "grad_check");
        for (int64_t i = 0; i < inputs[k].numel(); ++i) {
            const double orig = inputs[k][i];
            inputs[k][i] = orig + fd_eps;
            const double up = scalar_fn(inputs);
            inputs[k][i] = orig - fd_eps;
            const double down = scalar_fn(inputs);
            inputs[k][i] = orig;
            if (!std::isfinite(up) || !std::isfinite(down))
                throw std::runtime_error("grad_check: non-finite output from op");
            const double fd = (up - down) / (2.0 * fd_eps);
            const double a = analytic[k][i];
            const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-8});
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

}  // namespace bdrn
