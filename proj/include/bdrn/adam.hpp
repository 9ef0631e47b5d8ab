#pragma once

#include "bdrn/tensor.hpp"

namespace bdrn {

template <typename S>
struct AdamState {
    Tensor<S> m;  // first moment
    Tensor<S> v;  // second moment, elementwise >= 0
    int64_t t = 0;

    explicit AdamState(const std::vector<int64_t>& shape) : m(shape), v(shape) {}
    AdamState() = default;
};

template <typename S>
struct AdamConfig {
    S lr = static_cast<S>(1e-3);
    S beta1 = static_cast<S>(0.9);
    S beta2 = static_cast<S>(0.999);
    S eps = static_cast<S>(1e-8);
};

template <typename S>
void adam_step(Tensor<S>& param, const Tensor<S>& grad, AdamState<S>& state,
               const AdamConfig<S>& cfg) {
    require_same_shape(param, grad, "adam_step");
    require_same_shape(param, state.m, "adam_step state");
    if (!(cfg.lr > S{0})) throw std::invalid_argument("adam_step: lr must be > 0");
    if (cfg.beta1 < S{0} || cfg.beta1 >= S{1} || cfg.beta2 < S{0} || cfg.beta2 >= S{1})
        throw std::invalid_argument("adam_step: betas must be in [0,1)");
    state.t += 1;
    const S bc1 = S{1} - static_cast<S>(std::pow(cfg.beta1, static_cast<double>(state.t)));
    const S bc2 = S{1} - static_cast<S>(std::pow(cfg.beta2, static_cast<double>(state.t)));
    for (int64_t i = 0; i < param.numel(); ++i) {
        const S g = grad[i];
        state.m[i] = cfg.beta1 * state.m[i] + (S{1} - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (S{1} - cfg.beta2) * g * g;
        const S m_hat = state.m[i] / bc1;
        const S v_hat = state.v[i] / bc2;
        param[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
}

}  // namespace bdrn
