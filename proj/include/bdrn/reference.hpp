#pragma once

#include "bdrn/ops.hpp"

// Serial brute-force kernels. Kept as the oracle the OpenMP kernels are
// tested and benchmarked against; never used on the training path.

namespace bdrn::reference {

template <typename S>
Tensor<S> conv1d(const Tensor<S>& x, const ops::Conv1dParams<S>& p) {
    ops::check_conv_args(x, p);
    const int64_t B = x.dim(0), C = x.dim(1), L = x.dim(2);
    const int64_t F = p.weights.dim(0), K = p.weights.dim(2);
    const int d = p.dilation;
    const int64_t Lo = ops::conv1d_out_len<S>(L, K, d, p.padding);
    const int64_t off = p.padding == ops::Padding::SameZero ? -((K - 1) / 2) * d : 0;
    Tensor<S> y({B, F, Lo});
    for (int64_t b = 0; b < B; ++b)
        for (int64_t f = 0; f < F; ++f)
            for (int64_t i = 0; i < Lo; ++i) {
                S acc = p.bias[f];
                for (int64_t c = 0; c < C; ++c)
                    for (int64_t j = 0; j < K; ++j) {
                        const int64_t src = i + off + j * d;
                        if (src >= 0 && src < L) acc += p.weights.at3(f, c, j) * x.at3(b, c, src);
                    }
                y.at3(b, f, i) = acc;
            }
    return y;
}

template <typename S>
Tensor<S> dense(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b) {
    const int64_t B = x.dim(0), N = x.dim(1), M = w.dim(1);
    Tensor<S> y({B, M});
    for (int64_t r = 0; r < B; ++r)
        for (int64_t m = 0; m < M; ++m) {
            S acc = b[m];
            for (int64_t n = 0; n < N; ++n) acc += x.at2(r, n) * w.at2(n, m);
            y.at2(r, m) = acc;
        }
    return y;
}

}  // namespace bdrn::reference
