#pragma once

#include <omp.h>

#include <optional>
#include <stdexcept>

#include "bdrn/rng.hpp"
#include "bdrn/runtime.hpp"
#include "bdrn/tensor.hpp"

// Layer primitives: forward evaluation plus hand-derived analytic gradients.
// Hot loops are OpenMP-parallel over independent output slices only, so
// results are identical at any worker count; see reference.hpp for the
// serial kernels the tests compare against.

namespace bdrn::ops {

enum class Padding { SameZero, Valid };

template <typename S>
struct Conv1dParams {
    Tensor<S> weights;  // [F, C, K]
    Tensor<S> bias;     // [F]
    int dilation = 1;
    Padding padding = Padding::SameZero;
};

template <typename S>
inline void check_conv_args(const Tensor<S>& x, const Conv1dParams<S>& p) {
    if (x.rank() != 3) throw std::invalid_argument("conv1d: input must be [B,C,L]");
    if (p.weights.rank() != 3) throw std::invalid_argument("conv1d: weights must be [F,C,K]");
    if (p.dilation < 1) throw std::invalid_argument("conv1d: dilation must be >= 1");
    if (x.dim(1) != p.weights.dim(1))
        throw std::invalid_argument("conv1d: input channels " + std::to_string(x.dim(1)) +
                                    " != weight channels " + std::to_string(p.weights.dim(1)));
    if (p.bias.numel() != p.weights.dim(0))
        throw std::invalid_argument("conv1d: bias length != filter count");
    const int64_t K = p.weights.dim(2);
    if (p.padding == Padding::SameZero && K % 2 == 0)
        throw std::invalid_argument("conv1d: same-zero padding requires odd kernel length");
    if (p.padding == Padding::Valid && x.dim(2) - (K - 1) * p.dilation <= 0)
        throw std::invalid_argument("conv1d: valid-mode output length <= 0");
}

template <typename S>
inline int64_t conv1d_out_len(int64_t L, int64_t K, int d, Padding pad) {
    return pad == Padding::SameZero ? L : L - (K - 1) * d;
}

template <typename S>
Tensor<S> conv1d(const Tensor<S>& x, const Conv1dParams<S>& p) {
    check_conv_args(x, p);
    const int64_t B = x.dim(0), C = x.dim(1), L = x.dim(2);
    const int64_t F = p.weights.dim(0), K = p.weights.dim(2);
    const int d = p.dilation;
    const int64_t Lo = conv1d_out_len<S>(L, K, d, p.padding);
    // Centered taps for same-zero; left-anchored for valid.
    const int64_t off = p.padding == Padding::SameZero ? -((K - 1) / 2) * d : 0;
    Tensor<S> y({B, F, Lo});
    const int nt = runtime::workers();
#pragma omp parallel for collapse(2) num_threads(nt) if (nt > 1)
    for (int64_t b = 0; b < B; ++b)
        for (int64_t f = 0; f < F; ++f) {
            const S* wf = p.weights.data() + f * C * K;
            for (int64_t i = 0; i < Lo; ++i) {
                S acc = p.bias[f];
                for (int64_t c = 0; c < C; ++c) {
                    const S* xc = x.data() + (b * C + c) * L;
                    const S* wc = wf + c * K;
                    for (int64_t j = 0; j < K; ++j) {
                        const int64_t src = i + off + j * d;
                        if (src >= 0 && src < L) acc += wc[j] * xc[src];
                    }
                }
                y.at3(b, f, i) = acc;
            }
        }
    return y;
}

template <typename S>
struct Conv1dGrads {
    Tensor<S> input;    // [B,C,L]
    Tensor<S> weights;  // [F,C,K]
    Tensor<S> bias;     // [F]
};

template <typename S>
Conv1dGrads<S> conv1d_backward(const Tensor<S>& x, const Conv1dParams<S>& p,
                               const Tensor<S>& dy) {
    check_conv_args(x, p);
    const int64_t B = x.dim(0), C = x.dim(1), L = x.dim(2);
    const int64_t F = p.weights.dim(0), K = p.weights.dim(2);
    const int d = p.dilation;
    const int64_t Lo = conv1d_out_len<S>(L, K, d, p.padding);
    if (dy.shape != std::vector<int64_t>{B, F, Lo})
        throw std::invalid_argument("conv1d_backward: upstream gradient shape mismatch");
    const int64_t off = p.padding == Padding::SameZero ? -((K - 1) / 2) * d : 0;

    Conv1dGrads<S> g{Tensor<S>({B, C, L}), Tensor<S>({F, C, K}), Tensor<S>({F})};
    const int nt = runtime::workers();

#pragma omp parallel for num_threads(nt) if (nt > 1)
    for (int64_t b = 0; b < B; ++b)
        for (int64_t f = 0; f < F; ++f)
            for (int64_t i = 0; i < Lo; ++i) {
                const S gy = dy.at3(b, f, i);
                for (int64_t c = 0; c < C; ++c)
                    for (int64_t j = 0; j < K; ++j) {
                        const int64_t src = i + off + j * d;
                        if (src >= 0 && src < L)
                            g.input.at3(b, c, src) += p.weights.at3(f, c, j) * gy;
                    }
            }

#pragma omp parallel for num_threads(nt) if (nt > 1)
    for (int64_t f = 0; f < F; ++f) {
        S db = 0;
        for (int64_t b = 0; b < B; ++b)
            for (int64_t i = 0; i < Lo; ++i) {
                const S gy = dy.at3(b, f, i);
                db += gy;
                for (int64_t c = 0; c < C; ++c)
                    for (int64_t j = 0; j < K; ++j) {
                        const int64_t src = i + off + j * d;
                        if (src >= 0 && src < L)
                            g.weights.at3(f, c, j) += gy * x.at3(b, c, src);
                    }
            }
        g.bias[f] = db;
    }
    return g;
}

// y = x W + b, x:[B,N] W:[N,M] b:[M]
template <typename S>
Tensor<S> dense(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b) {
    if (x.rank() != 2 || w.rank() != 2 || x.dim(1) != w.dim(0) || b.numel() != w.dim(1))
        throw std::invalid_argument("dense: dimension mismatch " + x.shape_str() + " x " +
                                    w.shape_str());
    const int64_t B = x.dim(0), N = x.dim(1), M = w.dim(1);
    Tensor<S> y({B, M});
    const int nt = runtime::workers();
#pragma omp parallel for num_threads(nt) if (nt > 1)
    for (int64_t r = 0; r < B; ++r)
        for (int64_t m = 0; m < M; ++m) {
            S acc = b[m];
            for (int64_t n = 0; n < N; ++n) acc += x.at2(r, n) * w.at2(n, m);
            y.at2(r, m) = acc;
        }
    return y;
}

template <typename S>
struct DenseGrads {
    Tensor<S> input, weights, bias;
};

template <typename S>
DenseGrads<S> dense_backward(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& dy) {
    const int64_t B = x.dim(0), N = x.dim(1), M = w.dim(1);
    DenseGrads<S> g{Tensor<S>({B, N}), Tensor<S>({N, M}), Tensor<S>({M})};
    for (int64_t r = 0; r < B; ++r)
        for (int64_t m = 0; m < M; ++m) {
            const S gy = dy.at2(r, m);
            g.bias[m] += gy;
            for (int64_t n = 0; n < N; ++n) {
                g.input.at2(r, n) += w.at2(n, m) * gy;
                g.weights.at2(n, m) += x.at2(r, n) * gy;
            }
        }
    return g;
}

template <typename S>
Tensor<S> relu(const Tensor<S>& x) {
    Tensor<S> y = x;
    for (S& v : y.values) v = v > S{0} ? v : S{0};
    return y;
}

// Subgradient at 0 is 0: mask is (x > 0).
template <typename S>
Tensor<S> relu_backward(const Tensor<S>& x, const Tensor<S>& dy) {
    require_same_shape(x, dy, "relu_backward");
    Tensor<S> dx = dy;
    for (int64_t i = 0; i < x.numel(); ++i)
        if (!(x[i] > S{0})) dx[i] = S{0};
    return dx;
}

enum class Mode { Train, Infer };

template <typename S>
struct BatchNormState {
    Tensor<S> running_mean;  // [C]
    Tensor<S> running_var;   // [C], population convention
};

// Cache of the train-mode forward, consumed by the backward pass.
template <typename S>
struct BatchNormCache {
    Tensor<S> x_hat;    // [B,C,L]
    Tensor<S> inv_std;  // [C]
    Tensor<S> mean;     // [C]
};

template <typename S>
Tensor<S> batch_norm(const Tensor<S>& x, const Tensor<S>& gamma, const Tensor<S>& beta,
                     BatchNormState<S>& state, Mode mode, S momentum, S eps,
                     BatchNormCache<S>* cache = nullptr) {
    if (x.rank() != 3) throw std::invalid_argument("batch_norm: input must be [B,C,L]");
    if (!(eps > S{0})) throw std::invalid_argument("batch_norm: eps must be > 0");
    const int64_t B = x.dim(0), C = x.dim(1), L = x.dim(2);
    if (gamma.numel() != C || beta.numel() != C)
        throw std::invalid_argument("batch_norm: gamma/beta length != channels");
    Tensor<S> y({B, C, L});
    const int nt = runtime::workers();

    if (mode == Mode::Infer) {
        if (state.running_mean.numel() != C || state.running_var.numel() != C)
            throw std::invalid_argument("batch_norm: missing running stats in infer mode");
#pragma omp parallel for num_threads(nt) if (nt > 1)
        for (int64_t c = 0; c < C; ++c) {
            const S inv = S{1} / std::sqrt(state.running_var[c] + eps);
            const S mu = state.running_mean[c];
            for (int64_t b = 0; b < B; ++b)
                for (int64_t l = 0; l < L; ++l)
                    y.at3(b, c, l) = gamma[c] * ((x.at3(b, c, l) - mu) * inv) + beta[c];
        }
        return y;
    }

    const int64_t n = B * L;
    if (n < 2) throw std::invalid_argument("batch_norm: train mode needs B*L >= 2");
    if (cache) {
        cache->x_hat = Tensor<S>({B, C, L});
        cache->inv_std = Tensor<S>({C});
        cache->mean = Tensor<S>({C});
    }
    if (state.running_mean.numel() != C) state.running_mean = Tensor<S>({C});
    if (state.running_var.numel() != C) {
        state.running_var = Tensor<S>({C});
        state.running_var.fill(S{1});
    }
#pragma omp parallel for num_threads(nt) if (nt > 1)
    for (int64_t c = 0; c < C; ++c) {
        S mean = 0;
        for (int64_t b = 0; b < B; ++b)
            for (int64_t l = 0; l < L; ++l) mean += x.at3(b, c, l);
        mean /= static_cast<S>(n);
        S var = 0;  // biased (population) variance
        for (int64_t b = 0; b < B; ++b)
            for (int64_t l = 0; l < L; ++l) {
                const S d = x.at3(b, c, l) - mean;
                var += d * d;
            }
        var /= static_cast<S>(n);
        const S inv = S{1} / std::sqrt(var + eps);
        for (int64_t b = 0; b < B; ++b)
            for (int64_t l = 0; l < L; ++l) {
                const S xh = (x.at3(b, c, l) - mean) * inv;
                if (cache) cache->x_hat.at3(b, c, l) = xh;
                y.at3(b, c, l) = gamma[c] * xh + beta[c];
            }
        if (cache) {
            cache->inv_std[c] = inv;
            cache->mean[c] = mean;
        }
        state.running_mean[c] = (S{1} - momentum) * state.running_mean[c] + momentum * mean;
        state.running_var[c] = (S{1} - momentum) * state.running_var[c] + momentum * var;
    }
    return y;
}

template <typename S>
struct BatchNormGrads {
    Tensor<S> input, gamma, beta;
};

template <typename S>
BatchNormGrads<S> batch_norm_backward(const Tensor<S>& gamma, const BatchNormCache<S>& cache,
                                      const Tensor<S>& dy) {
    const int64_t B = dy.dim(0), C = dy.dim(1), L = dy.dim(2);
    const S n = static_cast<S>(B * L);
    BatchNormGrads<S> g{Tensor<S>({B, C, L}), Tensor<S>({C}), Tensor<S>({C})};
    const int nt = runtime::workers();
#pragma omp parallel for num_threads(nt) if (nt > 1)
    for (int64_t c = 0; c < C; ++c) {
        S sum_dy = 0, sum_dy_xh = 0;
        for (int64_t b = 0; b < B; ++b)
            for (int64_t l = 0; l < L; ++l) {
                const S gy = dy.at3(b, c, l);
                sum_dy += gy;
                sum_dy_xh += gy * cache.x_hat.at3(b, c, l);
            }
        g.beta[c] = sum_dy;
        g.gamma[c] = sum_dy_xh;
        const S k = gamma[c] * cache.inv_std[c] / n;
        for (int64_t b = 0; b < B; ++b)
            for (int64_t l = 0; l < L; ++l)
                g.input.at3(b, c, l) =
                    k * (n * dy.at3(b, c, l) - sum_dy - cache.x_hat.at3(b, c, l) * sum_dy_xh);
    }
    return g;
}

// Inverted dropout: survivors scaled at train time, inference is identity.
// The mask is a pure function of (seed, flat position).
template <typename S>
Tensor<S> dropout(const Tensor<S>& x, double rate, Mode mode, uint64_t seed) {
    if (rate < 0.0 || rate >= 1.0)
        throw std::invalid_argument("dropout: rate must be in [0,1)");
    if (mode == Mode::Infer || rate == 0.0) return x;
    Tensor<S> y = x;
    const S scale = static_cast<S>(1.0 / (1.0 - rate));
    for (int64_t i = 0; i < y.numel(); ++i)
        y[i] = rng::uniform01(seed, static_cast<uint64_t>(i)) < rate ? S{0} : y[i] * scale;
    return y;
}

template <typename S>
Tensor<S> dropout_backward(const Tensor<S>& dy, double rate, Mode mode, uint64_t seed) {
    return dropout(dy, rate, mode, seed);  // same mask, same scale
}

template <typename S>
S mse_loss(const Tensor<S>& pred, const Tensor<S>& target) {
    require_same_shape(pred, target, "mse_loss");
    if (pred.numel() == 0) throw std::invalid_argument("mse_loss: empty tensors");
    S acc = 0;
    for (int64_t i = 0; i < pred.numel(); ++i) {
        const S d = pred[i] - target[i];
        acc += d * d;
    }
    return acc / static_cast<S>(pred.numel());
}

template <typename S>
Tensor<S> mse_loss_backward(const Tensor<S>& pred, const Tensor<S>& target, S upstream = S{1}) {
    require_same_shape(pred, target, "mse_loss");
    Tensor<S> g(pred.shape);
    const S k = S{2} * upstream / static_cast<S>(pred.numel());
    for (int64_t i = 0; i < pred.numel(); ++i) g[i] = k * (pred[i] - target[i]);
    return g;
}

}  // namespace bdrn::ops
