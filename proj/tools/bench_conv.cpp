#include <chrono>
#include <cstdio>

#include "bdrn/reference.hpp"
#include "bdrn/rng.hpp"
#include "bdrn/runtime.hpp"

// Times the OpenMP conv1d kernel against the serial reference on a
// training-shaped workload. Thread count via NILM_WORKERS.

using namespace bdrn;

namespace {

template <typename Fn>
double time_ms(Fn&& fn, int reps) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
    const int64_t B = 32, C = 64, F = 64, L = 599, K = 3;
    TensorF x({B, C, L});
    for (int64_t i = 0; i < x.numel(); ++i)
        x[i] = static_cast<float>(rng::uniform_sym(1, i, 1.0));
    ops::Conv1dParams<float> p;
    p.weights = TensorF({F, C, K});
    p.bias = TensorF({F});
    for (int64_t i = 0; i < p.weights.numel(); ++i)
        p.weights[i] = static_cast<float>(rng::uniform_sym(2, i, 0.1));

    std::printf("conv1d  B=%lld C=%lld F=%lld L=%lld K=%lld  workers=%d\n",
                (long long)B, (long long)C, (long long)F, (long long)L, (long long)K,
                runtime::workers());
    for (int d : {1, 4, 16, 128}) {
        p.dilation = d;
        TensorF y_ref = reference::conv1d(x, p);
        TensorF y_omp = ops::conv1d(x, p);
        double max_diff = 0.0;
        for (int64_t i = 0; i < y_ref.numel(); ++i)
            max_diff = std::max(max_diff, std::abs((double)y_ref[i] - (double)y_omp[i]));
        const double t_ref = time_ms([&] { reference::conv1d(x, p); }, 3);
        const double t_omp = time_ms([&] { ops::conv1d(x, p); }, 3);
        std::printf("  d=%-4d serial %8.2f ms   omp %8.2f ms   speedup %.2fx   max|diff| %g\n",
                    d, t_ref, t_omp, t_ref / t_omp, max_diff);
    }
    return 0;
}
