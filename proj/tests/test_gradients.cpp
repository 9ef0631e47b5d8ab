#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bdrn/grad_check.hpp"
#include "bdrn/model.hpp"
#include "bdrn/rng.hpp"

using namespace bdrn;

namespace {

TensorD random_tensor(std::vector<int64_t> shape, uint64_t seed, double bound = 1.0) {
    TensorD t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng::uniform_sym(seed, i, bound);
    return t;
}

double weighted_sum(const TensorD& y, const TensorD& r) {
    double acc = 0;
    for (int64_t i = 0; i < y.numel(); ++i) acc += y[i] * r[i];
    return acc;
}

}  // namespace

TEST_CASE("conv1d gradients match finite differences") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        TensorD x = random_tensor({1, 2, 8}, seed * 3 + 1);
        ops::Conv1dParams<double> p;
        p.weights = random_tensor({3, 2, 3}, seed * 3 + 2);
        p.bias = random_tensor({3}, seed * 3 + 3);
        p.dilation = 1 + static_cast<int>(seed % 3);
        p.padding = seed % 2 ? ops::Padding::Valid : ops::Padding::SameZero;
        const int64_t lo = ops::conv1d_out_len<double>(8, 3, p.dilation, p.padding);
        if (lo <= 0) continue;
        TensorD r = random_tensor({1, 3, lo}, seed * 3 + 4);

        auto grads = ops::conv1d_backward(x, p, r);
        auto fn = [&](const std::vector<TensorD>& in) {
            ops::Conv1dParams<double> q = p;
            q.weights = in[1];
            q.bias = in[2];
            return weighted_sum(ops::conv1d(in[0], q), r);
        };
        const double err = grad_check(fn, {x, p.weights, p.bias},
                                      {grads.input, grads.weights, grads.bias}, 1e-5);
        CHECK(err < 1e-4);
    }
}

TEST_CASE("dense gradients match finite differences") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        TensorD x = random_tensor({3, 4}, seed + 31);
        TensorD w = random_tensor({4, 2}, seed + 61);
        TensorD b = random_tensor({2}, seed + 91);
        TensorD r = random_tensor({3, 2}, seed + 121);
        auto g = ops::dense_backward(x, w, r);
        auto fn = [&](const std::vector<TensorD>& in) {
            return weighted_sum(ops::dense(in[0], in[1], in[2]), r);
        };
        CHECK(grad_check(fn, {x, w, b}, {g.input, g.weights, g.bias}, 1e-5) < 1e-4);
    }
}

TEST_CASE("relu gradient away from the kink") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        TensorD x = random_tensor({40}, seed + 200);
        for (auto& v : x.values) v += v >= 0 ? 0.1 : -0.1;  // keep clear of 0
        TensorD r = random_tensor({40}, seed + 240);
        TensorD g = ops::relu_backward(x, r);
        auto fn = [&](const std::vector<TensorD>& in) { return weighted_sum(ops::relu(in[0]), r); };
        CHECK(grad_check(fn, {x}, {g}, 1e-5) < 1e-6);
    }
}

TEST_CASE("batch_norm train-mode gradients match finite differences") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        TensorD x = random_tensor({2, 3, 7}, seed + 301);
        TensorD gamma = random_tensor({3}, seed + 302);
        TensorD beta = random_tensor({3}, seed + 303);
        TensorD r = random_tensor({2, 3, 7}, seed + 304);
        ops::BatchNormState<double> st;
        ops::BatchNormCache<double> cache;
        ops::batch_norm(x, gamma, beta, st, ops::Mode::Train, 0.01, 1e-5, &cache);
        auto g = ops::batch_norm_backward(gamma, cache, r);
        auto fn = [&](const std::vector<TensorD>& in) {
            ops::BatchNormState<double> s2;
            return weighted_sum(
                ops::batch_norm(in[0], in[1], in[2], s2, ops::Mode::Train, 0.01, 1e-5), r);
        };
        CHECK(grad_check(fn, {x, gamma, beta}, {g.input, g.gamma, g.beta}, 1e-5) < 1e-4);
    }
}

TEST_CASE("dropout gradient passes through the fixed mask") {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        TensorD x = random_tensor({50}, seed + 400);
        TensorD r = random_tensor({50}, seed + 450);
        TensorD g = ops::dropout_backward(r, 0.3, ops::Mode::Train, seed);
        auto fn = [&](const std::vector<TensorD>& in) {
            return weighted_sum(ops::dropout(in[0], 0.3, ops::Mode::Train, seed), r);
        };
        CHECK(grad_check(fn, {x}, {g}, 1e-5) < 1e-6);
    }
}

TEST_CASE("mse gradient matches finite differences") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        TensorD pred = random_tensor({12}, seed + 500);
        TensorD target = random_tensor({12}, seed + 550);
        TensorD g = ops::mse_loss_backward(pred, target);
        auto fn = [&](const std::vector<TensorD>& in) { return ops::mse_loss(in[0], target); };
        CHECK(grad_check(fn, {pred}, {g}, 1e-5) < 1e-4);
    }
}

TEST_CASE("full 2-block network loss gradients match finite differences") {
    NetworkConfig cfg = NetworkConfig::defaults(2, 4, 3, 15);
    cfg.dropout_rate = 0.0;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        Model<double> model = build_network<double>(cfg, seed + 1);
        TensorD x = random_tensor({2, 1, 15}, seed + 600);
        TensorD target = random_tensor({2, 1}, seed + 650);

        ForwardContext<double> ctx;
        TensorD y = model.forward(x, ops::Mode::Train, 0, &ctx);
        TensorD dy = ops::mse_loss_backward(y, target);
        GradTable<double> grads = model.backward(ctx, dy);

        std::vector<TensorD> params, analytic;
        std::vector<std::string> names;
        model.for_each_param([&](const std::string& n, TensorD& t) {
            params.push_back(t);
            names.push_back(n);
        });
        REQUIRE(grads.size() == params.size());
        for (size_t i = 0; i < grads.size(); ++i) {
            REQUIRE(grads[i].first == names[i]);
            analytic.push_back(grads[i].second);
        }

        auto fn = [&](const std::vector<TensorD>& in) {
            Model<double> m2 = model;
            size_t i = 0;
            m2.for_each_param([&](const std::string&, TensorD& t) { t = in[i++]; });
            ForwardContext<double> c2;
            TensorD out = m2.forward(x, ops::Mode::Train, 0, &c2);
            return static_cast<double>(ops::mse_loss(out, target));
        };
        const double err = grad_check(fn, params, analytic, 1e-5);
        CHECK(err < 1e-4);
    }
}

TEST_CASE("backward is linear in the loss gradient") {
    NetworkConfig cfg = NetworkConfig::defaults(2, 4, 3, 15);
    cfg.dropout_rate = 0.0;
    Model<double> model = build_network<double>(cfg, 3);
    TensorD x = random_tensor({2, 1, 15}, 700);
    ForwardContext<double> ctx;
    model.forward(x, ops::Mode::Train, 0, &ctx);

    TensorD dy = random_tensor({2, 1}, 710);
    TensorD dy2 = dy;
    for (auto& v : dy2.values) v *= 2.0;
    TensorD zero({2, 1});

    auto g1 = model.backward(ctx, dy);
    auto g2 = model.backward(ctx, dy2);
    auto g0 = model.backward(ctx, zero);
    for (size_t i = 0; i < g1.size(); ++i)
        for (int64_t j = 0; j < g1[i].second.numel(); ++j) {
            CHECK(g2[i].second[j] == doctest::Approx(2.0 * g1[i].second[j]).epsilon(1e-9));
            CHECK(g0[i].second[j] == 0.0);
        }
}

TEST_CASE("grad_check rejects bad fd_eps") {
    auto fn = [](const std::vector<TensorD>& in) { return in[0][0]; };
    TensorD x({1}, {1.0});
    TensorD g({1}, {1.0});
    CHECK_THROWS_AS(grad_check(fn, {x}, {g}, 1e-2), std::invalid_argument);
}
