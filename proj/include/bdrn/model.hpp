#pragma once

#include <array>
#include <functional>
#include <optional>

#include "bdrn/ops.hpp"
#include "bdrn/receptive_field.hpp"
#include "bdrn/rng.hpp"

// Bidirectional dilated residual network: first conv -> stack of residual
// blocks (conv-bn-relu-dropout twice, identity or 1x1 shortcut) -> sum of
// per-block skip branches -> relu -> center pick -> dense head to a scalar.
// Topology is fixed, so gradients are composed explicitly; no autograd.

namespace bdrn {

struct LayerSpec {
    int filters = 128;
    int kernel = 3;
    int dilation = 1;
};

struct ResidualBlockSpec {
    int filters = 128;
    int kernel = 3;
    int dilation = 1;  // shared by both conv units in the block
};

struct NetworkConfig {
    int window_length = 599;  // odd, so a unique midpoint exists
    int input_channels = 1;
    LayerSpec first_conv{128, 3, 1};
    std::vector<ResidualBlockSpec> blocks;
    double dropout_rate = 0.1;
    float bn_momentum = 0.01f;
    float bn_eps = 1e-5f;
    bool allow_custom_dilations = false;

    static NetworkConfig defaults(int n_blocks = 8, int filters = 128, int kernel = 3,
                                  int window = 599) {
        NetworkConfig c;
        c.window_length = window;
        c.first_conv = {filters, kernel, 1};
        for (int b = 0; b < n_blocks; ++b)
            c.blocks.push_back({filters, kernel, 1 << b});
        return c;
    }

    void validate() const {
        if (window_length < 1 || window_length % 2 == 0)
            throw std::invalid_argument("config: window_length must be odd and positive");
        if (first_conv.kernel % 2 == 0)
            throw std::invalid_argument("config: first conv kernel must be odd");
        if (blocks.empty()) throw std::invalid_argument("config: at least one block required");
        if (dropout_rate < 0.0 || dropout_rate >= 1.0)
            throw std::invalid_argument("config: dropout_rate must be in [0,1)");
        for (size_t b = 0; b < blocks.size(); ++b) {
            if (blocks[b].kernel % 2 == 0)
                throw std::invalid_argument("config: block kernel must be odd");
            if (blocks[b].dilation < 1 || blocks[b].filters < 1)
                throw std::invalid_argument("config: bad block spec");
            if (!allow_custom_dilations && blocks[b].dilation != (1 << b))
                throw std::invalid_argument("config: dilations must double per block (2^b)");
            if (blocks[b].filters != blocks[0].filters)
                throw std::invalid_argument(
                    "config: all blocks must share one filter count (skip branches are summed)");
        }
    }

    std::vector<ConvStackLayer> conv_stack() const {
        std::vector<ConvStackLayer> s;
        s.push_back({first_conv.kernel, first_conv.dilation, false});
        for (const auto& b : blocks) {
            s.push_back({b.kernel, b.dilation, false});
            s.push_back({b.kernel, b.dilation, false});
        }
        return s;
    }
};

// conv -> batch_norm -> relu -> dropout
template <typename S>
struct ConvUnit {
    ops::Conv1dParams<S> conv;
    Tensor<S> gamma, beta;
    ops::BatchNormState<S> bn;
};

template <typename S>
struct ResidualBlock {
    ConvUnit<S> unit1, unit2;
    std::optional<ops::Conv1dParams<S>> shortcut;  // 1x1, only when channels differ
};

template <typename S>
struct UnitContext {
    Tensor<S> conv_in;
    ops::BatchNormCache<S> bn_cache;
    Tensor<S> bn_out;  // pre-relu
    uint64_t dropout_seed = 0;
};

template <typename S>
struct ForwardContext {
    Tensor<S> input;
    std::vector<std::array<UnitContext<S>, 2>> blocks;
    std::vector<Tensor<S>> block_inputs;
    std::vector<Tensor<S>> block_preact;  // u2 + shortcut, pre final relu
    Tensor<S> skip_sum;                   // pre relu
    Tensor<S> center;                     // [B,F] fed to the head
    bool valid = false;
};

template <typename S>
using GradTable = std::vector<std::pair<std::string, Tensor<S>>>;

template <typename S>
class Model {
public:
    NetworkConfig config;
    ops::Conv1dParams<S> first_conv;
    std::vector<ResidualBlock<S>> blocks;
    Tensor<S> head_w, head_b;  // dense F -> 1

    Model() = default;

    /// Visits every learnable parameter in a fixed, name-stable order.
    template <typename Fn>
    void for_each_param(Fn&& fn) {
        fn("first_conv.w", first_conv.weights);
        fn("first_conv.b", first_conv.bias);
        for (size_t b = 0; b < blocks.size(); ++b) {
            const std::string p = "block" + std::to_string(b) + ".";
            // Unit convs are bias-free: batch norm cancels a per-channel
            // constant shift exactly, so the bias would be a dead parameter.
            auto unit = [&](const std::string& u, ConvUnit<S>& cu) {
                fn(p + u + ".conv.w", cu.conv.weights);
                fn(p + u + ".bn.gamma", cu.gamma);
                fn(p + u + ".bn.beta", cu.beta);
            };
            unit("unit1", blocks[b].unit1);
            unit("unit2", blocks[b].unit2);
            if (blocks[b].shortcut) {
                fn(p + "shortcut.w", blocks[b].shortcut->weights);
                fn(p + "shortcut.b", blocks[b].shortcut->bias);
            }
        }
        fn("head.w", head_w);
        fn("head.b", head_b);
    }

    /// Learnable parameters plus batch-norm running statistics (the full
    /// serialized state).
    template <typename Fn>
    void for_each_array(Fn&& fn) {
        for_each_param(fn);
        for (size_t b = 0; b < blocks.size(); ++b) {
            const std::string p = "block" + std::to_string(b) + ".";
            auto stats = [&](const std::string& u, ConvUnit<S>& cu) {
                fn(p + u + ".bn.running_mean", cu.bn.running_mean);
                fn(p + u + ".bn.running_var", cu.bn.running_var);
            };
            stats("unit1", blocks[b].unit1);
            stats("unit2", blocks[b].unit2);
        }
    }

    int64_t param_count() {
        int64_t n = 0;
        for_each_param([&](const std::string&, Tensor<S>& t) { n += t.numel(); });
        return n;
    }

    int64_t state_count() {
        int64_t n = 0;
        for_each_array([&](const std::string&, Tensor<S>& t) { n += t.numel(); });
        return n;
    }

    Tensor<S> forward(const Tensor<S>& batch, ops::Mode mode, uint64_t dropout_seed = 0,
                      ForwardContext<S>* ctx = nullptr) {
        if (batch.rank() != 3 || batch.dim(1) != config.input_channels ||
            batch.dim(2) != config.window_length)
            throw std::invalid_argument("forward: expected [B," +
                                        std::to_string(config.input_channels) + "," +
                                        std::to_string(config.window_length) + "], got " +
                                        batch.shape_str());
        const int64_t B = batch.dim(0);
        const int64_t W = config.window_length;
        const int64_t center_idx = (W - 1) / 2;

        if (ctx) {
            *ctx = ForwardContext<S>{};
            ctx->input = batch;
            ctx->blocks.resize(blocks.size());
            ctx->block_inputs.resize(blocks.size());
            ctx->block_preact.resize(blocks.size());
        }

        Tensor<S> h = ops::conv1d(batch, first_conv);
        Tensor<S> skip_sum({B, static_cast<int64_t>(config.blocks[0].filters), W});

        uint64_t unit_id = 0;
        auto run_unit = [&](ConvUnit<S>& cu, const Tensor<S>& in,
                            UnitContext<S>* uc) -> Tensor<S> {
            const uint64_t seed = rng::hash2(dropout_seed, unit_id++);
            if (uc) uc->conv_in = in;
            Tensor<S> z = ops::conv1d(in, cu.conv);
            z = ops::batch_norm(z, cu.gamma, cu.beta, cu.bn, mode,
                                static_cast<S>(config.bn_momentum),
                                static_cast<S>(config.bn_eps), uc ? &uc->bn_cache : nullptr);
            if (uc) {
                uc->bn_out = z;
                uc->dropout_seed = seed;
            }
            z = ops::relu(z);
            return ops::dropout(z, config.dropout_rate, mode, seed);
        };

        for (size_t b = 0; b < blocks.size(); ++b) {
            if (ctx) ctx->block_inputs[b] = h;
            Tensor<S> u = run_unit(blocks[b].unit1, h, ctx ? &ctx->blocks[b][0] : nullptr);
            u = run_unit(blocks[b].unit2, u, ctx ? &ctx->blocks[b][1] : nullptr);
            // skip branch: the pre-addition unit-chain output
            for (int64_t i = 0; i < u.numel(); ++i) skip_sum[i] += u[i];
            Tensor<S> sc = blocks[b].shortcut ? ops::conv1d(h, *blocks[b].shortcut) : h;
            for (int64_t i = 0; i < u.numel(); ++i) u[i] += sc[i];
            if (ctx) ctx->block_preact[b] = u;
            h = ops::relu(u);
        }

        if (ctx) ctx->skip_sum = skip_sum;
        Tensor<S> s = ops::relu(skip_sum);

        const int64_t F = s.dim(1);
        Tensor<S> center({B, F});
        for (int64_t b = 0; b < B; ++b)
            for (int64_t f = 0; f < F; ++f) center.at2(b, f) = s.at3(b, f, center_idx);
        if (ctx) {
            ctx->center = center;
            ctx->valid = true;
        }

        Tensor<S> out = ops::dense(center, head_w, head_b);
        require_finite(out, "forward");
        return out;
    }

    /// Gradient of the loss w.r.t. every parameter, given d(loss)/d(output).
    /// Requires the context of a preceding train-mode forward pass.
    GradTable<S> backward(const ForwardContext<S>& ctx, const Tensor<S>& dy) {
        if (!ctx.valid) throw std::runtime_error("backward: no retained forward state");
        const int64_t B = ctx.input.dim(0);
        const int64_t W = config.window_length;
        const int64_t center_idx = (W - 1) / 2;
        const int64_t F = ctx.center.dim(1);

        GradTable<S> grads;
        auto add = [&](const std::string& name, Tensor<S> g) {
            grads.emplace_back(name, std::move(g));
        };

        auto dhead = ops::dense_backward(ctx.center, head_w, dy);

        // center pick scatters back to one time step
        Tensor<S> ds({B, F, W});
        for (int64_t b = 0; b < B; ++b)
            for (int64_t f = 0; f < F; ++f)
                ds.at3(b, f, center_idx) = dhead.input.at2(b, f);
        Tensor<S> dskip = ops::relu_backward(ctx.skip_sum, ds);

        auto unit_backward = [&](const ConvUnit<S>& cu, const UnitContext<S>& uc,
                                 const Tensor<S>& d_out, const std::string& name,
                                 GradTable<S>& out) -> Tensor<S> {
            Tensor<S> g = ops::dropout_backward(d_out, config.dropout_rate, ops::Mode::Train,
                                                uc.dropout_seed);
            g = ops::relu_backward(uc.bn_out, g);
            auto bn = ops::batch_norm_backward(cu.gamma, uc.bn_cache, g);
            auto cv = ops::conv1d_backward(uc.conv_in, cu.conv, bn.input);
            out.emplace_back(name + ".conv.w", std::move(cv.weights));
            out.emplace_back(name + ".bn.gamma", std::move(bn.gamma));
            out.emplace_back(name + ".bn.beta", std::move(bn.beta));
            return std::move(cv.input);
        };

        Tensor<S> d_block_out({B, F, W});  // zero for the last block
        std::vector<GradTable<S>> block_grads(blocks.size());
        for (size_t bi = blocks.size(); bi-- > 0;) {
            const std::string p = "block" + std::to_string(bi) + ".";
            Tensor<S> d_pre = ops::relu_backward(ctx.block_preact[bi], d_block_out);
            // unit chain receives the residual-path and skip-path gradients
            Tensor<S> d_u2 = d_pre;
            for (int64_t i = 0; i < d_u2.numel(); ++i) d_u2[i] += dskip[i];
            GradTable<S> unit2_grads;
            Tensor<S> d_u1 =
                unit_backward(blocks[bi].unit2, ctx.blocks[bi][1], d_u2, p + "unit2",
                              unit2_grads);
            Tensor<S> d_in =
                unit_backward(blocks[bi].unit1, ctx.blocks[bi][0], d_u1, p + "unit1",
                              block_grads[bi]);
            for (auto& g : unit2_grads) block_grads[bi].push_back(std::move(g));
            if (blocks[bi].shortcut) {
                auto sg = ops::conv1d_backward(ctx.block_inputs[bi], *blocks[bi].shortcut, d_pre);
                block_grads[bi].emplace_back(p + "shortcut.w", std::move(sg.weights));
                block_grads[bi].emplace_back(p + "shortcut.b", std::move(sg.bias));
                for (int64_t i = 0; i < d_in.numel(); ++i) d_in[i] += sg.input[i];
            } else {
                for (int64_t i = 0; i < d_in.numel(); ++i) d_in[i] += d_pre[i];
            }
            d_block_out = std::move(d_in);
        }

        auto fg = ops::conv1d_backward(ctx.input, first_conv, d_block_out);
        add("first_conv.w", std::move(fg.weights));
        add("first_conv.b", std::move(fg.bias));
        for (auto& bg : block_grads)
            for (auto& [n, t] : bg) grads.emplace_back(n, std::move(t));
        add("head.w", std::move(dhead.weights));
        add("head.b", std::move(dhead.bias));
        return grads;
    }

    ReceptiveField receptive_field() const { return bdrn::receptive_field(config.conv_stack()); }
};

/// Deterministic fan-in-scaled uniform initialization from the seed;
/// identical (config, seed) pairs build bitwise-identical models.
template <typename S>
Model<S> build_network(const NetworkConfig& config, uint64_t seed) {
    config.validate();
    Model<S> m;
    m.config = config;

    uint64_t ordinal = 0;
    auto init_conv = [&](int out_ch, int in_ch, int kernel, int dilation) {
        ops::Conv1dParams<S> p;
        p.weights = Tensor<S>({out_ch, in_ch, kernel});
        p.bias = Tensor<S>({out_ch});
        p.dilation = dilation;
        p.padding = ops::Padding::SameZero;
        const double bound = 1.0 / std::sqrt(static_cast<double>(in_ch) * kernel);
        const uint64_t s = rng::hash2(seed, ordinal++);
        for (int64_t i = 0; i < p.weights.numel(); ++i)
            p.weights[i] = static_cast<S>(rng::uniform_sym(s, static_cast<uint64_t>(i), bound));
        return p;
    };
    auto init_unit = [&](int out_ch, int in_ch, int kernel, int dilation) {
        ConvUnit<S> u;
        u.conv = init_conv(out_ch, in_ch, kernel, dilation);
        u.gamma = Tensor<S>({out_ch}, S{1});
        u.beta = Tensor<S>({out_ch});
        u.bn.running_mean = Tensor<S>({out_ch});
        u.bn.running_var = Tensor<S>({out_ch}, S{1});
        return u;
    };

    m.first_conv = init_conv(config.first_conv.filters, config.input_channels,
                             config.first_conv.kernel, config.first_conv.dilation);
    int in_ch = config.first_conv.filters;
    for (const auto& bs : config.blocks) {
        ResidualBlock<S> blk;
        blk.unit1 = init_unit(bs.filters, in_ch, bs.kernel, bs.dilation);
        blk.unit2 = init_unit(bs.filters, bs.filters, bs.kernel, bs.dilation);
        if (in_ch != bs.filters) blk.shortcut = init_conv(bs.filters, in_ch, 1, 1);
        in_ch = bs.filters;
        m.blocks.push_back(std::move(blk));
    }
    const int F = in_ch;
    m.head_w = Tensor<S>({F, 1});
    m.head_b = Tensor<S>({1});
    const double bound = 1.0 / std::sqrt(static_cast<double>(F));
    const uint64_t s = rng::hash2(seed, ordinal++);
    for (int64_t i = 0; i < m.head_w.numel(); ++i)
        m.head_w[i] = static_cast<S>(rng::uniform_sym(s, static_cast<uint64_t>(i), bound));
    return m;
}

}  // namespace bdrn
