#include "bdrn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "bdrn/adam.hpp"

namespace bdrn::train {

namespace {

TensorF batch_tensor(const data::WindowedDataset& ds, const std::vector<size_t>& order,
                     size_t from, size_t to) {
    const int64_t w = ds.window_length;
    TensorF x({static_cast<int64_t>(to - from), 1, w});
    for (size_t r = from; r < to; ++r) {
        const float* src = ds.row(order[r]);
        std::copy(src, src + w, x.data() + (r - from) * w);
    }
    return x;
}

TensorF batch_targets(const data::WindowedDataset& ds, const std::vector<size_t>& order,
                      size_t from, size_t to) {
    TensorF t({static_cast<int64_t>(to - from), 1});
    for (size_t r = from; r < to; ++r) t[static_cast<int64_t>(r - from)] = ds.targets[order[r]];
    return t;
}

double eval_mse(Model<float>& model, const data::WindowedDataset& ds, int batch_size) {
    if (ds.rows == 0) return 0.0;
    std::vector<size_t> order(ds.rows);
    std::iota(order.begin(), order.end(), size_t{0});
    double acc = 0.0;
    for (size_t b = 0; b < ds.rows; b += batch_size) {
        const size_t e = std::min(ds.rows, b + static_cast<size_t>(batch_size));
        TensorF x = batch_tensor(ds, order, b, e);
        TensorF t = batch_targets(ds, order, b, e);
        TensorF y = model.forward(x, ops::Mode::Infer);
        acc += static_cast<double>(ops::mse_loss(y, t)) * static_cast<double>(e - b);
    }
    return acc / static_cast<double>(ds.rows);
}

struct Snapshot {
    std::vector<TensorF> arrays;
    void capture(Model<float>& m) {
        arrays.clear();
        m.for_each_array([&](const std::string&, TensorF& t) { arrays.push_back(t); });
    }
    void restore(Model<float>& m) {
        size_t i = 0;
        m.for_each_array([&](const std::string&, TensorF& t) { t = arrays[i++]; });
    }
};

}  // namespace

History fit(Model<float>& model, const data::WindowedDataset& train_set,
            const data::WindowedDataset& val_set, const TrainConfig& cfg) {
    if (train_set.rows == 0) throw std::invalid_argument("fit: empty training set");
    if (train_set.window_length != model.config.window_length)
        throw std::invalid_argument("fit: dataset window length " +
                                    std::to_string(train_set.window_length) +
                                    " != model window length " +
                                    std::to_string(model.config.window_length));
    if (cfg.batch_size < 1 || cfg.early_stop_patience < 1)
        throw std::invalid_argument("fit: bad batch_size or patience");

    AdamConfig<float> adam{static_cast<float>(cfg.learning_rate), static_cast<float>(cfg.beta1),
                           static_cast<float>(cfg.beta2), static_cast<float>(cfg.eps)};
    std::vector<AdamState<float>> states;
    model.for_each_param([&](const std::string&, TensorF& t) { states.emplace_back(t.shape); });

    History hist;
    Snapshot best;
    best.capture(model);
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;

    std::vector<size_t> order(train_set.rows);
    std::iota(order.begin(), order.end(), size_t{0});

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const auto t_start = std::chrono::steady_clock::now();
        std::mt19937_64 perm_rng(rng::hash2(cfg.shuffle_seed, static_cast<uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), perm_rng);

        double epoch_loss = 0.0;
        size_t batch_index = 0;
        for (size_t b = 0; b < train_set.rows; b += cfg.batch_size, ++batch_index) {
            const size_t e = std::min(train_set.rows, b + static_cast<size_t>(cfg.batch_size));
            TensorF x = batch_tensor(train_set, order, b, e);
            TensorF t = batch_targets(train_set, order, b, e);
            ForwardContext<float> ctx;
            const uint64_t drop_seed =
                rng::hash2(cfg.shuffle_seed, (static_cast<uint64_t>(epoch) << 32) | batch_index);
            TensorF y = model.forward(x, ops::Mode::Train, drop_seed, &ctx);
            const float loss = ops::mse_loss(y, t);
            if (!std::isfinite(loss))
                throw std::runtime_error("fit: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", batch " +
                                         std::to_string(batch_index));
            epoch_loss += static_cast<double>(loss) * static_cast<double>(e - b);
            TensorF dy = ops::mse_loss_backward(y, t);
            GradTable<float> grads = model.backward(ctx, dy);
            size_t gi = 0;
            model.for_each_param([&](const std::string& name, TensorF& p) {
                if (grads[gi].first != name)
                    throw std::logic_error("fit: gradient table order mismatch at " + name);
                adam_step(p, grads[gi].second, states[gi], adam);
                ++gi;
            });
        }
        epoch_loss /= static_cast<double>(train_set.rows);
        const double val =
            val_set.rows > 0 ? eval_mse(model, val_set, cfg.batch_size) : epoch_loss;
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        hist.train_loss.push_back(epoch_loss);
        hist.val_loss.push_back(val);
        hist.seconds.push_back(secs);
        if (!cfg.quiet)
            std::fprintf(stderr, "epoch %d  train %.6g  val %.6g  (%.1fs)\n", epoch, epoch_loss,
                         val, secs);
        if (val < best_val) {
            best_val = val;
            hist.best_epoch = epoch;
            best.capture(model);
            since_best = 0;
        } else if (++since_best >= cfg.early_stop_patience) {
            break;
        }
    }
    best.restore(model);
    return hist;
}

std::vector<float> predict_midpoints(Model<float>& model, const data::WindowedDataset& ds,
                                     int batch_size) {
    if (ds.window_length != model.config.window_length)
        throw std::invalid_argument("predict_midpoints: window length mismatch");
    std::vector<size_t> order(ds.rows);
    std::iota(order.begin(), order.end(), size_t{0});
    std::vector<float> out;
    out.reserve(ds.rows);
    for (size_t b = 0; b < ds.rows; b += batch_size) {
        const size_t e = std::min(ds.rows, b + static_cast<size_t>(batch_size));
        TensorF y = model.forward(batch_tensor(ds, order, b, e), ops::Mode::Infer);
        for (int64_t i = 0; i < y.numel(); ++i) out.push_back(y[i]);
    }
    return out;
}

std::vector<double> disaggregate(Model<float>& model, const std::vector<double>& aggregate_watts,
                                 const data::NormStats& stats_in,
                                 const data::NormStats& stats_target, int batch_size) {
    if (aggregate_watts.empty()) throw std::invalid_argument("disaggregate: empty series");
    const int w = model.config.window_length;
    data::AlignedPair pair;
    pair.period = 1;
    pair.aggregate = aggregate_watts;
    pair.appliance.assign(aggregate_watts.size(), 0.0);  // targets unused here
    data::WindowedDataset ds = data::make_windows(pair, stats_in, stats_target, w, 1,
                                                  data::WindowPad::ZeroHalfWindow);
    std::vector<float> z = predict_midpoints(model, ds, batch_size);
    std::vector<double> out(z.size());
    for (size_t i = 0; i < z.size(); ++i)
        out[i] = std::max(0.0, data::denormalize(static_cast<double>(z[i]), stats_target));
    return out;
}

double mae(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) throw std::invalid_argument("mae: length mismatch");
    if (pred.empty()) throw std::invalid_argument("mae: empty input");
    double acc = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - truth[i]);
    return acc / static_cast<double>(pred.size());
}

double sae(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) throw std::invalid_argument("sae: length mismatch");
    const double r_hat = std::accumulate(pred.begin(), pred.end(), 0.0);
    const double r = std::accumulate(truth.begin(), truth.end(), 0.0);
    if (!(r > 0.0)) throw std::invalid_argument("sae: zero true total energy");
    return std::abs(r_hat - r) / r;
}

MetricsReport build_report(const std::vector<ApplianceResult>& rows) {
    if (rows.empty()) throw std::invalid_argument("build_report: no appliances");
    MetricsReport r;
    r.rows = rows;
    r.overall.name = "Overall";
    for (const auto& a : rows) {
        r.overall.mae_watts += a.mae_watts;
        r.overall.sae += a.sae;
    }
    r.overall.mae_watts /= static_cast<double>(rows.size());
    r.overall.sae /= static_cast<double>(rows.size());
    return r;
}

std::string format_report(const MetricsReport& r) {
    std::string out = "Appliance            MAE (W)       SAE\n";
    char buf[128];
    auto line = [&](const ApplianceResult& a) {
        std::snprintf(buf, sizeof buf, "%-18s %9.3f %9.3f\n", a.name.c_str(), a.mae_watts, a.sae);
        out += buf;
    };
    for (const auto& a : r.rows) line(a);
    line(r.overall);
    return out;
}

}  // namespace bdrn::train
