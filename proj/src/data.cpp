#include "bdrn/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "bdrn/rng.hpp"

namespace bdrn::data {

RawSeries parse_channel_file(std::istream& in) {
    RawSeries s;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        int64_t ts;
        double w;
        char trailing;
        std::istringstream ls(line);
        if (!(ls >> ts >> w) || (ls >> trailing))
            throw std::runtime_error("parse error at line " + std::to_string(lineno) + ": '" +
                                     line + "'");
        if (!std::isfinite(w))
            throw std::runtime_error("non-finite watts at line " + std::to_string(lineno));
        if (!s.timestamps.empty() && ts <= s.timestamps.back())
            throw std::runtime_error("non-monotonic timestamp at line " + std::to_string(lineno));
        if (w < 0.0) {  // glitch readings; power is physically nonnegative
            w = 0.0;
            ++s.clamped_negative;
        }
        s.timestamps.push_back(ts);
        s.watts.push_back(w);
    }
    if (s.timestamps.empty()) throw std::runtime_error("empty channel stream");
    return s;
}

void write_channel_file(const RawSeries& s, std::ostream& out) {
    char buf[64];
    for (size_t i = 0; i < s.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%lld %.17g\n", static_cast<long long>(s.timestamps[i]),
                      s.watts[i]);
        out << buf;
    }
}

std::map<int, std::string> parse_labels(std::istream& in) {
    std::map<int, std::string> labels;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        int channel;
        std::string name;
        if (!(ls >> channel) || !std::getline(ls >> std::ws, name) || name.empty())
            throw std::runtime_error("labels parse error at line " + std::to_string(lineno));
        if (!labels.emplace(channel, name).second)
            throw std::runtime_error("duplicate channel " + std::to_string(channel) +
                                     " at line " + std::to_string(lineno));
    }
    return labels;
}

namespace {

// Forward-fill one series onto the grid; filled[i] is true when no native
// sample falls in (t - period, t].
void resample(const RawSeries& s, int64_t t0, int64_t period, size_t n,
              std::vector<double>& out, std::vector<uint8_t>& filled) {
    out.resize(n);
    filled.resize(n);
    size_t j = 0;
    for (size_t i = 0; i < n; ++i) {
        const int64_t t = t0 + static_cast<int64_t>(i) * period;
        while (j + 1 < s.size() && s.timestamps[j + 1] <= t) ++j;
        out[i] = s.watts[j];
        filled[i] = s.timestamps[j] <= t - period ? 1 : 0;
    }
}

}  // namespace

AlignedPair align_series(const RawSeries& mains, const RawSeries& appliance, int64_t period,
                         int64_t gap_limit) {
    if (mains.size() == 0 || appliance.size() == 0)
        throw std::invalid_argument("align_series: empty series");
    if (period <= 0) throw std::invalid_argument("align_series: period must be positive");
    const int64_t t0 = std::max(mains.timestamps.front(), appliance.timestamps.front());
    const int64_t t1 = std::min(mains.timestamps.back(), appliance.timestamps.back());
    if (t0 > t1) throw std::runtime_error("align_series: no temporal overlap");
    const size_t n = static_cast<size_t>((t1 - t0) / period) + 1;

    std::vector<double> agg, app;
    std::vector<uint8_t> fill_m, fill_a;
    resample(mains, t0, period, n, agg, fill_m);
    resample(appliance, t0, period, n, app, fill_a);

    AlignedPair out;
    out.period = period;
    out.start = t0;
    // Excise runs of filled samples longer than gap_limit from both series.
    size_t i = 0;
    bool just_excised = false;
    while (i < n) {
        const bool filled = fill_m[i] || fill_a[i];
        if (filled) {
            size_t run = i;
            while (run < n && (fill_m[run] || fill_a[run])) ++run;
            if (static_cast<int64_t>(run - i) > gap_limit) {
                just_excised = !out.aggregate.empty();
                i = run;
                continue;
            }
        }
        if (just_excised) {
            out.breaks.push_back(out.aggregate.size());
            just_excised = false;
        }
        out.timestamps.push_back(t0 + static_cast<int64_t>(i) * period);
        out.aggregate.push_back(agg[i]);
        out.appliance.push_back(app[i]);
        out.gap_mask.push_back(filled ? 1 : 0);
        ++i;
    }
    if (out.aggregate.empty()) throw std::runtime_error("align_series: nothing left after gaps");
    return out;
}

double normalize(double x, const NormStats& s) {
    if (!(s.std > 0.0)) throw std::invalid_argument("normalize: std must be > 0");
    return (x - s.mean) / s.std;
}

double denormalize(double z, const NormStats& s) {
    if (!(s.std > 0.0)) throw std::invalid_argument("denormalize: std must be > 0");
    return z * s.std + s.mean;
}

std::vector<double> normalize(const std::vector<double>& xs, const NormStats& s) {
    std::vector<double> out(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) out[i] = normalize(xs[i], s);
    return out;
}

std::vector<double> denormalize(const std::vector<double>& zs, const NormStats& s) {
    std::vector<double> out(zs.size());
    for (size_t i = 0; i < zs.size(); ++i) out[i] = denormalize(zs[i], s);
    return out;
}

WindowedDataset make_windows(const AlignedPair& pair, const NormStats& stats_in,
                             const NormStats& stats_target, int window_length, int stride,
                             WindowPad pad, int source_id) {
    if (window_length < 1 || window_length % 2 == 0)
        throw std::invalid_argument("make_windows: window_length must be odd and positive");
    if (stride < 1) throw std::invalid_argument("make_windows: stride must be >= 1");
    const int64_t n = static_cast<int64_t>(pair.size());
    const int64_t w = window_length;
    const int64_t half = (w - 1) / 2;

    WindowedDataset ds;
    ds.window_length = window_length;
    ds.stats_in = stats_in;
    ds.stats_target = stats_target;

    auto spans_break = [&](int64_t a, int64_t b) {  // window covers [a, b)
        for (size_t k : pair.breaks)
            if (static_cast<int64_t>(k) > a && static_cast<int64_t>(k) < b) return true;
        return false;
    };

    auto push_row = [&](int64_t start /* index of window start, may be < 0 when padded */,
                        int64_t target_idx) {
        for (int64_t i = start; i < start + w; ++i) {
            const double raw = (i < 0 || i >= n) ? 0.0 : pair.aggregate[i];
            ds.inputs.push_back(static_cast<float>(normalize(raw, stats_in)));
        }
        ds.targets.push_back(static_cast<float>(normalize(pair.appliance[target_idx], stats_target)));
        ds.provenance.emplace_back(source_id, target_idx);
        ++ds.rows;
    };

    if (pad == WindowPad::None) {
        if (n < w)
            throw std::runtime_error("make_windows: series shorter than window (" +
                                     std::to_string(n) + " < " + std::to_string(w) + ")");
        for (int64_t a = 0; a + w <= n; a += stride) {
            if (spans_break(a, a + w)) continue;
            push_row(a, a + half);
        }
    } else {
        for (int64_t c = 0; c < n; c += stride) push_row(c - half, c);
    }
    return ds;
}

std::pair<WindowedDataset, WindowedDataset> split_dataset(const WindowedDataset& ds,
                                                          double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("split_dataset: fraction must be in (0,1)");
    const size_t cut = static_cast<size_t>(std::floor(static_cast<double>(ds.rows) * fraction));
    if (cut == 0 || cut == ds.rows)
        throw std::runtime_error("split_dataset: a side would be empty (" +
                                 std::to_string(ds.rows) + " rows, fraction " +
                                 std::to_string(fraction) + ")");
    auto slice = [&](size_t from, size_t to) {
        WindowedDataset out;
        out.window_length = ds.window_length;
        out.rows = to - from;
        out.stats_in = ds.stats_in;
        out.stats_target = ds.stats_target;
        const size_t w = static_cast<size_t>(ds.window_length);
        out.inputs.assign(ds.inputs.begin() + from * w, ds.inputs.begin() + to * w);
        out.targets.assign(ds.targets.begin() + from, ds.targets.begin() + to);
        out.provenance.assign(ds.provenance.begin() + from, ds.provenance.begin() + to);
        return out;
    };
    return {slice(0, cut), slice(cut, ds.rows)};
}

namespace {

void render_profile(const ApplianceProfile& p, std::vector<double>& out) {
    const int64_t n = static_cast<int64_t>(out.size());
    const double p_start = p.rate_per_1000 / 1000.0;
    int64_t t = 0;
    while (t < n) {
        if (rng::uniform01(p.seed, static_cast<uint64_t>(t)) < p_start) {
            const int64_t end = std::min(n, t + p.duration);
            for (int64_t i = t; i < end; ++i) {
                const int64_t k = i - t;
                switch (p.kind) {
                    case SignatureKind::RectangularPulse:
                        out[i] = p.amplitude;
                        break;
                    case SignatureKind::TwoLevelCycle:
                        out[i] = ((k / std::max<int64_t>(1, p.duty)) % 2 == 0)
                                     ? p.amplitude
                                     : p.amplitude_low;
                        break;
                    case SignatureKind::Ramp:
                        out[i] = p.amplitude * static_cast<double>(k + 1) /
                                 static_cast<double>(p.duration);
                        break;
                }
            }
            t = end;
        } else {
            ++t;
        }
    }
}

}  // namespace

SynthScene synth_generate(const std::vector<ApplianceProfile>& profiles, int64_t length,
                          double noise_sigma, uint64_t seed, int64_t period,
                          int64_t start_epoch) {
    if (profiles.empty()) throw std::invalid_argument("synth_generate: empty profile list");
    if (length < 1) throw std::invalid_argument("synth_generate: length must be >= 1");
    if (noise_sigma < 0.0) throw std::invalid_argument("synth_generate: negative noise sigma");

    SynthScene scene;
    std::vector<int64_t> ts(length);
    for (int64_t i = 0; i < length; ++i) ts[i] = start_epoch + i * period;

    std::vector<double> sum(length, 0.0);
    for (size_t pi = 0; pi < profiles.size(); ++pi) {
        ApplianceProfile p = profiles[pi];
        if (p.amplitude < 0.0 || p.amplitude_low < 0.0 || p.duration < 1)
            throw std::invalid_argument("synth_generate: bad profile " + p.name);
        p.seed = rng::hash2(seed, rng::hash2(0x5ce9e0, pi) ^ p.seed);
        std::vector<double> trace(length, 0.0);
        render_profile(p, trace);
        for (int64_t i = 0; i < length; ++i) sum[i] += trace[i];
        RawSeries app;
        app.timestamps = ts;
        app.watts = std::move(trace);
        scene.appliances.emplace_back(profiles[pi].name, std::move(app));
    }

    scene.noise.assign(length, 0.0);
    if (noise_sigma > 0.0) {
        std::mt19937_64 gen(rng::hash2(seed, 0x6e6f697365ULL));
        std::normal_distribution<double> dist(0.0, noise_sigma);
        for (int64_t i = 0; i < length; ++i) scene.noise[i] = dist(gen);
    }

    scene.clamped.assign(length, 0);
    scene.aggregate.timestamps = ts;
    scene.aggregate.watts.resize(length);
    for (int64_t i = 0; i < length; ++i) {
        double y = sum[i] + scene.noise[i];
        if (y < 0.0) {
            y = 0.0;
            scene.clamped[i] = 1;
        }
        scene.aggregate.watts[i] = y;
    }
    return scene;
}

std::optional<NormStats> appliance_default_stats(const std::string& name) {
    if (name == "kettle") return NormStats{700.0, 1000.0};
    if (name == "microwave") return NormStats{500.0, 800.0};
    if (name == "fridge") return NormStats{200.0, 400.0};
    if (name == "dish washer" || name == "dishwasher") return NormStats{700.0, 1000.0};
    if (name == "washing machine" || name == "washing_machine") return NormStats{400.0, 700.0};
    return std::nullopt;
}

NormStats compute_stats(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("compute_stats: empty input");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());
    NormStats s{mean, std::sqrt(var)};
    if (!(s.std > 0.0)) s.std = 1.0;  // constant series still normalizable
    return s;
}

}  // namespace bdrn::data
