#include "bdrn/workflows.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <json.hpp>

namespace bdrn::workflows {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

data::RawSeries read_channel(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open channel file: " + path.string());
    try {
        return data::parse_channel_file(in);
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

// Split-phase homes report mains on two channels; sum them on the union grid.
data::RawSeries sum_mains(const std::vector<data::RawSeries>& parts) {
    if (parts.size() == 1) return parts[0];
    data::RawSeries out = parts[0];
    for (size_t p = 1; p < parts.size(); ++p) {
        const auto& s = parts[p];
        data::RawSeries merged;
        size_t i = 0;
        for (size_t j = 0; j < s.size(); ++j) {
            // forward-fill the accumulated series onto this channel's grid
            while (i + 1 < out.size() && out.timestamps[i + 1] <= s.timestamps[j]) ++i;
            if (out.timestamps[i] > s.timestamps[j]) continue;
            merged.timestamps.push_back(s.timestamps[j]);
            merged.watts.push_back(out.watts[i] + s.watts[j]);
        }
        if (merged.size() == 0) throw std::runtime_error("mains channels do not overlap");
        merged.clamped_negative = out.clamped_negative + s.clamped_negative;
        out = std::move(merged);
    }
    return out;
}

}  // namespace

Ingested ingest(const config::RunConfig& cfg, const std::string& data_dir) {
    if (cfg.data.mains.empty()) throw std::runtime_error("data.mains lists no channel files");
    if (cfg.data.appliance_file.empty())
        throw std::runtime_error("data.appliance_file is not set");
    std::vector<data::RawSeries> mains_parts;
    for (const auto& m : cfg.data.mains)
        mains_parts.push_back(read_channel(fs::path(data_dir) / m));
    data::RawSeries mains = sum_mains(mains_parts);
    data::RawSeries appliance = read_channel(fs::path(data_dir) / cfg.data.appliance_file);

    Ingested out;
    out.pair = data::align_series(mains, appliance, cfg.data.period, cfg.data.gap_limit);
    out.stats_target = config::target_stats(cfg.appliance);

    // Aggregate-side stats come from the training span only.
    const size_t n_train_span = static_cast<size_t>(
        std::floor(static_cast<double>(out.pair.size()) * cfg.data.train_fraction));
    std::vector<double> train_span(out.pair.aggregate.begin(),
                                   out.pair.aggregate.begin() + n_train_span);
    out.stats_in = data::compute_stats(train_span);

    data::WindowedDataset all =
        data::make_windows(out.pair, out.stats_in, out.stats_target, cfg.model.window_length,
                           cfg.data.stride, data::WindowPad::None);
    auto [train_all, test] = data::split_dataset(all, cfg.data.train_fraction);
    auto [train, val] = data::split_dataset(train_all, 1.0 - cfg.train.validation_fraction);
    out.train_set = std::move(train);
    out.val_set = std::move(val);
    out.test_set = std::move(test);
    return out;
}

void run_synth(const config::RunConfig& cfg, const std::string& out_dir) {
    if (!cfg.synth.seed) throw std::runtime_error("config key 'synth.seed' is required");
    if (cfg.synth.profiles.empty())
        throw std::runtime_error("config key 'synth.profiles' lists no profiles");
    data::SynthScene scene =
        data::synth_generate(cfg.synth.profiles, cfg.synth.length, cfg.synth.noise_sigma,
                             *cfg.synth.seed, cfg.synth.period, cfg.synth.start_epoch);
    fs::create_directories(out_dir);
    auto write = [&](const std::string& name, const data::RawSeries& s) {
        std::ofstream f(fs::path(out_dir) / name);
        if (!f) throw std::runtime_error("cannot write " + (fs::path(out_dir) / name).string());
        data::write_channel_file(s, f);
    };
    write("aggregate.dat", scene.aggregate);
    std::ofstream labels(fs::path(out_dir) / "labels.dat");
    labels << "1 mains\n";
    for (size_t i = 0; i < scene.appliances.size(); ++i) {
        write(scene.appliances[i].first + ".dat", scene.appliances[i].second);
        labels << (i + 2) << " " << scene.appliances[i].first << "\n";
    }
    int64_t clamped = 0;
    for (uint8_t c : scene.clamped) clamped += c;
    json manifest = {{"seed", *cfg.synth.seed},
                     {"length", cfg.synth.length},
                     {"noise_sigma", cfg.synth.noise_sigma},
                     {"period", cfg.synth.period},
                     {"start_epoch", cfg.synth.start_epoch},
                     {"profiles", json::array()},
                     {"clamped_samples", clamped}};
    for (const auto& p : cfg.synth.profiles)
        manifest["profiles"].push_back({{"name", p.name}, {"amplitude", p.amplitude}});
    std::ofstream mf(fs::path(out_dir) / "manifest.json");
    mf << manifest.dump(2) << "\n";
}

train::History run_train(const config::RunConfig& cfg, const std::string& data_dir,
                         const std::string& out_model_path, bool quiet) {
    Ingested d = ingest(cfg, data_dir);
    Model<float> model = build_network<float>(cfg.model, cfg.train.shuffle_seed);
    train::TrainConfig tc = cfg.train;
    tc.quiet = quiet;
    train::History hist = train::fit(model, d.train_set, d.val_set, tc);
    io::save_weights(model, out_model_path);

    json h = {{"best_epoch", hist.best_epoch}, {"epochs", json::array()}};
    for (size_t e = 0; e < hist.train_loss.size(); ++e)
        h["epochs"].push_back({{"epoch", e},
                               {"train_mse", hist.train_loss[e]},
                               {"val_mse", hist.val_loss[e]},
                               {"seconds", hist.seconds[e]}});
    std::ofstream hf(out_model_path + ".history.json");
    hf << h.dump(2) << "\n";
    return hist;
}

train::MetricsReport run_eval(const config::RunConfig& cfg, const std::string& model_path,
                              const std::string& data_dir, const std::string& out_dir) {
    Ingested d = ingest(cfg, data_dir);
    Model<float> model = io::load_weights<float>(cfg.model, model_path);

    std::vector<float> z = train::predict_midpoints(model, d.test_set);
    std::vector<double> pred(z.size()), truth(z.size());
    for (size_t i = 0; i < z.size(); ++i) {
        pred[i] = std::max(0.0, data::denormalize(z[i], d.stats_target));
        truth[i] = data::denormalize(d.test_set.targets[i], d.stats_target);
    }

    train::ApplianceResult row;
    row.name = cfg.appliance.name.empty() ? "appliance" : cfg.appliance.name;
    row.mae_watts = train::mae(pred, truth);
    row.sae = train::sae(pred, truth);
    train::MetricsReport report = train::build_report({row});

    fs::create_directories(out_dir);
    std::ofstream txt(fs::path(out_dir) / "metrics.txt");
    txt << train::format_report(report);
    json j = {{"rows", json::array()},
              {"overall", {{"appliance", "overall"},
                           {"mae_watts", report.overall.mae_watts},
                           {"sae", report.overall.sae}}}};
    for (const auto& r : report.rows)
        j["rows"].push_back(
            {{"appliance", r.name}, {"mae_watts", r.mae_watts}, {"sae", r.sae}});
    std::ofstream jf(fs::path(out_dir) / "metrics.json");
    jf << j.dump(2) << "\n";

    // Plot data: one row per test window midpoint.
    std::ofstream pf(fs::path(out_dir) / "plotdata.tsv");
    pf << "timestamp\taggregate\ttruth\tprediction\n";
    for (size_t i = 0; i < pred.size(); ++i) {
        const int64_t idx = d.test_set.provenance[i].second;
        pf << d.pair.timestamps[idx] << "\t" << d.pair.aggregate[idx] << "\t" << truth[i] << "\t"
           << pred[i] << "\n";
    }
    return report;
}

void run_disaggregate(const config::RunConfig& cfg, const std::string& model_path,
                      const std::string& mains_file, const std::string& out_file) {
    data::RawSeries mains = read_channel(mains_file);
    Model<float> model = io::load_weights<float>(cfg.model, model_path);
    data::NormStats stats_target = config::target_stats(cfg.appliance);
    // Without a training run attached, normalize the input by its own stats.
    data::NormStats stats_in = data::compute_stats(mains.watts);
    std::vector<double> est = train::disaggregate(model, mains.watts, stats_in, stats_target);
    data::RawSeries out;
    out.timestamps = mains.timestamps;
    out.watts = std::move(est);
    std::ofstream f(out_file);
    if (!f) throw std::runtime_error("cannot write " + out_file);
    data::write_channel_file(out, f);
}

void run_inspect(const config::RunConfig& cfg, std::ostream& out) {
    cfg.model.validate();
    Model<float> model = build_network<float>(cfg.model, 0);
    const ReceptiveField rf = model.receptive_field();
    out << "receptive field: length " << rf.length << " (extents " << rf.left_extent << "/"
        << rf.right_extent << ")\n";
    if (rf.length > cfg.model.window_length)
        out << "note: receptive field exceeds the " << cfg.model.window_length
            << "-sample window; edge taps read zero padding\n";
    out << "\nlayer breakdown (window " << cfg.model.window_length << "):\n";
    int64_t running = 0;
    model.for_each_param([&](const std::string& name, TensorF& t) {
        running += t.numel();
        out << "  " << name << "  " << t.shape_str() << "  " << t.numel() << "\n";
    });
    const int64_t learnable = model.param_count();
    const int64_t with_stats = model.state_count();
    out << "\nlearnable parameters: " << learnable << "\n";
    out << "with batch-norm running statistics: " << with_stats << "\n";
    if (running != learnable) out << "accounting mismatch!\n";
    const int64_t reference = 912641;  // published size of the original model
    out << "published reference count: " << reference << " (delta " << (learnable - reference)
        << "; the original layer composition is not fully specified, so counts are "
           "reported rather than matched)\n";
}

}  // namespace bdrn::workflows
