#include "bdrn/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace bdrn::config {

using nlohmann::json;

namespace {

struct Validator {
    std::vector<std::string> errors;

    void unknown_keys(const json& obj, const std::string& section,
                      const std::set<std::string>& allowed) {
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!allowed.count(it.key()))
                errors.push_back("unknown key '" + section + it.key() + "'");
    }

    template <typename T>
    void get(const json& obj, const std::string& section, const char* key, T& out) {
        if (obj.contains(key)) {
            try {
                out = obj.at(key).get<T>();
            } catch (const json::exception& e) {
                errors.push_back("bad value for '" + section + key + "': " + e.what());
            }
        }
    }

    void require(bool ok, const std::string& msg) {
        if (!ok) errors.push_back(msg);
    }
};

data::SignatureKind parse_kind(const std::string& s, Validator& v) {
    if (s == "rect" || s == "rectangular") return data::SignatureKind::RectangularPulse;
    if (s == "two-level" || s == "two_level") return data::SignatureKind::TwoLevelCycle;
    if (s == "ramp") return data::SignatureKind::Ramp;
    v.errors.push_back("unknown profile kind '" + s + "' (rect | two-level | ramp)");
    return data::SignatureKind::RectangularPulse;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("config is not valid JSON: ") + e.what());
    }

    Validator v;
    RunConfig cfg;
    v.unknown_keys(root, "", {"data", "appliance", "model", "train", "synth"});

    if (root.contains("data")) {
        const json& d = root["data"];
        v.unknown_keys(d, "data.", {"mains", "appliance_file", "period", "gap_limit",
                                    "train_fraction", "stride"});
        v.get(d, "data.", "mains", cfg.data.mains);
        v.get(d, "data.", "appliance_file", cfg.data.appliance_file);
        v.get(d, "data.", "period", cfg.data.period);
        v.get(d, "data.", "gap_limit", cfg.data.gap_limit);
        v.get(d, "data.", "train_fraction", cfg.data.train_fraction);
        v.get(d, "data.", "stride", cfg.data.stride);
        v.require(cfg.data.period > 0, "data.period must be positive");
        v.require(cfg.data.train_fraction > 0.0 && cfg.data.train_fraction < 1.0,
                  "data.train_fraction must be in (0,1)");
        v.require(cfg.data.stride >= 1, "data.stride must be >= 1");
    }

    if (root.contains("appliance")) {
        const json& a = root["appliance"];
        v.unknown_keys(a, "appliance.", {"name", "mean", "std"});
        v.get(a, "appliance.", "name", cfg.appliance.name);
        if (a.contains("mean")) cfg.appliance.mean = a["mean"].get<double>();
        if (a.contains("std")) cfg.appliance.std = a["std"].get<double>();
        if (cfg.appliance.std) v.require(*cfg.appliance.std > 0.0, "appliance.std must be > 0");
    }

    if (root.contains("model")) {
        const json& m = root["model"];
        v.unknown_keys(m, "model.",
                       {"window_length", "blocks", "filters", "kernel", "dropout_rate"});
        int window = 599, blocks = 8, filters = 128, kernel = 3;
        double dropout = 0.1;
        v.get(m, "model.", "window_length", window);
        v.get(m, "model.", "blocks", blocks);
        v.get(m, "model.", "filters", filters);
        v.get(m, "model.", "kernel", kernel);
        v.get(m, "model.", "dropout_rate", dropout);
        v.require(window >= 1 && window % 2 == 1, "model.window_length must be odd and positive");
        v.require(blocks >= 1, "model.blocks must be >= 1");
        v.require(filters >= 1, "model.filters must be >= 1");
        v.require(kernel >= 1 && kernel % 2 == 1, "model.kernel must be odd");
        v.require(dropout >= 0.0 && dropout < 1.0, "model.dropout_rate must be in [0,1)");
        if (v.errors.empty()) {
            cfg.model = NetworkConfig::defaults(blocks, filters, kernel, window);
            cfg.model.dropout_rate = dropout;
        }
    }

    if (root.contains("train")) {
        const json& t = root["train"];
        v.unknown_keys(t, "train.",
                       {"learning_rate", "beta1", "beta2", "eps", "batch_size", "max_epochs",
                        "early_stop_patience", "seed", "validation_fraction"});
        v.get(t, "train.", "learning_rate", cfg.train.learning_rate);
        v.get(t, "train.", "beta1", cfg.train.beta1);
        v.get(t, "train.", "beta2", cfg.train.beta2);
        v.get(t, "train.", "eps", cfg.train.eps);
        v.get(t, "train.", "batch_size", cfg.train.batch_size);
        v.get(t, "train.", "max_epochs", cfg.train.max_epochs);
        v.get(t, "train.", "early_stop_patience", cfg.train.early_stop_patience);
        v.get(t, "train.", "seed", cfg.train.shuffle_seed);
        v.get(t, "train.", "validation_fraction", cfg.train.validation_fraction);
        v.require(cfg.train.learning_rate > 0.0, "train.learning_rate must be > 0");
        v.require(cfg.train.batch_size >= 1, "train.batch_size must be >= 1");
        v.require(cfg.train.early_stop_patience >= 1, "train.early_stop_patience must be >= 1");
    }

    if (root.contains("synth")) {
        const json& s = root["synth"];
        v.unknown_keys(s, "synth.",
                       {"seed", "length", "noise_sigma", "period", "start_epoch", "profiles"});
        if (s.contains("seed"))
            cfg.synth.seed = s["seed"].get<uint64_t>();
        v.get(s, "synth.", "length", cfg.synth.length);
        v.get(s, "synth.", "noise_sigma", cfg.synth.noise_sigma);
        v.get(s, "synth.", "period", cfg.synth.period);
        v.get(s, "synth.", "start_epoch", cfg.synth.start_epoch);
        v.require(cfg.synth.length >= 1, "synth.length must be >= 1");
        v.require(cfg.synth.noise_sigma >= 0.0, "synth.noise_sigma must be >= 0");
        if (s.contains("profiles")) {
            for (size_t i = 0; i < s["profiles"].size(); ++i) {
                const json& p = s["profiles"][i];
                const std::string sec = "synth.profiles[" + std::to_string(i) + "].";
                v.unknown_keys(p, sec,
                               {"name", "kind", "amplitude", "amplitude_low", "duration", "duty",
                                "rate_per_1000", "seed"});
                data::ApplianceProfile prof;
                v.get(p, sec, "name", prof.name);
                std::string kind = "rect";
                v.get(p, sec, "kind", kind);
                prof.kind = parse_kind(kind, v);
                v.get(p, sec, "amplitude", prof.amplitude);
                v.get(p, sec, "amplitude_low", prof.amplitude_low);
                v.get(p, sec, "duration", prof.duration);
                v.get(p, sec, "duty", prof.duty);
                v.get(p, sec, "rate_per_1000", prof.rate_per_1000);
                v.get(p, sec, "seed", prof.seed);
                v.require(prof.amplitude >= 0.0 && prof.amplitude_low >= 0.0,
                          sec + "amplitudes must be >= 0");
                v.require(prof.duration >= 1, sec + "duration must be >= 1");
                cfg.synth.profiles.push_back(std::move(prof));
            }
        }
    }

    if (!v.errors.empty()) {
        std::ostringstream os;
        os << "config validation failed:";
        for (const auto& e : v.errors) os << "\n  - " << e;
        throw std::runtime_error(os.str());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

data::NormStats target_stats(const ApplianceConfig& a) {
    auto def = data::appliance_default_stats(a.name);
    if (!def && !(a.mean && a.std))
        throw std::runtime_error("no normalization stats for appliance '" + a.name +
                                 "'; set appliance.mean and appliance.std");
    data::NormStats s = def.value_or(data::NormStats{});
    if (a.mean) s.mean = *a.mean;
    if (a.std) s.std = *a.std;
    if (!(s.std > 0.0)) throw std::runtime_error("appliance.std must be > 0");
    return s;
}

}  // namespace bdrn::config
