#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bdrn/data.hpp"
#include "bdrn/model.hpp"
#include "bdrn/train.hpp"

namespace bdrn::config {

struct DataConfig {
    std::vector<std::string> mains;  // summed when more than one (split-phase)
    std::string appliance_file;
    int64_t period = 6;
    int64_t gap_limit = 3;
    double train_fraction = 0.8;
    int stride = 1;
};

struct ApplianceConfig {
    std::string name;
    std::optional<double> mean;  // default from the built-in per-appliance table
    std::optional<double> std;
};

struct SynthConfig {
    std::optional<uint64_t> seed;  // required; fail-closed
    int64_t length = 20000;
    double noise_sigma = 0.0;
    int64_t period = 6;
    int64_t start_epoch = 0;
    std::vector<data::ApplianceProfile> profiles;
};

struct RunConfig {
    DataConfig data;
    ApplianceConfig appliance;
    NetworkConfig model = NetworkConfig::defaults();
    train::TrainConfig train;
    SynthConfig synth;
};

/// Parses and validates a config file. Unknown keys are errors; all
/// violations are reported at once.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

/// Normalization stats for the target appliance: explicit values win,
/// then the built-in per-name defaults.
data::NormStats target_stats(const ApplianceConfig& a);

}  // namespace bdrn::config
