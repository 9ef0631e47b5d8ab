#pragma once

#include <string>
#include <vector>

#include "bdrn/data.hpp"
#include "bdrn/model.hpp"

namespace bdrn::train {

struct TrainConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int batch_size = 512;
    int max_epochs = 50;
    int early_stop_patience = 5;
    uint64_t shuffle_seed = 1;
    double validation_fraction = 0.1;
    bool quiet = true;
};

struct History {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    std::vector<double> seconds;
    int best_epoch = -1;
};

/// Adam + MSE with seeded shuffling and early stopping on validation loss;
/// the model is left at the best-validation snapshot.
History fit(Model<float>& model, const data::WindowedDataset& train_set,
            const data::WindowedDataset& val_set, const TrainConfig& cfg);

std::vector<float> predict_midpoints(Model<float>& model, const data::WindowedDataset& ds,
                                     int batch_size = 512);

/// Full-sequence disaggregation: zero-pad a half window each side, slide at
/// stride 1, denormalize, clamp negatives. Output length == input length.
std::vector<double> disaggregate(Model<float>& model, const std::vector<double>& aggregate_watts,
                                 const data::NormStats& stats_in,
                                 const data::NormStats& stats_target, int batch_size = 512);

double mae(const std::vector<double>& pred, const std::vector<double>& truth);
double sae(const std::vector<double>& pred, const std::vector<double>& truth);

struct ApplianceResult {
    std::string name;
    double mae_watts = 0.0;
    double sae = 0.0;
};

struct MetricsReport {
    std::vector<ApplianceResult> rows;
    ApplianceResult overall;  // arithmetic mean of per-appliance values
};

MetricsReport build_report(const std::vector<ApplianceResult>& rows);
std::string format_report(const MetricsReport& r);

}  // namespace bdrn::train
