#pragma once

#include <iosfwd>

#include "bdrn/config.hpp"
#include "bdrn/serialize.hpp"
#include "bdrn/train.hpp"

// End-to-end command workflows shared by the CLI and the acceptance suite.

namespace bdrn::workflows {

struct Ingested {
    data::AlignedPair pair;
    data::NormStats stats_in;      // aggregate stats over the training span
    data::NormStats stats_target;  // appliance stats (per-name defaults or config)
    data::WindowedDataset train_set, val_set, test_set;
};

/// Parse -> align -> normalize -> window -> chronological splits.
Ingested ingest(const config::RunConfig& cfg, const std::string& data_dir);

void run_synth(const config::RunConfig& cfg, const std::string& out_dir);

train::History run_train(const config::RunConfig& cfg, const std::string& data_dir,
                         const std::string& out_model_path, bool quiet = true);

train::MetricsReport run_eval(const config::RunConfig& cfg, const std::string& model_path,
                              const std::string& data_dir, const std::string& out_dir);

void run_disaggregate(const config::RunConfig& cfg, const std::string& model_path,
                      const std::string& mains_file, const std::string& out_file);

void run_inspect(const config::RunConfig& cfg, std::ostream& out);

}  // namespace bdrn::workflows
