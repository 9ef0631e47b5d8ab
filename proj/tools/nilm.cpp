#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "bdrn/runtime.hpp"
#include "bdrn/workflows.hpp"

// nilm: synth | train | eval | disaggregate | inspect
// Worker count comes from NILM_WORKERS (default 1).

int main(int argc, char** argv) {
    CLI::App app{"Sequence-to-point NILM toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // accept --config and friends after the subcommand name

    std::string config_path, out = ".", model_path, mains_file, data_dir;
    int64_t seed_override = -1;
    bool quiet = false;
    app.add_option("--config", config_path, "run configuration file (JSON)")->required();
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_flag("--quiet", quiet, "suppress progress output");

    auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
    synth->add_option("--out", out, "output directory")->required();

    auto* train = app.add_subcommand("train", "train a model");
    train->add_option("--data", data_dir, "directory with channel files")->required();
    train->add_option("--out", model_path, "output weights file")->required();

    auto* eval = app.add_subcommand("eval", "evaluate on the test split");
    eval->add_option("--model", model_path, "weights file")->required();
    eval->add_option("--data", data_dir, "directory with channel files")->required();
    eval->add_option("--out", out, "output directory")->required();

    auto* disagg = app.add_subcommand("disaggregate", "full-sequence disaggregation");
    disagg->add_option("--model", model_path, "weights file")->required();
    disagg->add_option("--mains", mains_file, "aggregate channel file")->required();
    disagg->add_option("--out", out, "output prediction file")->required();

    auto* inspect = app.add_subcommand("inspect", "architecture and parameter report");

    CLI11_PARSE(app, argc, argv);

    try {
        bdrn::config::RunConfig cfg = bdrn::config::load_config(config_path);
        if (seed_override >= 0) {
            cfg.train.shuffle_seed = static_cast<uint64_t>(seed_override);
            cfg.synth.seed = static_cast<uint64_t>(seed_override);
        }
        if (synth->parsed()) {
            bdrn::workflows::run_synth(cfg, out);
            if (!quiet) std::cout << "scene written to " << out << "\n";
        } else if (train->parsed()) {
            auto hist = bdrn::workflows::run_train(cfg, data_dir, model_path, quiet);
            if (!quiet)
                std::cout << "best epoch " << hist.best_epoch << ", val MSE "
                          << (hist.best_epoch >= 0 ? hist.val_loss[hist.best_epoch] : 0.0)
                          << "; weights at " << model_path << "\n";
        } else if (eval->parsed()) {
            auto report = bdrn::workflows::run_eval(cfg, model_path, data_dir, out);
            std::cout << bdrn::train::format_report(report);
        } else if (disagg->parsed()) {
            bdrn::workflows::run_disaggregate(cfg, model_path, mains_file, out);
            if (!quiet) std::cout << "predictions written to " << out << "\n";
        } else if (inspect->parsed()) {
            bdrn::workflows::run_inspect(cfg, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
