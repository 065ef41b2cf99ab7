// Command-line front end for the digital-twin toolkit.
//
// Subcommands: generate, preprocess, train, evaluate, ablate.
// Exit codes: 0 success, 2 usage error, 3 missing/unreadable file,
// 4 invalid config or data, 5 runtime failure.

#include "dtwin/experiment.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitInvalid = 4;
constexpr int kExitRuntime = 5;

dtwin::StageToggles parse_stage_list(const std::string& list) {
    if (list == "none") {
        return {false, false, false};
    }
    if (list == "all") {
        return {true, true, true};
    }
    dtwin::StageToggles stages{false, false, false};
    std::stringstream in(list);
    std::string token;
    while (std::getline(in, token, ',')) {
        if (token == "index") {
            stages.indexing = true;
        } else if (token == "augment") {
            stages.augmentation = true;
        } else if (token == "oversample") {
            stages.oversampling = true;
        } else {
            throw dtwin::validation_error(
                "unknown stage '" + token +
                "' (expected a comma-separated list of index, augment, oversample; or none/all)");
        }
    }
    return stages;
}

std::vector<int> parse_layer_list(const std::string& list) {
    std::vector<int> sizes;
    std::stringstream in(list);
    std::string token;
    while (std::getline(in, token, ',')) {
        try {
            sizes.push_back(std::stoi(token));
        } catch (const std::exception&) {
            throw dtwin::validation_error("malformed layer size: '" + token + "'");
        }
    }
    return sizes;
}

struct GenerateArgs {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

struct PreprocessArgs {
    std::string in;
    std::string stages;
    std::string out;
    std::string scaling_in;
    std::string scaling_out;
    std::string audit;
    dtwin::IndexingConfig indexing{};
    dtwin::AugmentationConfig augmentation{};
    dtwin::OversamplingConfig oversampling{};
};

struct TrainArgs {
    std::string in;
    std::string model_out;
    std::string layers = "3,32,32,1";
    std::string activation = "tanh";
    std::string optimizer = "adaptive-moments";
    std::string lr_decay = "none";
    dtwin::MlpConfig cfg{};
};

struct EvaluateArgs {
    std::string model;
    std::string test;
    std::string name = "evaluate";
    std::string predictions;
};

struct AblateArgs {
    std::string config;
    std::string report;
};

void run_generate(const GenerateArgs& args) {
    dtwin::RunConfig cfg = dtwin::load_run_config(args.config);
    if (args.seed_given) {
        cfg.seed = args.seed;
    }
    const dtwin::RawDataset data = dtwin::generate_program(cfg.program, cfg.plant, cfg.seed);
    dtwin::save_csv(data, args.out);
    std::cout << "wrote " << data.size() << " records (" << cfg.program.size() << " runs) to "
              << args.out << "\n";
}

void run_preprocess(const PreprocessArgs& args) {
    const dtwin::RawDataset raw = dtwin::load_csv(args.in);
    const dtwin::StageToggles stages = parse_stage_list(args.stages);
    const dtwin::ScalingState scaling = args.scaling_in.empty()
                                            ? dtwin::fit_scaling(raw)
                                            : dtwin::load_scaling(args.scaling_in);
    const dtwin::PipelineResult result = dtwin::run_pipeline(
        raw, stages, args.indexing, args.augmentation, args.oversampling, scaling);
    dtwin::save_prepared_csv(result.data, args.out);
    if (!args.scaling_out.empty()) {
        dtwin::save_scaling(scaling, args.scaling_out);
    }
    if (!args.audit.empty()) {
        dtwin::save_audit(result.audit, args.audit);
    }
    std::cout << "prepared " << result.data.size() << " examples from " << raw.size()
              << " records into " << args.out << "\n";
}

void run_train(TrainArgs& args) {
    args.cfg.layer_sizes = parse_layer_list(args.layers);
    args.cfg.activation = dtwin::activation_from_name(args.activation);
    args.cfg.optimizer = dtwin::optimizer_from_name(args.optimizer);
    args.cfg.lr_decay = dtwin::lr_decay_from_name(args.lr_decay);

    const dtwin::PreparedDataset data = dtwin::load_prepared_csv(args.in);
    const dtwin::MlpModel initial = dtwin::init_model(args.cfg);
    const dtwin::TrainResult result = dtwin::train(initial, data, args.cfg);
    dtwin::save_model(result.model, args.model_out);
    std::cout << "trained on " << data.size() << " examples for " << args.cfg.epochs
              << " epochs; final train MSE " << dtwin::format_double(result.model.final_train_loss)
              << "; model saved to " << args.model_out << "\n";
}

void run_evaluate(const EvaluateArgs& args) {
    const dtwin::MlpModel model = dtwin::load_model(args.model);
    const dtwin::PreparedDataset test = dtwin::load_prepared_csv(args.test);
    const Eigen::VectorXd predictions = dtwin::forward(model, test.x);
    const dtwin::MetricReport report = dtwin::evaluate(test.y, predictions);
    if (!args.predictions.empty()) {
        dtwin::dump_predictions(model, test, args.predictions);
    }
    std::cout << "config_name,r2,mse,mae,n\n" << dtwin::to_csv_row(args.name, report) << "\n";
}

void run_ablate(const AblateArgs& args) {
    const dtwin::RunConfig cfg = dtwin::load_run_config(args.config);
    const dtwin::RawDataset data = dtwin::generate_program(cfg.program, cfg.plant, cfg.seed);

    std::filesystem::path report_path(args.report);
    std::filesystem::path artifacts_dir = report_path.parent_path();
    if (artifacts_dir.empty()) {
        artifacts_dir = ".";
    }
    const dtwin::AblationReport report = dtwin::run_ablation(cfg, data, artifacts_dir);
    dtwin::save_report(report, report_path);

    std::cout << "config_name,r2,mse,mae,n\n";
    for (const dtwin::ConfigResult& row : report.rows) {
        std::cout << dtwin::to_csv_row(row.name, row.metrics) << "\n";
    }
    std::cout << "report written to " << args.report << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Digital-twin toolkit for a semi-active shock absorber"};
    app.require_subcommand(1);

    GenerateArgs gen;
    CLI::App* generate = app.add_subcommand("generate", "Simulate the test program to a CSV");
    generate->add_option("--config", gen.config, "Run config JSON")->required();
    generate->add_option("--out", gen.out, "Output CSV path")->required();
    generate->add_option("--seed", gen.seed, "Generation seed (overrides the config)")
        ->each([&gen](const std::string&) { gen.seed_given = true; });

    PreprocessArgs pre;
    CLI::App* preprocess =
        app.add_subcommand("preprocess", "Scale a raw CSV and apply preparation stages");
    preprocess->add_option("--in", pre.in, "Input raw CSV")->required();
    preprocess
        ->add_option("--stages", pre.stages,
                     "Comma-separated stages (index,augment,oversample) or none/all")
        ->required();
    preprocess->add_option("--out", pre.out, "Output prepared CSV")->required();
    preprocess->add_option("--scaling-in", pre.scaling_in,
                           "Use a previously fitted scaling state JSON");
    preprocess->add_option("--scaling-out", pre.scaling_out, "Write the scaling state JSON");
    preprocess->add_option("--audit", pre.audit, "Write the stage audit CSV");
    preprocess->add_option("--threshold", pre.indexing.threshold, "Indexing threshold, mm");
    preprocess->add_option("--mu", pre.augmentation.mu, "Augmentation noise mean");
    preprocess->add_option("--sigma", pre.augmentation.sigma, "Augmentation noise sd");
    preprocess->add_option("--aug-seed", pre.augmentation.seed, "Augmentation seed");
    preprocess->add_option("--bins", pre.oversampling.n_bins, "Oversampling histogram bins");
    preprocess->add_option("--os-seed", pre.oversampling.seed, "Oversampling seed");

    TrainArgs tr;
    CLI::App* train = app.add_subcommand("train", "Train the regressor on a prepared CSV");
    train->add_option("--in", tr.in, "Input prepared CSV")->required();
    train->add_option("--model-out", tr.model_out, "Output model JSON")->required();
    train->add_option("--layers", tr.layers, "Layer sizes, e.g. 3,32,32,1");
    train->add_option("--activation", tr.activation, "Hidden activation (tanh|relu)");
    train->add_option("--lr", tr.cfg.learning_rate, "Learning rate");
    train->add_option("--batch", tr.cfg.batch_size, "Mini-batch size");
    train->add_option("--epochs", tr.cfg.epochs, "Training epochs");
    train->add_option("--seed", tr.cfg.seed, "Training seed");
    train->add_option("--optimizer", tr.optimizer, "sgd-momentum|adaptive-moments");
    train->add_option("--lr-decay", tr.lr_decay, "Learning-rate schedule (none|cosine)");
    train->add_option("--momentum", tr.cfg.momentum, "SGD momentum coefficient");

    EvaluateArgs ev;
    CLI::App* evaluate = app.add_subcommand("evaluate", "Evaluate a model on a prepared CSV");
    evaluate->add_option("--model", ev.model, "Model JSON")->required();
    evaluate->add_option("--test", ev.test, "Prepared test CSV")->required();
    evaluate->add_option("--name", ev.name, "Report row name");
    evaluate->add_option("--predictions", ev.predictions, "Write predictions CSV");

    AblateArgs ab;
    CLI::App* ablate = app.add_subcommand("ablate", "Run the full ablation study");
    ablate->add_option("--config", ab.config, "Run config JSON")->required();
    ablate->add_option("--report", ab.report, "Output report CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (generate->parsed()) {
            run_generate(gen);
        } else if (preprocess->parsed()) {
            run_preprocess(pre);
        } else if (train->parsed()) {
            run_train(tr);
        } else if (evaluate->parsed()) {
            run_evaluate(ev);
        } else if (ablate->parsed()) {
            run_ablate(ab);
        }
    } catch (const dtwin::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const dtwin::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
