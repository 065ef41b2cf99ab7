#include "dtwin/experiment.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <utility>

namespace dtwin {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

PreparedDataset take_rows(const PreparedDataset& data, const std::vector<Eigen::Index>& rows) {
    PreparedDataset out;
    const auto n = static_cast<Eigen::Index>(rows.size());
    out.x.resize(n, data.x.cols());
    out.y.resize(n);
    out.provenance.resize(rows.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index src = rows[static_cast<std::size_t>(i)];
        out.x.row(i) = data.x.row(src);
        out.y[i] = data.y[src];
        out.provenance[static_cast<std::size_t>(i)] =
            data.provenance[static_cast<std::size_t>(src)];
    }
    return out;
}

std::vector<std::string> stage_tokens(const StageToggles& stages) {
    std::vector<std::string> tokens;
    if (stages.indexing) tokens.emplace_back("index");
    if (stages.augmentation) tokens.emplace_back("augment");
    if (stages.oversampling) tokens.emplace_back("oversample");
    return tokens;
}

StageToggles stages_from_tokens(const std::vector<std::string>& tokens) {
    StageToggles stages{false, false, false};
    for (const std::string& token : tokens) {
        if (token == "index") {
            stages.indexing = true;
        } else if (token == "augment") {
            stages.augmentation = true;
        } else if (token == "oversample") {
            stages.oversampling = true;
        } else {
            throw validation_error("unknown pipeline stage: '" + token +
                                   "' (expected index, augment, or oversample)");
        }
    }
    return stages;
}

ordered_json plant_to_json(const PlantParams& p) {
    return {{"m_s", p.m_s},
            {"m_u", p.m_u},
            {"k_s", p.k_s},
            {"k_t", p.k_t},
            {"k_d_min", p.k_d_min},
            {"k_d_max", p.k_d_max},
            {"I_min", p.I_min},
            {"I_max", p.I_max},
            {"dt", p.dt},
            {"sensor_noise_sd", p.sensor_noise_sd},
            {"damper_comp_scale", p.damper_comp_scale},
            {"damper_reb_scale", p.damper_reb_scale}};
}

void plant_from_json(const json& doc, PlantParams& p) {
    p.m_s = doc.value("m_s", p.m_s);
    p.m_u = doc.value("m_u", p.m_u);
    p.k_s = doc.value("k_s", p.k_s);
    p.k_t = doc.value("k_t", p.k_t);
    p.k_d_min = doc.value("k_d_min", p.k_d_min);
    p.k_d_max = doc.value("k_d_max", p.k_d_max);
    p.I_min = doc.value("I_min", p.I_min);
    p.I_max = doc.value("I_max", p.I_max);
    p.dt = doc.value("dt", p.dt);
    p.sensor_noise_sd = doc.value("sensor_noise_sd", p.sensor_noise_sd);
    p.damper_comp_scale = doc.value("damper_comp_scale", p.damper_comp_scale);
    p.damper_reb_scale = doc.value("damper_reb_scale", p.damper_reb_scale);
}

ordered_json run_to_json(const TestRunSpec& spec) {
    return {{"run_id", spec.run_id},
            {"I", spec.I},
            {"V", spec.V},
            {"duration", spec.duration},
            {"profile",
             {{"kind", road_kind_name(spec.profile.kind)},
              {"bump_height", spec.profile.bump_height},
              {"bump_length", spec.profile.bump_length},
              {"force_amplitude", spec.profile.force_amplitude}}}};
}

TestRunSpec run_from_json(const json& doc) {
    TestRunSpec spec;
    spec.run_id = doc.at("run_id").get<int>();
    spec.I = doc.at("I").get<double>();
    spec.V = doc.at("V").get<double>();
    spec.duration = doc.value("duration", spec.duration);
    if (doc.contains("profile")) {
        const json& prof = doc["profile"];
        spec.profile.kind = road_kind_from_name(prof.value("kind", "cosine-bump"));
        spec.profile.bump_height = prof.value("bump_height", spec.profile.bump_height);
        spec.profile.bump_length = prof.value("bump_length", spec.profile.bump_length);
        spec.profile.force_amplitude =
            prof.value("force_amplitude", spec.profile.force_amplitude);
    }
    return spec;
}

}  // namespace

std::vector<AblationConfig> default_configurations() {
    return {{"full", {true, true, true}},
            {"no-oversample", {true, true, false}},
            {"no-augment", {true, false, false}},
            {"raw", {false, false, false}}};
}

RunConfig default_run_config() {
    RunConfig cfg;

    // Plant settings of the synthetic study: a quieter sensor than the plain
    // simulator default and an asymmetric damper curve (soft in compression,
    // stiff in rebound) so bump strokes dominate the informative samples.
    cfg.plant.sensor_noise_sd = 0.01;
    cfg.plant.damper_comp_scale = 0.45;
    cfg.plant.damper_reb_scale = 11.0;

    cfg.program = default_program();
    cfg.seed = 42;
    cfg.test_runs = {2, 7, 12};

    cfg.indexing.threshold = 0.2;
    cfg.augmentation = {0.0, 0.05, 202};
    cfg.oversampling = {40, 8};

    cfg.mlp.layer_sizes = {3, 32, 32, 1};
    cfg.mlp.activation = Activation::tanh;
    cfg.mlp.learning_rate = 1e-3;
    cfg.mlp.batch_size = 128;
    cfg.mlp.epochs = 150;
    cfg.mlp.seed = 6;
    cfg.mlp.optimizer = Optimizer::adaptive_moments;
    cfg.mlp.lr_decay = LrDecay::cosine;

    cfg.configurations = default_configurations();
    return cfg;
}

void validate(const RunConfig& cfg) {
    if (cfg.program.empty()) {
        throw validation_error("run config has an empty test program");
    }
    if (cfg.test_runs.empty()) {
        throw validation_error("run config lists no held-out test runs");
    }
    if (cfg.configurations.empty()) {
        throw validation_error("run config lists no ablation configurations");
    }
    std::set<std::string> names;
    for (const AblationConfig& c : cfg.configurations) {
        if (c.name.empty()) {
            throw validation_error("ablation configuration with empty name");
        }
        if (!names.insert(c.name).second) {
            throw validation_error("duplicate ablation configuration name: '" + c.name + "'");
        }
    }
    if (names.count("full") == 0) {
        throw validation_error("ablation configurations must include 'full'");
    }
    if (cfg.indexing.threshold <= 0.0) {
        throw validation_error("indexing threshold must be positive");
    }
    if (cfg.augmentation.sigma < 0.0) {
        throw validation_error("augmentation sigma must be non-negative");
    }
    if (cfg.oversampling.n_bins < 2) {
        throw validation_error("oversampling needs at least 2 bins");
    }
    validate(cfg.mlp);
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("config file not found: " + path.string());
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw validation_error(path.string() + ": " + e.what());
    }

    RunConfig cfg = default_run_config();
    try {
        cfg.seed = doc.value("seed", cfg.seed);
        if (doc.contains("test_runs")) {
            const auto ids = doc["test_runs"].get<std::vector<int>>();
            cfg.test_runs = std::set<int>(ids.begin(), ids.end());
        }
        if (doc.contains("plant")) {
            plant_from_json(doc["plant"], cfg.plant);
        }
        if (doc.contains("program")) {
            cfg.program.clear();
            for (const json& run : doc["program"]) {
                cfg.program.push_back(run_from_json(run));
            }
        }
        if (doc.contains("indexing")) {
            cfg.indexing.threshold = doc["indexing"].value("threshold", cfg.indexing.threshold);
        }
        if (doc.contains("augmentation")) {
            const json& aug = doc["augmentation"];
            cfg.augmentation.mu = aug.value("mu", cfg.augmentation.mu);
            cfg.augmentation.sigma = aug.value("sigma", cfg.augmentation.sigma);
            cfg.augmentation.seed = aug.value("seed", cfg.augmentation.seed);
        }
        if (doc.contains("oversampling")) {
            const json& os = doc["oversampling"];
            cfg.oversampling.n_bins = os.value("n_bins", cfg.oversampling.n_bins);
            cfg.oversampling.seed = os.value("seed", cfg.oversampling.seed);
        }
        if (doc.contains("mlp")) {
            const json& mlp = doc["mlp"];
            if (mlp.contains("layer_sizes")) {
                cfg.mlp.layer_sizes = mlp["layer_sizes"].get<std::vector<int>>();
            }
            if (mlp.contains("activation")) {
                cfg.mlp.activation = activation_from_name(mlp["activation"].get<std::string>());
            }
            cfg.mlp.learning_rate = mlp.value("learning_rate", cfg.mlp.learning_rate);
            cfg.mlp.batch_size = mlp.value("batch_size", cfg.mlp.batch_size);
            cfg.mlp.epochs = mlp.value("epochs", cfg.mlp.epochs);
            cfg.mlp.seed = mlp.value("seed", cfg.mlp.seed);
            if (mlp.contains("optimizer")) {
                cfg.mlp.optimizer = optimizer_from_name(mlp["optimizer"].get<std::string>());
            }
            if (mlp.contains("lr_decay")) {
                cfg.mlp.lr_decay = lr_decay_from_name(mlp["lr_decay"].get<std::string>());
            }
            cfg.mlp.momentum = mlp.value("momentum", cfg.mlp.momentum);
        }
        if (doc.contains("configurations")) {
            cfg.configurations.clear();
            for (const json& entry : doc["configurations"]) {
                AblationConfig c;
                c.name = entry.at("name").get<std::string>();
                c.stages = stages_from_tokens(entry.at("stages").get<std::vector<std::string>>());
                cfg.configurations.push_back(std::move(c));
            }
        }
    } catch (const json::exception& e) {
        throw validation_error(path.string() + ": " + e.what());
    }
    validate(cfg);
    return cfg;
}

void save_run_config(const RunConfig& cfg, const std::filesystem::path& path) {
    validate(cfg);
    ordered_json doc;
    doc["seed"] = cfg.seed;
    doc["test_runs"] = cfg.test_runs;
    doc["plant"] = plant_to_json(cfg.plant);
    doc["program"] = ordered_json::array();
    for (const TestRunSpec& spec : cfg.program) {
        doc["program"].push_back(run_to_json(spec));
    }
    doc["indexing"] = {{"threshold", cfg.indexing.threshold}};
    doc["augmentation"] = {{"mu", cfg.augmentation.mu},
                           {"sigma", cfg.augmentation.sigma},
                           {"seed", cfg.augmentation.seed}};
    doc["oversampling"] = {{"n_bins", cfg.oversampling.n_bins}, {"seed", cfg.oversampling.seed}};
    doc["mlp"] = {{"layer_sizes", cfg.mlp.layer_sizes},
                  {"activation", activation_name(cfg.mlp.activation)},
                  {"learning_rate", cfg.mlp.learning_rate},
                  {"batch_size", cfg.mlp.batch_size},
                  {"epochs", cfg.mlp.epochs},
                  {"seed", cfg.mlp.seed},
                  {"optimizer", optimizer_name(cfg.mlp.optimizer)},
                  {"lr_decay", lr_decay_name(cfg.mlp.lr_decay)},
                  {"momentum", cfg.mlp.momentum}};
    doc["configurations"] = ordered_json::array();
    for (const AblationConfig& c : cfg.configurations) {
        doc["configurations"].push_back({{"name", c.name}, {"stages", stage_tokens(c.stages)}});
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw io_error("cannot open file for writing: " + path.string());
    }
    out << doc.dump(2) << '\n';
    if (!out) {
        throw io_error("write failed: " + path.string());
    }
}

AblationReport run_ablation(const RunConfig& cfg, const RawDataset& data,
                            const std::filesystem::path& artifacts_dir) {
    validate(cfg);

    const auto [train_raw, test_raw] = split_by_runs(data, cfg.test_runs);
    const ScalingState scaling = fit_scaling(train_raw);
    const PreparedDataset test_scaled = apply_scaling(test_raw, scaling);

    // Shared evaluation subset: the informative test samples, selected by the
    // same |raw delta| >= threshold rule for every configuration.
    const Eigen::VectorXd test_deltas = test_raw.deltas();
    std::vector<Eigen::Index> informative;
    for (Eigen::Index i = 0; i < test_deltas.size(); ++i) {
        if (std::abs(test_deltas[i]) >= cfg.indexing.threshold) {
            informative.push_back(i);
        }
    }
    if (informative.size() < 2) {
        throw validation_error("test partition has fewer than 2 informative samples at threshold " +
                               format_double(cfg.indexing.threshold) + " mm");
    }
    const PreparedDataset eval_set = take_rows(test_scaled, informative);

    AblationReport report;
    for (const AblationConfig& config : cfg.configurations) {
        try {
            PipelineResult prepared =
                run_pipeline(train_raw, config.stages, cfg.indexing, cfg.augmentation,
                             cfg.oversampling, scaling);

            const MlpModel initial = init_model(cfg.mlp);
            const TrainResult trained = train(initial, prepared.data, cfg.mlp);

            const Eigen::VectorXd predictions = forward(trained.model, eval_set.x);

            ConfigResult row;
            row.name = config.name;
            row.metrics = evaluate(eval_set.y, predictions);
            row.audit = std::move(prepared.audit);
            if (!artifacts_dir.empty()) {
                std::filesystem::create_directories(artifacts_dir);
                row.predictions_path = artifacts_dir / ("predictions_" + config.name + ".csv");
                dump_predictions(trained.model, eval_set, row.predictions_path);
                save_audit(row.audit, artifacts_dir / ("audit_" + config.name + ".csv"));
            }
            report.rows.push_back(std::move(row));
        } catch (const std::exception& e) {
            throw std::runtime_error("configuration '" + config.name + "' failed: " + e.what());
        }
    }
    return report;
}

void save_report(const AblationReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw io_error("cannot open file for writing: " + path.string());
    }
    out << "config_name,r2,mse,mae,n\n";
    for (const ConfigResult& row : report.rows) {
        out << to_csv_row(row.name, row.metrics) << '\n';
    }
    if (!out) {
        throw io_error("write failed: " + path.string());
    }
}

void dump_predictions(const MlpModel& model, const PreparedDataset& test,
                      const std::filesystem::path& path) {
    const Eigen::VectorXd predictions = forward(model, test.x);
    std::string out;
    out.reserve(static_cast<std::size_t>(test.size()) * 32 + 32);
    out.append("index,y_true,y_pred\n");
    for (Eigen::Index i = 0; i < test.size(); ++i) {
        out.append(std::to_string(i));
        out.push_back(',');
        append_double(out, test.y[i]);
        out.push_back(',');
        append_double(out, predictions[i]);
        out.push_back('\n');
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw io_error("cannot open file for writing: " + path.string());
    }
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) {
        throw io_error("write failed: " + path.string());
    }
}

}  // namespace dtwin
