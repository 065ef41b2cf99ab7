#pragma once

// Study orchestration: generate -> split -> pipeline variants -> train ->
// evaluate, reproducing the four-configuration ablation structure, plus the
// JSON run-config format used by the command-line front end.

#include "dtwin/dataset.hpp"
#include "dtwin/metrics.hpp"
#include "dtwin/mlp.hpp"
#include "dtwin/pipeline.hpp"
#include "dtwin/plant.hpp"

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace dtwin {

// One ablation configuration: a name plus the pipeline stages it enables.
struct AblationConfig {
    std::string name;
    StageToggles stages{};
};

// The default four-configuration ladder: full, no-oversample, no-augment, raw.
[[nodiscard]] std::vector<AblationConfig> default_configurations();

// Complete description of one study run; serializes to a single JSON file.
struct RunConfig {
    PlantParams plant{};
    std::vector<TestRunSpec> program;  // empty means the default 14-run program
    std::uint64_t seed = 42;           // dataset generation seed
    std::set<int> test_runs{2, 7, 12}; // held-out runs, one per velocity level

    IndexingConfig indexing{};
    AugmentationConfig augmentation{};
    OversamplingConfig oversampling{};
    MlpConfig mlp{};

    std::vector<AblationConfig> configurations;  // empty means the default four
};

// Tuned defaults for the synthetic study (plant, pipeline, and training
// settings under which the ablation ladder separates cleanly).
[[nodiscard]] RunConfig default_run_config();

void validate(const RunConfig& cfg);
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& cfg, const std::filesystem::path& path);

// Result of one ablation configuration.
struct ConfigResult {
    std::string name;
    MetricReport metrics{};
    std::vector<AuditRow> audit;                // stage audit log
    std::filesystem::path predictions_path;     // empty when no dump requested
};

struct AblationReport {
    std::vector<ConfigResult> rows;  // one per configuration, in config order
};

// Runs every listed configuration on the given dataset: split by runs,
// fit scaling on the training partition, apply the enabled stages to the
// training partition only, train a fresh identically-seeded model, and
// evaluate on the shared test partition. Metrics are computed on the
// informative subset of the scaled test partition (|raw delta| >= the shared
// indexing threshold); that subset is byte-identical across configurations.
// When artifacts_dir is non-empty, per-configuration prediction dumps and
// audit logs are written there.
[[nodiscard]] AblationReport run_ablation(const RunConfig& cfg, const RawDataset& data,
                                          const std::filesystem::path& artifacts_dir = {});

// Report CSV (header: config_name,r2,mse,mae,n; one row per configuration).
void save_report(const AblationReport& report, const std::filesystem::path& path);

// Writes model predictions for every example of test as CSV rows
// (index,y_true,y_pred) for external plotting.
void dump_predictions(const MlpModel& model, const PreparedDataset& test,
                      const std::filesystem::path& path);

}  // namespace dtwin
