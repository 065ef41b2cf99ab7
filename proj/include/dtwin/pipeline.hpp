#pragma once

// Data-preparation chain for the regression task: index filtering on target
// magnitude, Gaussian augmentation, and histogram-balancing oversampling.
// Each stage is a pure function and independently toggleable for ablation.

#include "dtwin/dataset.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace dtwin {

// Keeps samples whose |raw delta_displacement| (native mm) reaches threshold.
struct IndexingConfig {
    double threshold = 0.2;  // mm
};

// Additive i.i.d. Gaussian noise N(mu, sigma^2) on every scaled x component
// and on y; one noisy replica per original.
struct AugmentationConfig {
    double mu = 0.0;
    double sigma = 0.05;
    std::uint64_t seed = 0;
};

// Equal-width histogram over the scaled target range; every non-empty bin is
// resampled with replacement up to the largest original bin count.
struct OversamplingConfig {
    int n_bins = 20;
    std::uint64_t seed = 0;
};

// Stage toggles for one ablation configuration.
struct StageToggles {
    bool indexing = true;
    bool augmentation = true;
    bool oversampling = true;
};

// One audit-log entry: dataset size entering and leaving a stage.
struct AuditRow {
    std::string stage;
    Eigen::Index rows_in = 0;
    Eigen::Index rows_out = 0;
};

struct PipelineResult {
    PreparedDataset data;
    std::vector<AuditRow> audit;  // always 4 rows: scale, index, augment, oversample
};

// Keeps exactly the examples whose |raw_deltas_mm| >= cfg.threshold,
// preserving order; x rows follow their y values (index alignment).
// raw_deltas_mm must be aligned 1:1 with data. Rejects an empty result,
// reporting the largest observed |delta|.
[[nodiscard]] PreparedDataset index_filter(const PreparedDataset& data,
                                           const Eigen::VectorXd& raw_deltas_mm,
                                           const IndexingConfig& cfg);

// Returns the originals verbatim followed by one noisy replica per original
// (output size 2n); deterministic per cfg.seed.
[[nodiscard]] PreparedDataset augment_gaussian(const PreparedDataset& data,
                                               const AugmentationConfig& cfg);

// Bins targets into cfg.n_bins equal-width bins over [min(y), max(y)] and
// appends seeded with-replacement duplicates until every non-empty bin
// matches the maximum original bin count. Empty bins stay empty; originals
// are all retained in order.
[[nodiscard]] PreparedDataset oversample_histogram(const PreparedDataset& data,
                                                   const OversamplingConfig& cfg);

// Applies scaling, then the enabled stages in the fixed order
// index -> augment -> oversample (disabled stages are identity), recording an
// audit row per stage.
[[nodiscard]] PipelineResult run_pipeline(const RawDataset& raw, const StageToggles& stages,
                                          const IndexingConfig& index_cfg,
                                          const AugmentationConfig& augment_cfg,
                                          const OversamplingConfig& oversample_cfg,
                                          const ScalingState& scaling);

// Audit log persistence (header: stage,rows_in,rows_out).
void save_audit(const std::vector<AuditRow>& audit, const std::filesystem::path& path);

}  // namespace dtwin
