#include "dtwin/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <vector>

namespace dtwin {

namespace {

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

}  // namespace

PreparedDataset index_filter(const PreparedDataset& data, const Eigen::VectorXd& raw_deltas_mm,
                             const IndexingConfig& cfg) {
    if (cfg.threshold <= 0.0) {
        throw validation_error("indexing threshold must be positive");
    }
    if (raw_deltas_mm.size() != data.size()) {
        throw validation_error("raw deltas (" + std::to_string(raw_deltas_mm.size()) +
                               ") are not aligned with the dataset (" +
                               std::to_string(data.size()) + ")");
    }
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        if (std::abs(raw_deltas_mm[i]) >= cfg.threshold) {
            kept.push_back(i);
        }
    }
    if (kept.empty()) {
        throw validation_error("indexing removed every sample: threshold " +
                               format_double(cfg.threshold) + " mm exceeds max |delta| " +
                               format_double(raw_deltas_mm.cwiseAbs().maxCoeff()) + " mm");
    }
    return take_rows(data, kept);
}

PreparedDataset augment_gaussian(const PreparedDataset& data, const AugmentationConfig& cfg) {
    if (cfg.sigma < 0.0) {
        throw validation_error("augmentation sigma must be non-negative");
    }
    if (data.size() == 0) {
        throw validation_error("cannot augment an empty dataset");
    }
    const Eigen::Index n = data.size();
    PreparedDataset out;
    out.x.resize(2 * n, data.x.cols());
    out.y.resize(2 * n);
    out.provenance.resize(static_cast<std::size_t>(2 * n));

    out.x.topRows(n) = data.x;
    out.y.head(n) = data.y;
    std::copy(data.provenance.begin(), data.provenance.end(), out.provenance.begin());

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    auto draw = [&] { return cfg.mu + (cfg.sigma > 0.0 ? cfg.sigma * noise(rng) : 0.0); };
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < data.x.cols(); ++c) {
            out.x(n + i, c) = data.x(i, c) + draw();
        }
        out.y[n + i] = data.y[i] + draw();
        out.provenance[static_cast<std::size_t>(n + i)] = Provenance::augmented;
    }
    return out;
}

PreparedDataset oversample_histogram(const PreparedDataset& data, const OversamplingConfig& cfg) {
    if (cfg.n_bins < 2) {
        throw validation_error("oversampling needs at least 2 bins");
    }
    if (data.size() == 0) {
        throw validation_error("cannot oversample an empty dataset");
    }
    const Eigen::Index n = data.size();
    const double y_min = data.y.minCoeff();
    const double y_max = data.y.maxCoeff();
    const double span = y_max - y_min;
    if (!(span > 0.0)) {
        return data;  // single-valued target: one bin holds everything, already uniform
    }

    const int n_bins = cfg.n_bins;
    std::vector<std::vector<Eigen::Index>> bins(static_cast<std::size_t>(n_bins));
    for (Eigen::Index i = 0; i < n; ++i) {
        auto b = static_cast<int>((data.y[i] - y_min) / span * n_bins);
        b = std::clamp(b, 0, n_bins - 1);
        bins[static_cast<std::size_t>(b)].push_back(i);
    }
    std::size_t max_count = 0;
    for (const auto& bin : bins) max_count = std::max(max_count, bin.size());

    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;

    std::mt19937_64 rng(cfg.seed);
    std::vector<bool> is_replica(static_cast<std::size_t>(n), false);
    for (const auto& bin : bins) {
        if (bin.empty() || bin.size() == max_count) {
            continue;
        }
        std::uniform_int_distribution<std::size_t> pick(0, bin.size() - 1);
        for (std::size_t r = bin.size(); r < max_count; ++r) {
            rows.push_back(bin[pick(rng)]);
            is_replica.push_back(true);
        }
    }

    PreparedDataset out = take_rows(data, rows);
    for (std::size_t i = 0; i < out.provenance.size(); ++i) {
        if (is_replica[i]) {
            out.provenance[i] = Provenance::oversample_replica;
        }
    }
    return out;
}

PipelineResult run_pipeline(const RawDataset& raw, const StageToggles& stages,
                            const IndexingConfig& index_cfg, const AugmentationConfig& augment_cfg,
                            const OversamplingConfig& oversample_cfg, const ScalingState& scaling) {
    PipelineResult result;

    PreparedDataset current = apply_scaling(raw, scaling);
    result.audit.push_back({"scale", raw.size(), current.size()});

    Eigen::Index rows_in = current.size();
    if (stages.indexing) {
        current = index_filter(current, raw.deltas(), index_cfg);
    }
    result.audit.push_back({"index", rows_in, current.size()});

    rows_in = current.size();
    if (stages.augmentation) {
        current = augment_gaussian(current, augment_cfg);
    }
    result.audit.push_back({"augment", rows_in, current.size()});

    rows_in = current.size();
    if (stages.oversampling) {
        current = oversample_histogram(current, oversample_cfg);
    }
    result.audit.push_back({"oversample", rows_in, current.size()});

    result.data = std::move(current);
    return result;
}

void save_audit(const std::vector<AuditRow>& audit, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw io_error("cannot open file for writing: " + path.string());
    }
    out << "stage,rows_in,rows_out\n";
    for (const AuditRow& row : audit) {
        out << row.stage << ',' << row.rows_in << ',' << row.rows_out << '\n';
    }
    if (!out) {
        throw io_error("write failed: " + path.string());
    }
}

}  // namespace dtwin
