#pragma once

// Raw and prepared dataset representations: CSV persistence, run-based
// splitting, and min-max feature scaling with exact inversion.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dtwin {

// Thrown when a file is missing, unreadable, or unwritable.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when data violates a documented invariant or a config is ill-formed.
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One 1 kHz sensor sample of a test run.
struct RawRecord {
    double t = 0.0;                   // seconds, fixed 0.001 s step within a run
    int run_id = 0;                   // test-run identifier (1-14 in the default program)
    double V = 0.0;                   // vehicle velocity, km/h
    double I = 0.0;                   // valve current, A
    double displacement = 0.0;        // rod position, mm
    double delta_displacement = 0.0;  // per-sample change of rod position, mm
};

// Physical bounds of the test program; enforced on load and generation.
inline constexpr double kCurrentMaxA = 1.6;
inline constexpr double kVelocityMaxKmh = 25.0;
inline constexpr double kSampleStepS = 0.001;

// Ordered collection of raw records, grouped contiguously by run_id.
struct RawDataset {
    std::vector<RawRecord> records;

    static constexpr std::array<const char*, 3> feature_names{"V", "I", "displacement"};
    static constexpr const char* target_name = "delta_displacement";

    [[nodiscard]] Eigen::Index size() const { return static_cast<Eigen::Index>(records.size()); }

    // Column accessors as dense vectors (feature extraction for the pipeline).
    [[nodiscard]] Eigen::VectorXd velocities() const;
    [[nodiscard]] Eigen::VectorXd currents() const;
    [[nodiscard]] Eigen::VectorXd displacements() const;
    [[nodiscard]] Eigen::VectorXd deltas() const;
    [[nodiscard]] std::set<int> run_ids() const;
};

// Scaled columns, in fixed order: the three features then the target.
enum class Column : int { V = 0, I = 1, Displacement = 2, DeltaDisplacement = 3 };

inline constexpr std::array<const char*, 4> kColumnNames{"V", "I", "displacement",
                                                         "delta_displacement"};

[[nodiscard]] const char* column_name(Column c);
[[nodiscard]] Column column_from_name(const std::string& name);

// Per-column (min, max) captured from training data; drives the affine map
// x_scaled = (x - min) / (max - min) and its inverse.
struct ScalingState {
    struct Range {
        double min = 0.0;
        double max = 0.0;
    };
    std::array<Range, 4> ranges{};
    bool fitted = false;

    [[nodiscard]] const Range& range(Column c) const { return ranges[static_cast<int>(c)]; }
};

// Origin of a prepared example, tracked through the pipeline stages.
enum class Provenance : std::uint8_t { original = 0, augmented = 1, oversample_replica = 2 };

[[nodiscard]] const char* provenance_name(Provenance p);
[[nodiscard]] Provenance provenance_from_name(const std::string& name);

// Scaled example sequence: x rows are (V, I, displacement), y is the scaled
// per-sample displacement change. Original examples lie in [0, 1] when scaled
// with their own fit; augmented replicas may exceed that range by noise.
struct PreparedDataset {
    Eigen::MatrixXd x;                    // n x 3
    Eigen::VectorXd y;                    // n
    std::vector<Provenance> provenance;   // n entries

    [[nodiscard]] Eigen::Index size() const { return y.size(); }
};

// --- CSV persistence -------------------------------------------------------

// Reads a raw dataset; validates schema, run grouping, time monotonicity,
// delta consistency, and the physical bounds on I and V. Errors name the
// offending row.
[[nodiscard]] RawDataset load_csv(const std::filesystem::path& path);

// Writes a raw dataset with shortest round-trip number formatting; a reload
// reproduces every value exactly. Rejects empty datasets.
void save_csv(const RawDataset& data, const std::filesystem::path& path);

// Prepared-set persistence (header: V,I,displacement,delta_displacement,provenance).
[[nodiscard]] PreparedDataset load_prepared_csv(const std::filesystem::path& path);
void save_prepared_csv(const PreparedDataset& data, const std::filesystem::path& path);

// --- Scaling ---------------------------------------------------------------

// Captures exact column-wise min/max of the training partition.
// Rejects constant columns (degenerate scaling), naming the column.
[[nodiscard]] ScalingState fit_scaling(const RawDataset& train);

// Maps every column through the fitted affine transform. Values outside the
// fitted range (e.g. test data) map outside [0, 1] without clamping.
[[nodiscard]] PreparedDataset apply_scaling(const RawDataset& data, const ScalingState& state);

// Scalar transforms for a single column.
[[nodiscard]] double scale_value(double value, Column column, const ScalingState& state);
[[nodiscard]] double invert_scaling(double value, Column column, const ScalingState& state);

// ScalingState persistence as JSON: { "<column>": {"min": m, "max": M}, ... }.
void save_scaling(const ScalingState& state, const std::filesystem::path& path);
[[nodiscard]] ScalingState load_scaling(const std::filesystem::path& path);

// --- Splitting -------------------------------------------------------------

// Partitions records by run: first result holds runs not in test_runs, second
// the rest. test_runs must be a non-empty proper subset of the present ids.
[[nodiscard]] std::pair<RawDataset, RawDataset> split_by_runs(const RawDataset& data,
                                                              const std::set<int>& test_runs);

// --- Formatting helpers (shared by the CSV writers) -------------------------

// Appends the shortest decimal form of v that parses back to the same double.
void append_double(std::string& out, double v);
[[nodiscard]] std::string format_double(double v);

}  // namespace dtwin
