#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dtwin/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

using namespace dtwin;

namespace {

// Builds a consistent two-run dataset: fixed time grid, deltas derived from
// displacements, first sample of each run at delta 0.
RawDataset small_dataset() {
    RawDataset data;
    const std::array<double, 4> disp1{0.0, 0.125, -0.25, 0.0625};
    const std::array<double, 3> disp2{1.5, 1.25, 1.75};
    for (std::size_t k = 0; k < disp1.size(); ++k) {
        RawRecord rec;
        rec.t = static_cast<double>(k) * kSampleStepS;
        rec.run_id = 1;
        rec.V = 10.0;
        rec.I = 0.4;
        rec.displacement = disp1[k];
        rec.delta_displacement = k == 0 ? 0.0 : disp1[k] - disp1[k - 1];
        data.records.push_back(rec);
    }
    for (std::size_t k = 0; k < disp2.size(); ++k) {
        RawRecord rec;
        rec.t = static_cast<double>(k) * kSampleStepS;
        rec.run_id = 2;
        rec.V = 20.0;
        rec.I = 1.5;
        rec.displacement = disp2[k];
        rec.delta_displacement = k == 0 ? 0.0 : disp2[k] - disp2[k - 1];
        data.records.push_back(rec);
    }
    return data;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

}  // namespace

TEST_CASE("csv round-trip reproduces every record") {
    const RawDataset data = small_dataset();
    const auto path = temp_file("dtwin_test_roundtrip.csv");
    save_csv(data, path);
    const RawDataset loaded = load_csv(path);

    REQUIRE(loaded.size() == data.size());
    for (std::size_t i = 0; i < data.records.size(); ++i) {
        const RawRecord& a = data.records[i];
        const RawRecord& b = loaded.records[i];
        CHECK(a.t == b.t);
        CHECK(a.run_id == b.run_id);
        CHECK(a.V == b.V);
        CHECK(a.I == b.I);
        CHECK(a.displacement == b.displacement);
        CHECK(a.delta_displacement == b.delta_displacement);
    }
    std::filesystem::remove(path);
}

TEST_CASE("csv round-trip is exact for extreme doubles") {
    RawDataset data;
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 1.0);
    double disp = 0.0;
    for (int k = 0; k < 500; ++k) {
        RawRecord rec;
        rec.t = static_cast<double>(k) * kSampleStepS;
        rec.run_id = 3;
        rec.V = 12.5;
        rec.I = 0.8;
        const double next = disp + noise(rng) * 1e-7;
        rec.displacement = next;
        rec.delta_displacement = k == 0 ? 0.0 : next - disp;
        disp = next;
        data.records.push_back(rec);
    }
    const auto path = temp_file("dtwin_test_roundtrip_tiny.csv");
    save_csv(data, path);
    const RawDataset loaded = load_csv(path);
    for (std::size_t i = 0; i < data.records.size(); ++i) {
        CHECK(loaded.records[i].displacement == data.records[i].displacement);
        CHECK(loaded.records[i].delta_displacement == data.records[i].delta_displacement);
    }
    std::filesystem::remove(path);
}

TEST_CASE("load_csv rejects bad inputs") {
    const auto path = temp_file("dtwin_test_bad.csv");

    SUBCASE("missing file") {
        CHECK_THROWS_AS((void)load_csv(temp_file("dtwin_no_such_file.csv")), io_error);
    }
    SUBCASE("header only") {
        write_text(path, "t,run_id,V,I,displacement,delta_displacement\n");
        CHECK_THROWS_WITH_AS((void)load_csv(path), doctest::Contains("empty dataset"),
                             validation_error);
    }
    SUBCASE("schema mismatch") {
        write_text(path, "time,run,V,I,disp,delta\n0,1,10,0.4,0,0\n");
        CHECK_THROWS_WITH_AS((void)load_csv(path), doctest::Contains("schema mismatch"),
                             validation_error);
    }
    SUBCASE("current above bound names the bound") {
        write_text(path,
                   "t,run_id,V,I,displacement,delta_displacement\n"
                   "0,1,10,2.5,0,0\n");
        CHECK_THROWS_WITH_AS((void)load_csv(path), doctest::Contains("1.6"), validation_error);
    }
    SUBCASE("velocity above bound") {
        write_text(path,
                   "t,run_id,V,I,displacement,delta_displacement\n"
                   "0,1,30,0.4,0,0\n");
        CHECK_THROWS_WITH_AS((void)load_csv(path), doctest::Contains("25"), validation_error);
    }
    SUBCASE("malformed row reports the row number") {
        write_text(path,
                   "t,run_id,V,I,displacement,delta_displacement\n"
                   "0,1,10,0.4,0,0\n"
                   "0.001,1,10,0.4,abc,0\n");
        CHECK_THROWS_WITH_AS((void)load_csv(path), doctest::Contains("row 3"), validation_error);
    }
    SUBCASE("non-monotone time within a run") {
        write_text(path,
                   "t,run_id,V,I,displacement,delta_displacement\n"
                   "0.002,1,10,0.4,0,0\n"
                   "0.001,1,10,0.4,0.5,0.5\n");
        CHECK_THROWS_WITH_AS((void)load_csv(path), doctest::Contains("time"), validation_error);
    }
    SUBCASE("non-contiguous run grouping") {
        write_text(path,
                   "t,run_id,V,I,displacement,delta_displacement\n"
                   "0,1,10,0.4,0,0\n"
                   "0,2,15,0.4,0,0\n"
                   "0,1,10,0.4,0,0\n");
        CHECK_THROWS_WITH_AS((void)load_csv(path), doctest::Contains("contiguous"), validation_error);
    }
    SUBCASE("inconsistent delta") {
        write_text(path,
                   "t,run_id,V,I,displacement,delta_displacement\n"
                   "0,1,10,0.4,0,0\n"
                   "0.001,1,10,0.4,0.5,0.25\n");
        CHECK_THROWS_WITH_AS((void)load_csv(path), doctest::Contains("delta"), validation_error);
    }
    std::filesystem::remove(path);
}

TEST_CASE("save_csv rejects an empty dataset") {
    CHECK_THROWS_AS(save_csv(RawDataset{}, temp_file("dtwin_test_empty.csv")),
                    validation_error);
}

TEST_CASE("fit_scaling captures exact column minima and maxima") {
    RawDataset data = small_dataset();
    const ScalingState state = fit_scaling(data);
    CHECK(state.range(Column::V).min == 10.0);
    CHECK(state.range(Column::V).max == 20.0);
    CHECK(state.range(Column::I).min == 0.4);
    CHECK(state.range(Column::I).max == 1.5);
    CHECK(state.range(Column::Displacement).min == -0.25);
    CHECK(state.range(Column::Displacement).max == 1.75);
}

TEST_CASE("fit_scaling covers the full current grid") {
    RawDataset data;
    const std::array<double, 5> grid{0.4, 1.0, 1.2, 1.5, 1.6};
    for (std::size_t k = 0; k < grid.size(); ++k) {
        RawRecord rec;
        rec.t = static_cast<double>(k) * kSampleStepS;
        rec.run_id = 1;
        rec.V = 10.0 + static_cast<double>(k);
        rec.I = grid[k];
        rec.displacement = static_cast<double>(k);
        rec.delta_displacement = k == 0 ? 0.0 : 1.0;
        data.records.push_back(rec);
    }
    const ScalingState state = fit_scaling(data);
    CHECK(state.range(Column::I).min == 0.4);
    CHECK(state.range(Column::I).max == 1.6);
}

TEST_CASE("fit_scaling rejects a constant column naming it") {
    RawDataset data = small_dataset();
    for (RawRecord& rec : data.records) rec.I = 0.4;
    CHECK_THROWS_WITH_AS((void)fit_scaling(data), doctest::Contains("'I'"), validation_error);
}

TEST_CASE("apply_scaling maps the fitted range onto [0,1] with endpoints attained") {
    const RawDataset data = small_dataset();
    const ScalingState state = fit_scaling(data);
    const PreparedDataset prepared = apply_scaling(data, state);

    REQUIRE(prepared.size() == data.size());
    for (int c = 0; c < 3; ++c) {
        CHECK(prepared.x.col(c).minCoeff() == 0.0);
        CHECK(prepared.x.col(c).maxCoeff() == 1.0);
    }
    CHECK(prepared.y.minCoeff() == 0.0);
    CHECK(prepared.y.maxCoeff() == 1.0);
    for (Provenance p : prepared.provenance) {
        CHECK(p == Provenance::original);
    }
}

TEST_CASE("scale_value endpoints, midpoint, and out-of-range extrapolation") {
    ScalingState state;
    state.fitted = true;
    state.ranges[static_cast<int>(Column::V)] = {10.0, 20.0};

    CHECK(scale_value(10.0, Column::V, state) == 0.0);
    CHECK(scale_value(20.0, Column::V, state) == 1.0);
    CHECK(scale_value(15.0, Column::V, state) == 0.5);
    // Test-time value outside the fitted range maps outside [0,1], unclamped.
    CHECK(scale_value(25.0, Column::V, state) == 1.5);
    CHECK(invert_scaling(0.0, Column::V, state) == 10.0);
    CHECK(invert_scaling(1.0, Column::V, state) == 20.0);
    CHECK(invert_scaling(0.5, Column::V, state) == 15.0);
}

TEST_CASE("scaling is order-preserving and inverts to 1e-9") {
    const RawDataset data = small_dataset();
    const ScalingState state = fit_scaling(data);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> value(-50.0, 50.0);
    for (int i = 0; i < 1000; ++i) {
        const double v = value(rng);
        for (int c = 0; c < 4; ++c) {
            const auto column = static_cast<Column>(c);
            const double round = invert_scaling(scale_value(v, column, state), column, state);
            CHECK(std::abs(round - v) <= 1e-9 * std::max(1.0, std::abs(v)));
        }
        const double w = value(rng);
        if (v < w) {
            CHECK(scale_value(v, Column::Displacement, state) <
                  scale_value(w, Column::Displacement, state));
        }
    }
}

TEST_CASE("unfitted scaling state is rejected") {
    ScalingState state;
    CHECK_THROWS_AS((void)scale_value(1.0, Column::V, state), validation_error);
    CHECK_THROWS_AS((void)invert_scaling(1.0, Column::V, state), validation_error);
    CHECK_THROWS_AS((void)apply_scaling(small_dataset(), state), validation_error);
}

TEST_CASE("column lookup by name") {
    CHECK(column_from_name("V") == Column::V);
    CHECK(column_from_name("delta_displacement") == Column::DeltaDisplacement);
    CHECK_THROWS_AS((void)column_from_name("bogus"), validation_error);
}

TEST_CASE("scaling state JSON round-trip is exact") {
    const RawDataset data = small_dataset();
    const ScalingState state = fit_scaling(data);
    const auto path = temp_file("dtwin_test_scaling.json");
    save_scaling(state, path);
    const ScalingState loaded = load_scaling(path);
    for (int c = 0; c < 4; ++c) {
        CHECK(loaded.ranges[c].min == state.ranges[c].min);
        CHECK(loaded.ranges[c].max == state.ranges[c].max);
    }
    std::filesystem::remove(path);
}

TEST_CASE("split_by_runs partitions without loss or duplication") {
    const RawDataset data = small_dataset();
    const auto [train, test] = split_by_runs(data, {2});
    CHECK(train.size() + test.size() == data.size());
    CHECK(train.run_ids() == std::set<int>{1});
    CHECK(test.run_ids() == std::set<int>{2});
    for (const RawRecord& rec : test.records) {
        CHECK(rec.run_id == 2);
    }
}

TEST_CASE("split_by_runs rejects degenerate selections") {
    const RawDataset data = small_dataset();
    CHECK_THROWS_AS((void)split_by_runs(data, {}), validation_error);
    CHECK_THROWS_WITH_AS((void)split_by_runs(data, {1, 2}), doctest::Contains("no training data"),
                         validation_error);
    CHECK_THROWS_WITH_AS((void)split_by_runs(data, {99}), doctest::Contains("99"), validation_error);
}

TEST_CASE("prepared csv round-trip") {
    PreparedDataset data;
    data.x.resize(3, 3);
    data.x << 0.0, 0.5, 1.0, 0.25, 0.75, 0.125, 1.0, 0.0, 0.5;
    data.y.resize(3);
    data.y << 0.1, -0.25, 1.5;
    data.provenance = {Provenance::original, Provenance::augmented,
                       Provenance::oversample_replica};

    const auto path = temp_file("dtwin_test_prepared.csv");
    save_prepared_csv(data, path);
    const PreparedDataset loaded = load_prepared_csv(path);

    REQUIRE(loaded.size() == 3);
    CHECK((loaded.x.array() == data.x.array()).all());
    CHECK((loaded.y.array() == data.y.array()).all());
    CHECK(loaded.provenance == data.provenance);
    std::filesystem::remove(path);
}
