#include "dtwin/dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>
#include <system_error>

namespace dtwin {

namespace {

constexpr std::string_view kRawHeader = "t,run_id,V,I,displacement,delta_displacement";
constexpr std::string_view kPreparedHeader = "V,I,displacement,delta_displacement,provenance";
constexpr double kTimeTolS = 1e-9;
constexpr double kDeltaTolMm = 1e-9;

[[noreturn]] void fail_row(const std::filesystem::path& path, std::size_t line_no,
                           const std::string& what) {
    throw validation_error(path.string() + ": row " + std::to_string(line_no) + ": " + what);
}

double parse_double(std::string_view field, const std::filesystem::path& path,
                    std::size_t line_no, const char* column) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        fail_row(path, line_no, std::string("malformed number in column '") + column + "'");
    }
    return value;
}

int parse_int(std::string_view field, const std::filesystem::path& path, std::size_t line_no,
              const char* column) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        fail_row(path, line_no, std::string("malformed integer in column '") + column + "'");
    }
    return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return std::move(buffer).str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw io_error("cannot open file for writing: " + path.string());
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
        throw io_error("write failed: " + path.string());
    }
}

// Walks lines of a CSV body (after the header), invoking fn(line, line_no).
template <typename Fn>
void for_each_line(std::string_view text, std::size_t first_line_no, Fn&& fn) {
    std::size_t line_no = first_line_no;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (!line.empty()) {
            fn(line, line_no);
        }
        ++line_no;
        start = end + 1;
    }
}

void validate_bounds(const RawRecord& rec, const std::filesystem::path& path,
                     std::size_t line_no) {
    if (rec.I < 0.0 || rec.I > kCurrentMaxA) {
        fail_row(path, line_no,
                 "current " + format_double(rec.I) + " A outside [0, " +
                     format_double(kCurrentMaxA) + "] A");
    }
    if (rec.V < 0.0 || rec.V > kVelocityMaxKmh) {
        fail_row(path, line_no,
                 "velocity " + format_double(rec.V) + " km/h outside [0, " +
                     format_double(kVelocityMaxKmh) + "] km/h");
    }
}

}  // namespace

Eigen::VectorXd RawDataset::velocities() const {
    Eigen::VectorXd out(size());
    for (Eigen::Index i = 0; i < size(); ++i) out[i] = records[static_cast<std::size_t>(i)].V;
    return out;
}

Eigen::VectorXd RawDataset::currents() const {
    Eigen::VectorXd out(size());
    for (Eigen::Index i = 0; i < size(); ++i) out[i] = records[static_cast<std::size_t>(i)].I;
    return out;
}

Eigen::VectorXd RawDataset::displacements() const {
    Eigen::VectorXd out(size());
    for (Eigen::Index i = 0; i < size(); ++i) {
        out[i] = records[static_cast<std::size_t>(i)].displacement;
    }
    return out;
}

Eigen::VectorXd RawDataset::deltas() const {
    Eigen::VectorXd out(size());
    for (Eigen::Index i = 0; i < size(); ++i) {
        out[i] = records[static_cast<std::size_t>(i)].delta_displacement;
    }
    return out;
}

std::set<int> RawDataset::run_ids() const {
    std::set<int> ids;
    for (const RawRecord& rec : records) ids.insert(rec.run_id);
    return ids;
}

const char* column_name(Column c) { return kColumnNames[static_cast<std::size_t>(c)]; }

Column column_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kColumnNames.size(); ++i) {
        if (name == kColumnNames[i]) return static_cast<Column>(i);
    }
    throw validation_error("unknown column: '" + name + "'");
}

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::original: return "original";
        case Provenance::augmented: return "augmented";
        case Provenance::oversample_replica: return "oversample-replica";
    }
    throw validation_error("invalid provenance value");
}

Provenance provenance_from_name(const std::string& name) {
    if (name == "original") return Provenance::original;
    if (name == "augmented") return Provenance::augmented;
    if (name == "oversample-replica") return Provenance::oversample_replica;
    throw validation_error("unknown provenance: '" + name + "'");
}

void append_double(std::string& out, double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) {
        throw std::runtime_error("number formatting failed");
    }
    out.append(buf, ptr);
}

std::string format_double(double v) {
    std::string out;
    append_double(out, v);
    return out;
}

// --- CSV persistence -------------------------------------------------------

RawDataset load_csv(const std::filesystem::path& path) {
    const std::string text = read_file(path);

    std::size_t header_end = text.find('\n');
    std::string_view header(text.data(), header_end == std::string::npos ? text.size()
                                                                          : header_end);
    if (!header.empty() && header.back() == '\r') header.remove_suffix(1);
    if (header != kRawHeader) {
        throw validation_error(path.string() + ": schema mismatch: expected header '" +
                               std::string(kRawHeader) + "'");
    }

    RawDataset data;
    std::set<int> closed_runs;
    int current_run = std::numeric_limits<int>::min();
    std::string_view body =
        header_end == std::string::npos ? std::string_view{} : std::string_view(text).substr(header_end + 1);

    for_each_line(body, 2, [&](std::string_view line, std::size_t line_no) {
        const auto fields = split_fields(line);
        if (fields.size() != 6) {
            fail_row(path, line_no,
                     "expected 6 fields, got " + std::to_string(fields.size()));
        }
        RawRecord rec;
        rec.t = parse_double(fields[0], path, line_no, "t");
        rec.run_id = parse_int(fields[1], path, line_no, "run_id");
        rec.V = parse_double(fields[2], path, line_no, "V");
        rec.I = parse_double(fields[3], path, line_no, "I");
        rec.displacement = parse_double(fields[4], path, line_no, "displacement");
        rec.delta_displacement = parse_double(fields[5], path, line_no, "delta_displacement");
        validate_bounds(rec, path, line_no);

        if (rec.run_id != current_run) {
            if (closed_runs.count(rec.run_id) != 0) {
                fail_row(path, line_no,
                         "run " + std::to_string(rec.run_id) + " is not contiguous");
            }
            if (current_run != std::numeric_limits<int>::min()) {
                closed_runs.insert(current_run);
            }
            current_run = rec.run_id;
            if (rec.delta_displacement != 0.0) {
                fail_row(path, line_no, "first sample of a run must have delta 0");
            }
        } else {
            const RawRecord& prev = data.records.back();
            if (std::abs(rec.t - prev.t - kSampleStepS) > kTimeTolS) {
                fail_row(path, line_no,
                         "time must increase by " + format_double(kSampleStepS) +
                             " s within a run (got step " + format_double(rec.t - prev.t) + ")");
            }
            const double expected = rec.displacement - prev.displacement;
            if (std::abs(rec.delta_displacement - expected) > kDeltaTolMm) {
                fail_row(path, line_no, "delta_displacement inconsistent with displacement");
            }
        }
        data.records.push_back(rec);
    });

    if (data.records.empty()) {
        throw validation_error(path.string() + ": empty dataset (header only)");
    }
    return data;
}

void save_csv(const RawDataset& data, const std::filesystem::path& path) {
    if (data.records.empty()) {
        throw validation_error("refusing to save empty dataset: " + path.string());
    }
    std::string out;
    out.reserve(data.records.size() * 64 + 64);
    out.append(kRawHeader);
    out.push_back('\n');
    for (const RawRecord& rec : data.records) {
        append_double(out, rec.t);
        out.push_back(',');
        out.append(std::to_string(rec.run_id));
        out.push_back(',');
        append_double(out, rec.V);
        out.push_back(',');
        append_double(out, rec.I);
        out.push_back(',');
        append_double(out, rec.displacement);
        out.push_back(',');
        append_double(out, rec.delta_displacement);
        out.push_back('\n');
    }
    write_file(path, out);
}

PreparedDataset load_prepared_csv(const std::filesystem::path& path) {
    const std::string text = read_file(path);

    std::size_t header_end = text.find('\n');
    std::string_view header(text.data(), header_end == std::string::npos ? text.size()
                                                                          : header_end);
    if (!header.empty() && header.back() == '\r') header.remove_suffix(1);
    if (header != kPreparedHeader) {
        throw validation_error(path.string() + ": schema mismatch: expected header '" +
                               std::string(kPreparedHeader) + "'");
    }

    std::vector<std::array<double, 4>> rows;
    std::vector<Provenance> provenance;
    std::string_view body =
        header_end == std::string::npos ? std::string_view{} : std::string_view(text).substr(header_end + 1);
    for_each_line(body, 2, [&](std::string_view line, std::size_t line_no) {
        const auto fields = split_fields(line);
        if (fields.size() != 5) {
            fail_row(path, line_no,
                     "expected 5 fields, got " + std::to_string(fields.size()));
        }
        std::array<double, 4> row{};
        for (int c = 0; c < 4; ++c) {
            row[static_cast<std::size_t>(c)] =
                parse_double(fields[static_cast<std::size_t>(c)], path, line_no,
                             kColumnNames[static_cast<std::size_t>(c)]);
        }
        rows.push_back(row);
        try {
            provenance.push_back(provenance_from_name(std::string(fields[4])));
        } catch (const validation_error& e) {
            fail_row(path, line_no, e.what());
        }
    });

    if (rows.empty()) {
        throw validation_error(path.string() + ": empty dataset (header only)");
    }

    PreparedDataset data;
    const auto n = static_cast<Eigen::Index>(rows.size());
    data.x.resize(n, 3);
    data.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        data.x(i, 0) = row[0];
        data.x(i, 1) = row[1];
        data.x(i, 2) = row[2];
        data.y[i] = row[3];
    }
    data.provenance = std::move(provenance);
    return data;
}

void save_prepared_csv(const PreparedDataset& data, const std::filesystem::path& path) {
    if (data.size() == 0) {
        throw validation_error("refusing to save empty dataset: " + path.string());
    }
    if (static_cast<Eigen::Index>(data.provenance.size()) != data.size() ||
        data.x.rows() != data.size() || data.x.cols() != 3) {
        throw validation_error("prepared dataset fields are inconsistent");
    }
    std::string out;
    out.reserve(static_cast<std::size_t>(data.size()) * 48 + 64);
    out.append(kPreparedHeader);
    out.push_back('\n');
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        append_double(out, data.x(i, 0));
        out.push_back(',');
        append_double(out, data.x(i, 1));
        out.push_back(',');
        append_double(out, data.x(i, 2));
        out.push_back(',');
        append_double(out, data.y[i]);
        out.push_back(',');
        out.append(provenance_name(data.provenance[static_cast<std::size_t>(i)]));
        out.push_back('\n');
    }
    write_file(path, out);
}

// --- Scaling ---------------------------------------------------------------

namespace {

double column_value(const RawRecord& rec, Column c) {
    switch (c) {
        case Column::V: return rec.V;
        case Column::I: return rec.I;
        case Column::Displacement: return rec.displacement;
        case Column::DeltaDisplacement: return rec.delta_displacement;
    }
    throw validation_error("invalid column value");
}

}  // namespace

ScalingState fit_scaling(const RawDataset& train) {
    if (train.records.empty()) {
        throw validation_error("cannot fit scaling on an empty dataset");
    }
    ScalingState state;
    for (int c = 0; c < 4; ++c) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const RawRecord& rec : train.records) {
            const double v = column_value(rec, static_cast<Column>(c));
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!(hi > lo)) {
            throw validation_error(std::string("column '") +
                                   kColumnNames[static_cast<std::size_t>(c)] +
                                   "' is constant (value " + format_double(lo) +
                                   "); cannot scale");
        }
        state.ranges[static_cast<std::size_t>(c)] = {lo, hi};
    }
    state.fitted = true;
    return state;
}

double scale_value(double value, Column column, const ScalingState& state) {
    if (!state.fitted) {
        throw validation_error("scaling state is not fitted");
    }
    const auto& r = state.range(column);
    return (value - r.min) / (r.max - r.min);
}

double invert_scaling(double value, Column column, const ScalingState& state) {
    if (!state.fitted) {
        throw validation_error("scaling state is not fitted");
    }
    const auto& r = state.range(column);
    return r.min + value * (r.max - r.min);
}

PreparedDataset apply_scaling(const RawDataset& data, const ScalingState& state) {
    if (!state.fitted) {
        throw validation_error("scaling state is not fitted");
    }
    PreparedDataset out;
    const Eigen::Index n = data.size();
    out.x.resize(n, 3);
    out.y.resize(n);
    out.provenance.assign(static_cast<std::size_t>(n), Provenance::original);
    for (Eigen::Index i = 0; i < n; ++i) {
        const RawRecord& rec = data.records[static_cast<std::size_t>(i)];
        out.x(i, 0) = scale_value(rec.V, Column::V, state);
        out.x(i, 1) = scale_value(rec.I, Column::I, state);
        out.x(i, 2) = scale_value(rec.displacement, Column::Displacement, state);
        out.y[i] = scale_value(rec.delta_displacement, Column::DeltaDisplacement, state);
    }
    return out;
}

void save_scaling(const ScalingState& state, const std::filesystem::path& path) {
    if (!state.fitted) {
        throw validation_error("scaling state is not fitted");
    }
    nlohmann::ordered_json doc;
    for (int c = 0; c < 4; ++c) {
        const auto& r = state.ranges[static_cast<std::size_t>(c)];
        doc[kColumnNames[static_cast<std::size_t>(c)]] = {{"min", r.min}, {"max", r.max}};
    }
    write_file(path, doc.dump(2) + "\n");
}

ScalingState load_scaling(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(path.string() + ": " + e.what());
    }
    ScalingState state;
    for (int c = 0; c < 4; ++c) {
        const char* name = kColumnNames[static_cast<std::size_t>(c)];
        if (!doc.contains(name) || !doc[name].contains("min") || !doc[name].contains("max")) {
            throw validation_error(path.string() + ": missing range for column '" +
                                   std::string(name) + "'");
        }
        ScalingState::Range r{doc[name]["min"].get<double>(), doc[name]["max"].get<double>()};
        if (!(r.max > r.min)) {
            throw validation_error(path.string() + ": degenerate range for column '" +
                                   std::string(name) + "'");
        }
        state.ranges[static_cast<std::size_t>(c)] = r;
    }
    state.fitted = true;
    return state;
}

// --- Splitting -------------------------------------------------------------

std::pair<RawDataset, RawDataset> split_by_runs(const RawDataset& data,
                                                const std::set<int>& test_runs) {
    if (test_runs.empty()) {
        throw validation_error("test_runs is empty");
    }
    const std::set<int> present = data.run_ids();
    for (int id : test_runs) {
        if (present.count(id) == 0) {
            throw validation_error("test run id " + std::to_string(id) +
                                   " not present in the dataset");
        }
    }
    if (test_runs.size() >= present.size()) {
        throw validation_error("test_runs covers every run; no training data");
    }
    RawDataset train;
    RawDataset test;
    for (const RawRecord& rec : data.records) {
        (test_runs.count(rec.run_id) != 0 ? test : train).records.push_back(rec);
    }
    return {std::move(train), std::move(test)};
}

}  // namespace dtwin
