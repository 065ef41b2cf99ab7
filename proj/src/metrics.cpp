#include "dtwin/metrics.hpp"

#include "dtwin/dataset.hpp"

#include <cmath>
#include <limits>

namespace dtwin {

MetricReport evaluate(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw validation_error("y_true (" + std::to_string(y_true.size()) + ") and y_pred (" +
                               std::to_string(y_pred.size()) + ") lengths differ");
    }
    if (y_true.size() < 2) {
        throw validation_error("metrics need at least 2 samples");
    }

    MetricReport report;
    report.n = y_true.size();
    const auto n = static_cast<double>(report.n);
    const Eigen::ArrayXd err = (y_true - y_pred).array();
    report.mse = err.square().sum() / n;
    report.mae = err.abs().sum() / n;

    const double mu = y_true.mean();
    const double ss_tot = (y_true.array() - mu).square().sum();
    if (ss_tot > 0.0) {
        report.r2 = 1.0 - err.square().sum() / ss_tot;
        report.r2_defined = true;
    } else {
        report.r2 = std::numeric_limits<double>::quiet_NaN();
        report.r2_defined = false;
    }
    return report;
}

std::string to_csv_row(const std::string& config_name, const MetricReport& report) {
    std::string row = config_name;
    row.push_back(',');
    if (report.r2_defined) {
        append_double(row, report.r2);
    } else {
        row.append("nan");
    }
    row.push_back(',');
    append_double(row, report.mse);
    row.push_back(',');
    append_double(row, report.mae);
    row.push_back(',');
    row.append(std::to_string(report.n));
    return row;
}

}  // namespace dtwin
