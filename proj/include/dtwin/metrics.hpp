#pragma once

// Regression evaluation metrics: MSE, MAE, and the coefficient of
// determination R^2 about the true-target mean.

#include <Eigen/Core>

#include <string>

namespace dtwin {

struct MetricReport {
    double mse = 0.0;
    double mae = 0.0;
    double r2 = 0.0;
    Eigen::Index n = 0;
    bool r2_defined = true;  // false when y_true is constant (zero variance)
};

// Computes
//   MSE = (1/N) sum (Y_i - Yhat_i)^2
//   MAE = (1/N) sum |Y_i - Yhat_i|
//   R^2 = 1 - sum (Y_i - Yhat_i)^2 / sum (Y_i - mu)^2,  mu = mean(Y)
// Requires equal lengths >= 2. A constant y_true leaves R^2 undefined
// (r2_defined = false) while MSE/MAE are still computed.
[[nodiscard]] MetricReport evaluate(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

// One report CSV row: config_name,r2,mse,mae,n (undefined R^2 prints "nan").
[[nodiscard]] std::string to_csv_row(const std::string& config_name, const MetricReport& report);

}  // namespace dtwin
