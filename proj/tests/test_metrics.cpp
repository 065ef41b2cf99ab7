#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dtwin/dataset.hpp"
#include "dtwin/metrics.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace dtwin;

namespace {

// Independent naive accumulation, kept deliberately different from the
// library's vectorized path.
MetricReport naive_evaluate(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
    MetricReport report;
    report.n = y_true.size();
    double se = 0.0;
    double ae = 0.0;
    double mu = 0.0;
    for (Eigen::Index i = 0; i < y_true.size(); ++i) mu += y_true[i];
    mu /= static_cast<double>(y_true.size());
    double ss_tot = 0.0;
    for (Eigen::Index i = 0; i < y_true.size(); ++i) {
        const double e = y_true[i] - y_pred[i];
        se += e * e;
        ae += std::abs(e);
        ss_tot += (y_true[i] - mu) * (y_true[i] - mu);
    }
    report.mse = se / static_cast<double>(y_true.size());
    report.mae = ae / static_cast<double>(y_true.size());
    report.r2_defined = ss_tot > 0.0;
    report.r2 = report.r2_defined ? 1.0 - se / ss_tot : 0.0;
    return report;
}

}  // namespace

TEST_CASE("hand-computed three-point case") {
    Eigen::VectorXd y_true(3);
    y_true << 0.0, 1.0, 2.0;
    Eigen::VectorXd y_pred(3);
    y_pred << 0.0, 1.0, 1.0;

    const MetricReport report = evaluate(y_true, y_pred);
    // Errors (0, 0, 1): MSE = 1/3, MAE = 1/3; SS_tot about mean 1 is 2,
    // so R^2 = 1 - 1/2.
    CHECK(report.mse == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(report.mae == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(report.r2 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(report.n == 3);
    CHECK(report.r2_defined);
}

TEST_CASE("perfect predictions") {
    Eigen::VectorXd y(4);
    y << -1.0, 0.5, 2.0, 3.5;
    const MetricReport report = evaluate(y, y);
    CHECK(report.mse == 0.0);
    CHECK(report.mae == 0.0);
    CHECK(report.r2 == 1.0);
}

TEST_CASE("predicting the mean gives r2 of zero") {
    Eigen::VectorXd y_true(4);
    y_true << 1.0, 2.0, 3.0, 4.0;
    const Eigen::VectorXd y_pred = Eigen::VectorXd::Constant(4, 2.5);
    const MetricReport report = evaluate(y_true, y_pred);
    CHECK(report.r2 == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(report.mse > 0.0);
}

TEST_CASE("constant truth leaves r2 undefined but mse and mae valid") {
    const Eigen::VectorXd y_true = Eigen::VectorXd::Constant(5, 0.7);
    Eigen::VectorXd y_pred(5);
    y_pred << 0.7, 0.9, 0.5, 0.7, 0.7;
    const MetricReport report = evaluate(y_true, y_pred);
    CHECK(!report.r2_defined);
    CHECK(std::isnan(report.r2));
    CHECK(report.mse == doctest::Approx(0.016).epsilon(1e-12));
    CHECK(report.mae == doctest::Approx(0.08).epsilon(1e-12));
}

TEST_CASE("input validation") {
    Eigen::VectorXd a(3), b(2), c(1), d(1);
    a.setZero();
    b.setZero();
    c.setZero();
    d.setZero();
    CHECK_THROWS_AS((void)evaluate(a, b), validation_error);
    CHECK_THROWS_AS((void)evaluate(c, d), validation_error);
}

TEST_CASE("matches a naive reimplementation on random data") {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> len(2, 200);
    std::normal_distribution<double> value(0.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = len(rng);
        Eigen::VectorXd y_true(n), y_pred(n);
        for (int i = 0; i < n; ++i) {
            y_true[i] = value(rng);
            y_pred[i] = value(rng);
        }
        const MetricReport lib = evaluate(y_true, y_pred);
        const MetricReport ref = naive_evaluate(y_true, y_pred);
        CHECK(std::abs(lib.mse - ref.mse) <= 1e-12);
        CHECK(std::abs(lib.mae - ref.mae) <= 1e-12);
        CHECK(std::abs(lib.r2 - ref.r2) <= 1e-12);
    }
}

TEST_CASE("mse dominates squared mae (Jensen)") {
    std::mt19937_64 rng(103);
    std::normal_distribution<double> value(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd y_true(30), y_pred(30);
        for (int i = 0; i < 30; ++i) {
            y_true[i] = value(rng);
            y_pred[i] = value(rng);
        }
        const MetricReport report = evaluate(y_true, y_pred);
        CHECK(report.mse + 1e-15 >= report.mae * report.mae);
    }
}

TEST_CASE("metrics transform predictably under scaling") {
    std::mt19937_64 rng(107);
    std::normal_distribution<double> value(0.0, 1.0);
    Eigen::VectorXd y_true(50), y_pred(50);
    for (int i = 0; i < 50; ++i) {
        y_true[i] = value(rng);
        y_pred[i] = value(rng);
    }
    const double c = 3.75;
    const MetricReport base = evaluate(y_true, y_pred);
    const MetricReport scaled = evaluate((c * y_true).eval(), (c * y_pred).eval());
    CHECK(scaled.mse == doctest::Approx(c * c * base.mse).epsilon(1e-12));
    CHECK(scaled.mae == doctest::Approx(c * base.mae).epsilon(1e-12));
    CHECK(scaled.r2 == doctest::Approx(base.r2).epsilon(1e-12));
}

TEST_CASE("csv row formatting") {
    MetricReport report;
    report.mse = 0.25;
    report.mae = 0.5;
    report.r2 = 0.875;
    report.n = 42;
    CHECK(to_csv_row("full", report) == "full,0.875,0.25,0.5,42");

    report.r2_defined = false;
    report.r2 = std::numeric_limits<double>::quiet_NaN();
    CHECK(to_csv_row("raw", report) == "raw,nan,0.25,0.5,42");
}
