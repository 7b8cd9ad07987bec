#include <doctest.h>

#include <cmath>

#include "griffin/common.hpp"
#include "griffin/metrics.hpp"

using namespace griffin;

TEST_CASE("AUROC on the 4-point fixture is exactly 0.75") {
    // positives {0.35, 0.8}, negatives {0.1, 0.4}: 3 of 4 pairs concordant
    const double v = evaluate_metric(MetricKind::auroc, {0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1});
    CHECK(v == 0.75);
}

TEST_CASE("AUROC handles ties with averaged ranks") {
    // tied score pair across classes counts 1/2
    const double v = evaluate_metric(MetricKind::auroc, {0.5, 0.5}, {0, 1});
    CHECK(v == 0.5);
}

TEST_CASE("perfect binary predictions give accuracy and AUROC 1.0") {
    CHECK(evaluate_metric(MetricKind::accuracy, {0, 1, 1, 0}, {0, 1, 1, 0}) == 1.0);
    CHECK(evaluate_metric(MetricKind::auroc, {0.1, 0.9, 0.8, 0.2}, {0, 1, 1, 0}) == 1.0);
}

TEST_CASE("predictions equal to targets give zero MAE and RMSE") {
    const std::vector<double> v = {0.4, -1.2, 3.3};
    CHECK(evaluate_metric(MetricKind::mae, v, v) == 0.0);
    CHECK(evaluate_metric(MetricKind::rmse, v, v) == 0.0);
}

TEST_CASE("MAE and RMSE against hand computation") {
    // errors: 1, -2, 0.5 -> MAE = 3.5/3, RMSE = sqrt(5.25/3)
    const std::vector<double> pred = {2.0, 1.0, 0.5};
    const std::vector<double> target = {1.0, 3.0, 0.0};
    CHECK(evaluate_metric(MetricKind::mae, pred, target) ==
          doctest::Approx(3.5 / 3.0).epsilon(1e-12));
    CHECK(evaluate_metric(MetricKind::rmse, pred, target) ==
          doctest::Approx(std::sqrt(5.25 / 3.0)).epsilon(1e-12));
}

TEST_CASE("log loss against hand computation") {
    // -(log 0.8 + log 0.6)/2
    const double v = evaluate_metric(MetricKind::logloss, {0.8, 0.4}, {1, 0});
    CHECK(v == doctest::Approx(-(std::log(0.8) + std::log(0.6)) / 2.0).epsilon(1e-12));
    // extreme probabilities are clipped, never infinite
    CHECK(std::isfinite(evaluate_metric(MetricKind::logloss, {0.0, 1.0}, {1, 0})));
}

TEST_CASE("single-class AUROC raises DegenerateLabels") {
    CHECK_THROWS_AS(evaluate_metric(MetricKind::auroc, {0.1, 0.4}, {1, 1}), DegenerateLabels);
    CHECK_THROWS_AS(evaluate_metric(MetricKind::auroc, {0.1, 0.4}, {0, 0}), DegenerateLabels);
}

TEST_CASE("empty or misaligned arrays are rejected") {
    CHECK_THROWS_AS(evaluate_metric(MetricKind::accuracy, {}, {}), DimensionMismatch);
    CHECK_THROWS_AS(evaluate_metric(MetricKind::mae, {1.0}, {1.0, 2.0}), DimensionMismatch);
}

TEST_CASE("metric direction table") {
    CHECK(metric_maximizes(MetricKind::accuracy));
    CHECK(metric_maximizes(MetricKind::auroc));
    CHECK_FALSE(metric_maximizes(MetricKind::mae));
    CHECK_FALSE(metric_maximizes(MetricKind::rmse));
    CHECK_FALSE(metric_maximizes(MetricKind::logloss));
}
