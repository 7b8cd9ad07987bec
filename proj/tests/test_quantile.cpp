#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "griffin/common.hpp"
#include "griffin/quantile.hpp"

using namespace griffin;

// Oracle values computed independently with 30-digit arithmetic:
// Phi^-1(1e-6), Phi^-1(0.25), Phi^-1(0.75).
static constexpr double kPhiInv1em6 = -4.75342430882289894819398818985;
static constexpr double kPhiInvQ1 = -0.674489750196081743202227014541;
static constexpr double kPhiInvQ3 = 0.674489750196081743202227014541;

TEST_CASE("normal_quantile matches the high-precision oracle") {
    CHECK(normal_quantile(1e-6) == doctest::Approx(kPhiInv1em6).epsilon(1e-12));
    CHECK(normal_quantile(0.25) == doctest::Approx(kPhiInvQ1).epsilon(1e-12));
    CHECK(normal_quantile(0.75) == doctest::Approx(kPhiInvQ3).epsilon(1e-12));
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    // inverse relationship with the CDF
    for (double x : {-3.5, -1.0, -0.1, 0.0, 0.7, 2.9}) {
        CHECK(normal_quantile(normal_cdf(x)) == doctest::Approx(x).epsilon(1e-10));
    }
}

TEST_CASE("median of 1..1000 maps to 0 within tolerance") {
    std::vector<double> values;
    for (int i = 1; i <= 1000; ++i) values.push_back(i);
    const QuantileNormalizer qn = QuantileNormalizer::fit(values);
    CHECK(std::abs(qn.transform(500.5)) <= 0.01);
}

TEST_CASE("minimum maps to the clipped tail, finite") {
    std::vector<double> values;
    for (int i = 1; i <= 1000; ++i) values.push_back(i);
    const QuantileNormalizer qn = QuantileNormalizer::fit(values);
    const double lo = qn.transform(1.0);
    CHECK(std::isfinite(lo));
    CHECK(lo == doctest::Approx(kPhiInv1em6).epsilon(1e-9));
    const double hi = qn.transform(1000.0);
    CHECK(hi == doctest::Approx(-kPhiInv1em6).epsilon(1e-9));
    // beyond the fitted range still clips
    CHECK(qn.transform(-1e18) == doctest::Approx(kPhiInv1em6).epsilon(1e-9));
}

TEST_CASE("transformed training values look standard normal at the quartiles") {
    std::mt19937_64 rng(5);
    std::exponential_distribution<double> skewed(0.3);  // deliberately non-normal input
    std::vector<double> values;
    for (int i = 0; i < 20000; ++i) values.push_back(skewed(rng));
    const QuantileNormalizer qn = QuantileNormalizer::fit(values);

    std::vector<double> transformed;
    transformed.reserve(values.size());
    for (double v : values) transformed.push_back(qn.transform(v));
    std::sort(transformed.begin(), transformed.end());
    auto empirical_quantile = [&](double p) {
        return transformed[static_cast<std::size_t>(p * (transformed.size() - 1))];
    };
    CHECK(std::abs(empirical_quantile(0.25) - kPhiInvQ1) <= 0.05);
    CHECK(std::abs(empirical_quantile(0.50) - 0.0) <= 0.05);
    CHECK(std::abs(empirical_quantile(0.75) - kPhiInvQ3) <= 0.05);
}

TEST_CASE("transform is monotone on random arrays") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> values;
        const int n = 2 + static_cast<int>(rng() % 500);
        std::normal_distribution<double> dist(0.0, 100.0);
        for (int i = 0; i < n; ++i) values.push_back(dist(rng));
        if (trial % 3 == 0) {
            // inject ties
            for (std::size_t i = 1; i < values.size(); i += 2) values[i] = values[i - 1];
        }
        const QuantileNormalizer qn = QuantileNormalizer::fit(values, 100);

        std::vector<double> probes = values;
        for (int i = 0; i < 50; ++i) probes.push_back(dist(rng));
        std::sort(probes.begin(), probes.end());
        double prev = -HUGE_VAL;
        for (double p : probes) {
            const double t = qn.transform(p);
            CHECK(t >= prev - 1e-12);
            prev = t;
        }
    }
}

TEST_CASE("inverse transform is monotone and inverts the median") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> dist(50.0, 10.0);
    std::vector<double> values;
    for (int i = 0; i < 5001; ++i) values.push_back(dist(rng));
    const QuantileNormalizer qn = QuantileNormalizer::fit(values);

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    CHECK(qn.inverse_transform(0.0) == doctest::Approx(median).epsilon(0.01));

    double prev = -HUGE_VAL;
    for (double z = -5.0; z <= 5.0; z += 0.1) {
        const double x = qn.inverse_transform(z);
        CHECK(x >= prev - 1e-12);
        prev = x;
    }
    // round trip through the bulk of the distribution
    for (double x = 30.0; x <= 70.0; x += 5.0) {
        CHECK(qn.inverse_transform(qn.transform(x)) == doctest::Approx(x).epsilon(0.02));
    }
}

TEST_CASE("fewer than two finite values raises InsufficientData") {
    CHECK_THROWS_AS(QuantileNormalizer::fit({}), InsufficientData);
    CHECK_THROWS_AS(QuantileNormalizer::fit({1.0}), InsufficientData);
    CHECK_THROWS_AS(QuantileNormalizer::fit({1.0, NAN, INFINITY}), InsufficientData);
    CHECK_NOTHROW(QuantileNormalizer::fit({1.0, 2.0}));
}

TEST_CASE("unfitted normalizer raises NotFitted") {
    const QuantileNormalizer qn;
    CHECK_THROWS_AS(qn.transform(0.0), NotFitted);
    CHECK_THROWS_AS(qn.inverse_transform(0.0), NotFitted);
}
