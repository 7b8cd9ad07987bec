#include "griffin/quantile.hpp"

#include <algorithm>
#include <cmath>

#include "griffin/common.hpp"

namespace griffin {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
    // Acklam's rational approximation, then one Halley refinement through the
    // exact CDF; accurate to ~1e-15 over (0, 1).
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (!(p > 0.0) || !(p < 1.0)) {
        if (p == 0.0) return -HUGE_VAL;
        if (p == 1.0) return HUGE_VAL;
        return NAN;
    }

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

namespace {

// np.interp-style piecewise-linear lookup; xp ascending, may contain ties.
double interp(double x, const std::vector<double>& xp, const std::vector<double>& fp) {
    if (x <= xp.front()) return fp.front();
    if (x >= xp.back()) return fp.back();
    const auto it = std::upper_bound(xp.begin(), xp.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - xp.begin());
    const std::size_t lo = hi - 1;
    const double span = xp[hi] - xp[lo];
    if (span <= 0.0) return fp[hi];
    const double t = (x - xp[lo]) / span;
    return fp[lo] + t * (fp[hi] - fp[lo]);
}

}  // namespace

QuantileNormalizer QuantileNormalizer::fit(const std::vector<double>& values, int n_quantiles) {
    std::vector<double> finite;
    finite.reserve(values.size());
    for (double v : values) {
        if (std::isfinite(v)) finite.push_back(v);
    }
    if (finite.size() < 2) {
        throw InsufficientData("quantile fit needs at least 2 finite values, got " +
                               std::to_string(finite.size()));
    }
    std::sort(finite.begin(), finite.end());

    const std::size_t m = std::min<std::size_t>(n_quantiles, finite.size());
    std::vector<double> refs(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double pos = static_cast<double>(j) / static_cast<double>(m - 1) *
                           static_cast<double>(finite.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(lo);
        refs[j] = (lo + 1 < finite.size()) ? finite[lo] * (1.0 - frac) + finite[lo + 1] * frac
                                           : finite[lo];
    }
    return from_references(std::move(refs));
}

QuantileNormalizer QuantileNormalizer::from_references(std::vector<double> refs) {
    QuantileNormalizer qn;
    qn.references_ = std::move(refs);
    const std::size_t m = qn.references_.size();
    qn.levels_.resize(m);
    qn.neg_references_.resize(m);
    qn.neg_levels_.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        qn.levels_[j] = static_cast<double>(j) / static_cast<double>(m - 1);
    }
    for (std::size_t j = 0; j < m; ++j) {
        qn.neg_references_[j] = -qn.references_[m - 1 - j];
        qn.neg_levels_[j] = -qn.levels_[m - 1 - j];
    }
    return qn;
}

double QuantileNormalizer::transform(double x) const {
    if (!fitted()) throw NotFitted("quantile normalizer used before fit");
    // Forward and reverse interpolation averaged: a run of tied reference
    // values maps to the middle of its rank range.
    const double p_fwd = interp(x, references_, levels_);
    const double p_rev = -interp(-x, neg_references_, neg_levels_);
    const double p = 0.5 * (p_fwd + p_rev);
    return normal_quantile(std::clamp(p, kClipEps, 1.0 - kClipEps));
}

double QuantileNormalizer::inverse_transform(double z) const {
    if (!fitted()) throw NotFitted("quantile normalizer used before fit");
    const double p = std::clamp(normal_cdf(z), 0.0, 1.0);
    return interp(p, levels_, references_);
}

}  // namespace griffin
