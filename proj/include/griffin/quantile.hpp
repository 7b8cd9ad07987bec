// Rank-based quantile normalization onto the standard normal, plus the
// normal CDF / quantile helpers it needs.
#pragma once

#include <vector>

namespace griffin {

double normal_cdf(double x);
// Inverse standard-normal CDF (Acklam's approximation + one Halley step).
double normal_quantile(double p);

// Fitted on a training split; transform(x) = Phi^-1(clip(rank(x)/n, eps, 1-eps))
// with linear interpolation between stored evenly-spaced order statistics.
class QuantileNormalizer {
public:
    static constexpr double kClipEps = 1e-6;

    QuantileNormalizer() = default;

    // Throws InsufficientData when fewer than 2 finite values are given.
    static QuantileNormalizer fit(const std::vector<double>& values, int n_quantiles = 1000);

    bool fitted() const { return !references_.empty(); }
    double transform(double x) const;          // monotone, median -> 0
    double inverse_transform(double z) const;  // monotone, 0 -> training median

    const std::vector<double>& references() const { return references_; }
    static QuantileNormalizer from_references(std::vector<double> refs);

private:
    std::vector<double> references_;  // ascending, levels j/(m-1)
    std::vector<double> levels_;
    std::vector<double> neg_references_;  // reversed negation, for the tie-symmetric pass
    std::vector<double> neg_levels_;
};

}  // namespace griffin
