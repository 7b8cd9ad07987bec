#include "griffin/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "griffin/common.hpp"

namespace griffin {

const char* to_string(MetricKind kind) {
    switch (kind) {
        case MetricKind::accuracy: return "accuracy";
        case MetricKind::auroc: return "auroc";
        case MetricKind::mae: return "mae";
        case MetricKind::rmse: return "rmse";
        case MetricKind::logloss: return "logloss";
    }
    return "?";
}

MetricKind metric_from_string(const std::string& s) {
    if (s == "accuracy") return MetricKind::accuracy;
    if (s == "auroc") return MetricKind::auroc;
    if (s == "mae") return MetricKind::mae;
    if (s == "rmse") return MetricKind::rmse;
    if (s == "logloss") return MetricKind::logloss;
    throw ParseError("unknown metric: \"" + s + "\"");
}

bool metric_maximizes(MetricKind kind) {
    return kind == MetricKind::accuracy || kind == MetricKind::auroc;
}

namespace {

double auroc(const std::vector<double>& scores, const std::vector<double>& targets) {
    // Mann-Whitney U through mid-ranks; ties in scores get averaged ranks.
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    std::vector<double> rank(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
        i = j + 1;
    }

    double rank_sum_pos = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (targets[k] > 0.5) {
            rank_sum_pos += rank[k];
            ++n_pos;
        }
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw DegenerateLabels("AUROC undefined with a single target class");
    }
    const double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace

double evaluate_metric(MetricKind kind, const std::vector<double>& predictions,
                       const std::vector<double>& targets) {
    if (predictions.empty() || predictions.size() != targets.size()) {
        throw DimensionMismatch("metric needs aligned nonempty prediction/target arrays");
    }
    const double n = static_cast<double>(predictions.size());
    switch (kind) {
        case MetricKind::accuracy: {
            double hits = 0.0;
            for (std::size_t i = 0; i < predictions.size(); ++i) {
                if (predictions[i] == targets[i]) hits += 1.0;
            }
            return hits / n;
        }
        case MetricKind::auroc:
            return auroc(predictions, targets);
        case MetricKind::mae: {
            double total = 0.0;
            for (std::size_t i = 0; i < predictions.size(); ++i) {
                total += std::abs(predictions[i] - targets[i]);
            }
            return total / n;
        }
        case MetricKind::rmse: {
            double total = 0.0;
            for (std::size_t i = 0; i < predictions.size(); ++i) {
                const double e = predictions[i] - targets[i];
                total += e * e;
            }
            return std::sqrt(total / n);
        }
        case MetricKind::logloss: {
            double total = 0.0;
            for (std::size_t i = 0; i < predictions.size(); ++i) {
                const double p = std::clamp(predictions[i], 1e-12, 1.0 - 1e-12);
                total += targets[i] > 0.5 ? -std::log(p) : -std::log(1.0 - p);
            }
            return total / n;
        }
    }
    throw ConsistencyError("unreachable");
}

}  // namespace griffin
