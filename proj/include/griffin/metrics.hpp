// Evaluation metrics. Regression metrics operate on normalized values; AUROC
// is rank-based with tie averaging.
#pragma once

#include <string>
#include <vector>

namespace griffin {

enum class MetricKind { accuracy, auroc, mae, rmse, logloss };

const char* to_string(MetricKind kind);
MetricKind metric_from_string(const std::string& s);

// True when larger metric values are better (accuracy, AUROC).
bool metric_maximizes(MetricKind kind);

// predictions/targets semantics per kind:
//   accuracy: predicted class index vs true class index
//   auroc:    positive-class score vs binary {0,1} target
//   mae/rmse: predicted value vs target value (normalized scale)
//   logloss:  positive-class probability vs binary {0,1} target
// Throws DegenerateLabels for AUROC with single-class targets.
double evaluate_metric(MetricKind kind, const std::vector<double>& predictions,
                       const std::vector<double>& targets);

}  // namespace griffin
