#pragma once

#include <vector>

namespace cn {

struct Metrics {
    double accuracy = 0.0;
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;
};

// Micro F1 pools true/false positives and negatives over all classes; for
// single-label prediction it coincides with accuracy. Macro F1 averages the
// per-class F1 scores unweighted, with 0/0 treated as 0.
Metrics compute_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                        int n_classes);

struct Aggregate {
    double mean = 0.0;
    double stddev = 0.0;  // sample (n-1) standard deviation; 0 for a single value
    int n = 0;
};

Aggregate aggregate(const std::vector<double>& values);

}  // namespace cn
