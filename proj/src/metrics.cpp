#include "cn/metrics.hpp"

#include <cmath>

#include "cn/matrix.hpp"

namespace cn {

Metrics compute_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                        int n_classes) {
    require(n_classes >= 1, "compute_metrics: n_classes must be positive");
    require(y_true.size() == y_pred.size(), "compute_metrics: label vectors differ in length");
    require(!y_true.empty(), "compute_metrics: empty label vectors");

    std::vector<long> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0);
    long correct = 0;
    for (size_t i = 0; i < y_true.size(); ++i) {
        int t = y_true[i];
        int p = y_pred[i];
        require(t >= 0 && t < n_classes && p >= 0 && p < n_classes,
                "compute_metrics: label out of range");
        if (t == p) {
            ++tp[t];
            ++correct;
        } else {
            ++fn[t];
            ++fp[p];
        }
    }

    Metrics m;
    m.accuracy = static_cast<double>(correct) / static_cast<double>(y_true.size());

    long tp_sum = 0, fp_sum = 0, fn_sum = 0;
    for (int c = 0; c < n_classes; ++c) {
        tp_sum += tp[c];
        fp_sum += fp[c];
        fn_sum += fn[c];
    }
    double micro_denom = static_cast<double>(2 * tp_sum + fp_sum + fn_sum);
    m.micro_f1 = micro_denom > 0.0 ? 2.0 * tp_sum / micro_denom : 0.0;

    double macro_sum = 0.0;
    for (int c = 0; c < n_classes; ++c) {
        double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
        macro_sum += denom > 0.0 ? 2.0 * tp[c] / denom : 0.0;
    }
    m.macro_f1 = macro_sum / n_classes;
    return m;
}

Aggregate aggregate(const std::vector<double>& values) {
    require(!values.empty(), "aggregate: empty value list");
    Aggregate a;
    a.n = static_cast<int>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    a.mean = sum / a.n;
    if (a.n >= 2) {
        double sq = 0.0;
        for (double v : values) {
            double diff = v - a.mean;
            sq += diff * diff;
        }
        a.stddev = std::sqrt(sq / (a.n - 1));
    }
    return a;
}

}  // namespace cn
