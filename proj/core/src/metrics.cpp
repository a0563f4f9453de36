#include "insight/metrics.hpp"

#include <cstdio>

namespace insight {

MetricsReport metrics_from_counts(long tp, long fp, long tn, long fn,
                                  const std::string& granularity) {
    MetricsReport r;
    r.tp = tp;
    r.fp = fp;
    r.tn = tn;
    r.fn = fn;
    r.granularity = granularity;
    auto ratio = [&r](long num, long den) {
        if (den == 0) {
            r.zero_division = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    r.precision = ratio(tp, tp + fp);
    r.detection_rate = ratio(tp, tp + fn);
    r.fpr = ratio(fp, fp + tn);
    if (r.precision + r.detection_rate == 0.0) {
        r.zero_division = true;
        r.f1 = 0.0;
    } else {
        r.f1 = 2.0 * r.precision * r.detection_rate / (r.precision + r.detection_rate);
    }
    return r;
}

std::string MetricsReport::summary_line() const {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "prec=%.4f dr=%.4f fpr=%.4f f1=%.4f (tp=%ld fp=%ld tn=%ld fn=%ld, %s)",
                  precision, detection_rate, fpr, f1, tp, fp, tn, fn, granularity.c_str());
    return buf;
}

Tensor compute_class_weights(const std::vector<int>& labels, int classes) {
    std::vector<double> counts(classes, 0.0);
    for (int l : labels) {
        if (l < 0 || l >= classes) fail(ErrorKind::index, "label out of range");
        counts[l] += 1.0;
    }
    for (int c = 0; c < classes; ++c) {
        if (counts[c] == 0.0) {
            fail(ErrorKind::config, "class " + std::to_string(c) + " missing from training labels");
        }
    }
    std::vector<double> w(classes);
    double total = 0.0;
    for (int c = 0; c < classes; ++c) {
        w[c] = 1.0 / counts[c];
        total += w[c];
    }
    for (auto& v : w) v = v / total * classes;
    return Tensor::from_data(1, classes, std::move(w));
}

} // namespace insight
