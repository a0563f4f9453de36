#pragma once

#include <string>
#include <vector>

#include "insight/tensor.hpp"

namespace insight {

struct MetricsReport {
    long tp = 0, fp = 0, tn = 0, fn = 0;
    double precision = 0.0;
    double detection_rate = 0.0; // recall on the malicious class
    double fpr = 0.0;
    double f1 = 0.0;
    std::string granularity = "activity";
    bool zero_division = false; // some 0/0 ratio was defined as 0

    std::string summary_line() const;
};

MetricsReport metrics_from_counts(long tp, long fp, long tn, long fn,
                                  const std::string& granularity);

// Inverse-frequency class weights, normalized so they sum to the class
// count; both classes must be present.
Tensor compute_class_weights(const std::vector<int>& labels, int classes = 2);

} // namespace insight
