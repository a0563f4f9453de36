#pragma once

#include <vector>

#include "insight/dataset.hpp"
#include "insight/model.hpp"

namespace insight {

struct EpochLog {
    int epoch = 0;
    double lr = 0.0;
    double mean_loss = 0.0;
    MetricsReport val;
};

struct TrainResult {
    std::vector<EpochLog> epochs;
    int best_epoch = -1; // -1: no validation selection happened
    MetricsReport best_val;
};

// AdamW over adapters + fusion queries + LoRA (+ mlp head when configured)
// with weighted cross entropy and the step-decay schedule. Keeps the
// best-validation-F1 parameters and restores them at the end. A non-finite
// loss aborts with a diagnostic message.
TrainResult train_model(InsightModel& model, const Dataset& data, const RunConfig& cfg);

MetricsReport evaluate_model(InsightModel& model, const std::vector<Sample>& samples,
                             const std::string& granularity);

} // namespace insight
