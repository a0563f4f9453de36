#include "insight/train.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "insight/optim.hpp"

namespace insight {

TrainResult train_model(InsightModel& model, const Dataset& data, const RunConfig& cfg) {
    TrainResult result;
    auto named = model.trainable_parameters();
    std::vector<Tensor> params;
    params.reserve(named.size());
    for (auto& [name, t] : named) params.push_back(t);

    AdamWConfig opt_cfg;
    opt_cfg.lr = cfg.lr;
    opt_cfg.weight_decay = cfg.weight_decay;
    AdamW opt(params, opt_cfg);

    Rng shuffle_rng = Rng(cfg.seed).fork("train.shuffle");
    std::vector<size_t> order(data.train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<std::vector<double>> best_snapshot;
    double best_f1 = -1.0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double lr = lr_step_decay(epoch, cfg.lr, cfg.lr_step, cfg.lr_gamma);
        opt.set_lr(lr);
        // Fisher-Yates with the run-owned stream.
        for (size_t i = order.size(); i > 1; --i) {
            size_t j = shuffle_rng.next_below(i);
            std::swap(order[i - 1], order[j]);
        }
        double loss_sum = 0.0;
        size_t batches = 0;
        for (size_t begin = 0; begin < order.size(); begin += cfg.batch) {
            size_t end = std::min(order.size(), begin + cfg.batch);
            std::vector<Tensor> scores;
            std::vector<int> labels;
            scores.reserve(end - begin);
            for (size_t k = begin; k < end; ++k) {
                const Sample& s = data.train[order[k]];
                scores.push_back(model.forward_scores(s.views, /*train=*/true));
                labels.push_back(s.label);
            }
            Tensor batch_scores = scores.size() == 1 ? scores[0] : concat_rows(scores);
            Tensor loss = weighted_cross_entropy(batch_scores, labels, data.class_weights);
            double loss_value = loss.scalar();
            if (!std::isfinite(loss_value)) {
                fail(ErrorKind::numeric,
                     "training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                         ", batch " + std::to_string(batches) + ", lr " + std::to_string(lr));
            }
            opt.zero_grad();
            backward(loss);
            opt.step();
            loss_sum += loss_value;
            ++batches;
        }

        EpochLog log;
        log.epoch = epoch;
        log.lr = lr;
        log.mean_loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
        if (!data.val.empty()) {
            log.val = evaluate_model(model, data.val, "activity");
            if (log.val.f1 > best_f1) {
                best_f1 = log.val.f1;
                best_snapshot = model.snapshot_parameters();
                result.best_epoch = epoch;
                result.best_val = log.val;
            }
        }
        result.epochs.push_back(std::move(log));
    }

    if (!best_snapshot.empty()) {
        model.restore_parameters(best_snapshot);
    }
    return result;
}

MetricsReport evaluate_model(InsightModel& model, const std::vector<Sample>& samples,
                             const std::string& granularity) {
    if (samples.empty()) fail(ErrorKind::input, "evaluate on an empty split");
    if (granularity != "activity" && granularity != "session") {
        fail(ErrorKind::config, "granularity must be activity or session");
    }
    long tp = 0, fp = 0, tn = 0, fn = 0;
    if (granularity == "activity") {
        for (const auto& s : samples) {
            int pred = model.predict(s.views).pred.label;
            if (s.label == 1 && pred == 1) ++tp;
            else if (s.label == 1 && pred == 0) ++fn;
            else if (s.label == 0 && pred == 1) ++fp;
            else ++tn;
        }
    } else {
        // session malicious iff any contained activity is malicious
        std::map<std::string, std::pair<int, int>> by_session; // label, pred
        for (const auto& s : samples) {
            int pred = model.predict(s.views).pred.label;
            auto& agg = by_session[s.session_id];
            agg.first = std::max(agg.first, s.label);
            agg.second = std::max(agg.second, pred);
        }
        for (const auto& [sid, lp] : by_session) {
            if (lp.first == 1 && lp.second == 1) ++tp;
            else if (lp.first == 1 && lp.second == 0) ++fn;
            else if (lp.first == 0 && lp.second == 1) ++fp;
            else ++tn;
        }
    }
    return metrics_from_counts(tp, fp, tn, fn, granularity);
}

} // namespace insight
