#pragma once

#include <cstdint>
#include <vector>

#include "insight/tensor.hpp"

namespace insight {

struct AdamWConfig {
    double lr = 5e-5;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// AdamW with decoupled multiplicative weight decay and bias-corrected moments.
class AdamW {
public:
    AdamW(std::vector<Tensor> params, AdamWConfig cfg);

    // Applies theta <- theta*(1 - lr*wd) - lr * mhat / (sqrt(vhat) + eps).
    // Every parameter must have a populated gradient buffer.
    void step();
    void zero_grad();

    void set_lr(double lr) { cfg_.lr = lr; }
    double lr() const { return cfg_.lr; }
    int64_t step_count() const { return step_count_; }
    const std::vector<Tensor>& params() const { return params_; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    AdamWConfig cfg_;
    int64_t step_count_ = 0;
};

// StepLR: base_lr * gamma^floor(epoch / step_size).
double lr_step_decay(int epoch, double base_lr, int step_size, double gamma);

} // namespace insight
