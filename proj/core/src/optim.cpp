#include "insight/optim.hpp"

#include <cmath>

namespace insight {

AdamW::AdamW(std::vector<Tensor> params, AdamWConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    if (cfg_.lr < 0.0 || cfg_.weight_decay < 0.0) {
        fail(ErrorKind::config, "AdamW lr and weight decay must be non-negative");
    }
    if (!(cfg_.beta1 >= 0.0 && cfg_.beta1 < 1.0 && cfg_.beta2 >= 0.0 && cfg_.beta2 < 1.0)) {
        fail(ErrorKind::config, "AdamW betas must be in [0,1)");
    }
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
    }
}

void AdamW::step() {
    ++step_count_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
    for (size_t pi = 0; pi < params_.size(); ++pi) {
        Tensor& p = params_[pi];
        if (!p.has_grad()) {
            fail(ErrorKind::state, "AdamW step with unpopulated gradient");
        }
        auto g = p.grad();
        auto theta = p.mutable_data();
        auto& m = m_[pi];
        auto& v = v_[pi];
        const double decay = 1.0 - cfg_.lr * cfg_.weight_decay;
        for (size_t i = 0; i < theta.size(); ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            double mhat = m[i] / bc1;
            double vhat = v[i] / bc2;
            theta[i] = theta[i] * decay - cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

void AdamW::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

double lr_step_decay(int epoch, double base_lr, int step_size, double gamma) {
    if (step_size < 1) fail(ErrorKind::config, "lr step size must be >= 1");
    if (!(gamma > 0.0 && gamma <= 1.0)) fail(ErrorKind::config, "lr gamma must be in (0,1]");
    return base_lr * std::pow(gamma, static_cast<double>(epoch / step_size));
}

} // namespace insight
