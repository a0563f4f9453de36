#include "insight/grad_check.hpp"

#include <cmath>

namespace insight {

GradCheckReport finite_diff_check(const std::function<Tensor()>& f,
                                  const std::vector<std::pair<std::string, Tensor>>& params,
                                  double step) {
    if (!(step > 0.0)) fail(ErrorKind::config, "finite difference step must be > 0");

    for (auto& [name, p] : params) {
        const_cast<Tensor&>(p).zero_grad();
    }
    Tensor loss = f();
    if (!std::isfinite(loss.scalar())) fail(ErrorKind::numeric, "loss is not finite");
    backward(loss);

    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const auto& [name, p] : params) {
        analytic.emplace_back(p.grad().begin(), p.grad().end());
    }

    GradCheckReport report;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Tensor p = params[pi].second;
        auto data = p.mutable_data();
        for (size_t i = 0; i < data.size(); ++i) {
            double saved = data[i];
            data[i] = saved + step;
            double f_plus = f().scalar();
            data[i] = saved - step;
            double f_minus = f().scalar();
            data[i] = saved;
            if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
                fail(ErrorKind::numeric, "perturbed loss is not finite");
            }
            double numeric = (f_plus - f_minus) / (2.0 * step);
            double a = analytic[pi][i];
            double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-6});
            double rel = std::fabs(a - numeric) / denom;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = params[pi].first;
                report.worst_index = i;
                report.analytic = a;
                report.numeric = numeric;
            }
        }
    }
    return report;
}

} // namespace insight
