#pragma once

#include <functional>
#include <string>
#include <vector>

#include "insight/tensor.hpp"

namespace insight {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

// Central-difference check of analytic gradients. `f` must be a deterministic
// scalar function of the given parameters; it is re-evaluated with each
// coordinate perturbed by +-step. Relative error uses
// |a - n| / max(|a|, |n|, 1e-6).
GradCheckReport finite_diff_check(const std::function<Tensor()>& f,
                                  const std::vector<std::pair<std::string, Tensor>>& params,
                                  double step);

} // namespace insight
