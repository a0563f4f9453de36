#pragma once

#include <string>
#include <vector>

#include "insight/tensor.hpp"

namespace insight {

// Binary named-tensor container: magic, count, then per tensor
// (u32 name_len, name bytes, u32 rows, u32 cols, f64 payload).
void save_named_tensors(const std::string& path,
                        const std::vector<std::pair<std::string, Tensor>>& tensors);

std::vector<std::pair<std::string, Tensor>> load_named_tensors(const std::string& path);

// Copies loaded values into the matching live parameters; every destination
// name must be present with an identical shape.
void restore_named_tensors(const std::string& path,
                           const std::vector<std::pair<std::string, Tensor>>& dest);

} // namespace insight
