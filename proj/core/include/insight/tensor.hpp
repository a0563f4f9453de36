#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "insight/error.hpp"
#include "insight/rng.hpp"

namespace insight {

namespace detail {

struct Node {
    int rows = 0;
    int cols = 0;
    std::vector<double> value;
    std::vector<double> grad;   // allocated lazily, same size as value
    bool requires_grad = false;
    bool backward_done = false; // set on the root once backward() ran
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    size_t size() const { return value.size(); }
    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
};

} // namespace detail

// Dense row-major f64 matrix with reverse-mode autodiff. Vectors are 1xN,
// scalars 1x1. Copying a Tensor copies the handle, not the buffer.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(int rows, int cols, bool requires_grad = false);
    static Tensor full(int rows, int cols, double v, bool requires_grad = false);
    static Tensor from_data(int rows, int cols, std::vector<double> data,
                            bool requires_grad = false);
    static Tensor scalar_value(double v);

    bool defined() const { return node_ != nullptr; }
    int rows() const { return node_->rows; }
    int cols() const { return node_->cols; }
    size_t size() const { return node_->value.size(); }

    std::span<const double> data() const { return node_->value; }
    // In-place mutation (optimizer updates, test setup). Must not be called on
    // a tensor that participates in a live graph between forward and backward.
    std::span<double> mutable_data() { return node_->value; }

    double at(int r, int c) const { return node_->value[static_cast<size_t>(r) * node_->cols + c]; }
    double scalar() const;

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool v);

    bool has_grad() const { return node_ && node_->grad.size() == node_->value.size(); }
    std::span<const double> grad() const;
    void zero_grad();
    double grad_norm() const;

    // Identity of the underlying buffer, for parameter bookkeeping.
    const void* id() const { return node_.get(); }

    std::shared_ptr<detail::Node> node() const { return node_; }
    explicit Tensor(std::shared_ptr<detail::Node> n) : node_(std::move(n)) {}

private:
    std::shared_ptr<detail::Node> node_;
};

// Global toggle: validate op outputs for NaN/Inf (on by default).
void set_finite_checks(bool enabled);
bool finite_checks_enabled();

// While alive, ops record no graph; forwards run as pure inference.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

// ---- ops (all differentiable unless stated otherwise) ----

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);                 // same shape
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);                 // elementwise
Tensor scale(const Tensor& a, double s);
Tensor add_row_broadcast(const Tensor& x, const Tensor& bias); // (n,d) + (1,d)
Tensor gelu(const Tensor& x);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& x, int row_begin, int row_end);
Tensor mean_rows(const Tensor& x);                            // (n,d) -> (1,d)
Tensor tile_rows(const Tensor& x, int times);                 // (n,d) -> (n*times,d)
Tensor sum(const Tensor& x);                                  // scalar
Tensor dropout(const Tensor& x, double rate, Rng& rng, bool train);

// Attention over already-projected queries/keys/values, split into `heads`
// heads of dim d/heads, softmax over keys scaled by 1/sqrt(d/heads).
// key_mask: 1 = attend, 0 = exclude (weight exactly zero). causal requires
// n_q == n_k and lets query i attend keys 0..i.
struct AttentionWeights {
    int heads = 0, n_q = 0, n_k = 0;
    std::vector<double> w; // [head][query][key]
    double at(int h, int q, int k) const {
        return w[(static_cast<size_t>(h) * n_q + q) * n_k + k];
    }
};

Tensor attention_core(const Tensor& q_proj, const Tensor& k_proj, const Tensor& v_proj,
                      int heads, bool causal = false,
                      const std::vector<uint8_t>* key_mask = nullptr,
                      AttentionWeights* weights_out = nullptr);

// Full multi-head attention with q/k/v/out projections (each d x d + bias d).
struct MhaParams {
    Tensor wq, bq, wk, bk, wv, bv, wo, bo;
    int heads = 1;

    static MhaParams init(int dim, int heads, Rng& rng);
    void collect(std::vector<std::pair<std::string, Tensor>>& out,
                 const std::string& prefix) const;
};

Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                            const MhaParams& params,
                            AttentionWeights* weights_out = nullptr,
                            const std::vector<uint8_t>* key_mask = nullptr);

// Mean over the batch of w[label]*(-log softmax(scores)[label]), divided by
// the sum of the applied weights.
Tensor weighted_cross_entropy(const Tensor& scores, const std::vector<int>& labels,
                              const Tensor& class_weights);

void backward(const Tensor& loss);

// Linear layer y = x*W + b with W (in x out) and b (1 x out); both init
// uniform(-1/sqrt(in), 1/sqrt(in)).
struct Linear {
    Tensor w, b;

    static Linear init(int in_dim, int out_dim, Rng& rng);
    Tensor forward(const Tensor& x) const { return add_row_broadcast(matmul(x, w), b); }
    void collect(std::vector<std::pair<std::string, Tensor>>& out,
                 const std::string& prefix) const;
};

// Non-graph helpers.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
Tensor random_uniform(int rows, int cols, double lo, double hi, Rng& rng, bool requires_grad);
Tensor random_normal(int rows, int cols, double mean, double stddev, Rng& rng, bool requires_grad);

} // namespace insight
