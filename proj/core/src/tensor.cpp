#include "insight/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

namespace insight {

namespace {

bool g_finite_checks = true;
thread_local bool g_no_grad = false;

using NodePtr = std::shared_ptr<detail::Node>;

NodePtr new_node(int rows, int cols) {
    auto n = std::make_shared<detail::Node>();
    n->rows = rows;
    n->cols = cols;
    n->value.assign(static_cast<size_t>(rows) * cols, 0.0);
    return n;
}

void check_finite(const detail::Node& n, const char* op) {
    if (!g_finite_checks) return;
    for (double v : n.value) {
        if (!std::isfinite(v)) {
            fail(ErrorKind::numeric, std::string(op) + ": non-finite value produced");
        }
    }
}

std::string shape_str(const Tensor& t) {
    return "(" + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + ")";
}

} // namespace

void set_finite_checks(bool enabled) { g_finite_checks = enabled; }
bool finite_checks_enabled() { return g_finite_checks; }

NoGradGuard::NoGradGuard() : previous_(g_no_grad) { g_no_grad = true; }
NoGradGuard::~NoGradGuard() { g_no_grad = previous_; }

Tensor Tensor::zeros(int rows, int cols, bool requires_grad) {
    if (rows <= 0 || cols <= 0) fail(ErrorKind::dimension, "tensor dims must be positive");
    auto n = new_node(rows, cols);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
}

Tensor Tensor::full(int rows, int cols, double v, bool requires_grad) {
    Tensor t = zeros(rows, cols, requires_grad);
    std::fill(t.node()->value.begin(), t.node()->value.end(), v);
    if (!std::isfinite(v)) fail(ErrorKind::numeric, "tensor fill value must be finite");
    return t;
}

Tensor Tensor::from_data(int rows, int cols, std::vector<double> data, bool requires_grad) {
    if (rows <= 0 || cols <= 0) fail(ErrorKind::dimension, "tensor dims must be positive");
    if (data.size() != static_cast<size_t>(rows) * cols) {
        fail(ErrorKind::dimension, "data length does not match shape");
    }
    for (double v : data) {
        if (!std::isfinite(v)) fail(ErrorKind::numeric, "tensor data must be finite");
    }
    auto n = new_node(rows, cols);
    n->value = std::move(data);
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
}

Tensor Tensor::scalar_value(double v) { return from_data(1, 1, {v}); }

double Tensor::scalar() const {
    if (size() != 1) fail(ErrorKind::dimension, "scalar() on tensor of size " + std::to_string(size()));
    return node_->value[0];
}

void Tensor::set_requires_grad(bool v) {
    if (v && node_->backward_fn) {
        fail(ErrorKind::state, "cannot mark a derived tensor as a parameter");
    }
    node_->requires_grad = v;
}

std::span<const double> Tensor::grad() const {
    if (!has_grad()) fail(ErrorKind::state, "gradient not populated");
    return node_->grad;
}

void Tensor::zero_grad() {
    node_->grad.assign(node_->value.size(), 0.0);
}

double Tensor::grad_norm() const {
    if (!has_grad()) return 0.0;
    double s = 0.0;
    for (double g : node_->grad) s += g * g;
    return std::sqrt(s);
}

namespace {

// Builds the result node; wires parents and the backward fn only when a
// parent needs gradients, so pure inference carries no graph.
Tensor make_op(int rows, int cols, std::vector<NodePtr> parents,
               std::function<void(detail::Node&)> backward_fn, const char* op_name) {
    auto n = new_node(rows, cols);
    bool needs = false;
    if (!g_no_grad) {
        for (const auto& p : parents) needs = needs || p->requires_grad;
    }
    if (needs) {
        n->requires_grad = true;
        n->parents = std::move(parents);
        n->backward_fn = std::move(backward_fn);
    }
    (void)op_name;
    return Tensor(n);
}

void accum(detail::Node& n, size_t idx, double v) { n.grad[idx] += v; }

} // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) {
        fail(ErrorKind::dimension, "matmul inner dims " + shape_str(a) + " x " + shape_str(b));
    }
    const int m = a.rows(), k = a.cols(), n = b.cols();
    auto pa = a.node(), pb = b.node();
    Tensor out = make_op(m, n, {pa, pb}, [pa, pb, m, k, n](detail::Node& self) {
        const auto& g = self.grad;
        if (pa->requires_grad) {
            pa->ensure_grad();
            // dA = dC * B^T
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j) {
                    double gij = g[static_cast<size_t>(i) * n + j];
                    if (gij == 0.0) continue;
                    for (int l = 0; l < k; ++l)
                        accum(*pa, static_cast<size_t>(i) * k + l,
                              gij * pb->value[static_cast<size_t>(l) * n + j]);
                }
        }
        if (pb->requires_grad) {
            pb->ensure_grad();
            // dB = A^T * dC
            for (int l = 0; l < k; ++l)
                for (int i = 0; i < m; ++i) {
                    double ail = pa->value[static_cast<size_t>(i) * k + l];
                    if (ail == 0.0) continue;
                    for (int j = 0; j < n; ++j)
                        accum(*pb, static_cast<size_t>(l) * n + j,
                              ail * g[static_cast<size_t>(i) * n + j]);
                }
        }
    }, "matmul");
    auto& c = out.node()->value;
    for (int i = 0; i < m; ++i) {
        const double* arow = &pa->value[static_cast<size_t>(i) * k];
        double* crow = &c[static_cast<size_t>(i) * n];
        for (int l = 0; l < k; ++l) {
            double ail = arow[l];
            if (ail == 0.0) continue;
            const double* brow = &pb->value[static_cast<size_t>(l) * n];
            for (int j = 0; j < n; ++j) crow[j] += ail * brow[j];
        }
    }
    check_finite(*out.node(), "matmul");
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        fail(ErrorKind::dimension, "add shapes " + shape_str(a) + " vs " + shape_str(b));
    }
    auto pa = a.node(), pb = b.node();
    Tensor out = make_op(a.rows(), a.cols(), {pa, pb}, [pa, pb](detail::Node& self) {
        if (pa->requires_grad) {
            pa->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i];
        }
        if (pb->requires_grad) {
            pb->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pb->grad[i] += self.grad[i];
        }
    }, "add");
    auto& c = out.node()->value;
    for (size_t i = 0; i < c.size(); ++i) c[i] = pa->value[i] + pb->value[i];
    check_finite(*out.node(), "add");
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) { return add(a, scale(b, -1.0)); }

Tensor mul(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        fail(ErrorKind::dimension, "mul shapes " + shape_str(a) + " vs " + shape_str(b));
    }
    auto pa = a.node(), pb = b.node();
    Tensor out = make_op(a.rows(), a.cols(), {pa, pb}, [pa, pb](detail::Node& self) {
        if (pa->requires_grad) {
            pa->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i] * pb->value[i];
        }
        if (pb->requires_grad) {
            pb->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pb->grad[i] += self.grad[i] * pa->value[i];
        }
    }, "mul");
    auto& c = out.node()->value;
    for (size_t i = 0; i < c.size(); ++i) c[i] = pa->value[i] * pb->value[i];
    check_finite(*out.node(), "mul");
    return out;
}

Tensor scale(const Tensor& a, double s) {
    auto pa = a.node();
    Tensor out = make_op(a.rows(), a.cols(), {pa}, [pa, s](detail::Node& self) {
        if (!pa->requires_grad) return;
        pa->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i] * s;
    }, "scale");
    auto& c = out.node()->value;
    for (size_t i = 0; i < c.size(); ++i) c[i] = pa->value[i] * s;
    check_finite(*out.node(), "scale");
    return out;
}

Tensor add_row_broadcast(const Tensor& x, const Tensor& bias) {
    if (bias.rows() != 1 || bias.cols() != x.cols()) {
        fail(ErrorKind::dimension, "bias must be (1," + std::to_string(x.cols()) + ")");
    }
    const int n = x.rows(), d = x.cols();
    auto px = x.node(), pb = bias.node();
    Tensor out = make_op(n, d, {px, pb}, [px, pb, n, d](detail::Node& self) {
        if (px->requires_grad) {
            px->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) px->grad[i] += self.grad[i];
        }
        if (pb->requires_grad) {
            pb->ensure_grad();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j)
                    pb->grad[j] += self.grad[static_cast<size_t>(i) * d + j];
        }
    }, "add_row_broadcast");
    auto& c = out.node()->value;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            c[static_cast<size_t>(i) * d + j] = px->value[static_cast<size_t>(i) * d + j] + pb->value[j];
    check_finite(*out.node(), "add_row_broadcast");
    return out;
}

Tensor gelu(const Tensor& x) {
    auto px = x.node();
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    Tensor out = make_op(x.rows(), x.cols(), {px}, [px, inv_sqrt2, inv_sqrt_2pi](detail::Node& self) {
        if (!px->requires_grad) return;
        px->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) {
            double v = px->value[i];
            double cdf = 0.5 * (1.0 + std::erf(v * inv_sqrt2));
            double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
            px->grad[i] += self.grad[i] * (cdf + v * pdf);
        }
    }, "gelu");
    auto& c = out.node()->value;
    for (size_t i = 0; i < c.size(); ++i) {
        double v = px->value[i];
        c[i] = 0.5 * v * (1.0 + std::erf(v * inv_sqrt2));
    }
    check_finite(*out.node(), "gelu");
    return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
    const int n = x.rows(), d = x.cols();
    if (d < 1) fail(ErrorKind::dimension, "layer_norm requires d >= 1");
    if (eps < 0.0) fail(ErrorKind::config, "layer_norm eps must be >= 0");
    if (gain.rows() != 1 || gain.cols() != d || bias.rows() != 1 || bias.cols() != d) {
        fail(ErrorKind::dimension, "layer_norm gain/bias must be (1,d)");
    }
    auto px = x.node(), pg = gain.node(), pb = bias.node();

    // Save per-row inv std and normalized values for the backward pass.
    auto xhat = std::make_shared<std::vector<double>>(static_cast<size_t>(n) * d);
    auto inv_std = std::make_shared<std::vector<double>>(n);
    for (int i = 0; i < n; ++i) {
        const double* row = &px->value[static_cast<size_t>(i) * d];
        double mean = 0.0;
        for (int j = 0; j < d; ++j) mean += row[j];
        mean /= d;
        double var = 0.0;
        for (int j = 0; j < d; ++j) {
            double c = row[j] - mean;
            var += c * c;
        }
        var /= d;
        double denom = std::sqrt(var + eps);
        double is = denom > 0.0 ? 1.0 / denom : 0.0; // zero-variance row with eps=0 maps to zeros
        (*inv_std)[i] = is;
        for (int j = 0; j < d; ++j) (*xhat)[static_cast<size_t>(i) * d + j] = (row[j] - mean) * is;
    }

    Tensor out = make_op(n, d, {px, pg, pb}, [px, pg, pb, xhat, inv_std, n, d](detail::Node& self) {
        if (pg->requires_grad) pg->ensure_grad();
        if (pb->requires_grad) pb->ensure_grad();
        if (px->requires_grad) px->ensure_grad();
        for (int i = 0; i < n; ++i) {
            const double* gy = &self.grad[static_cast<size_t>(i) * d];
            const double* xh = &(*xhat)[static_cast<size_t>(i) * d];
            if (pg->requires_grad || pb->requires_grad) {
                for (int j = 0; j < d; ++j) {
                    if (pg->requires_grad) pg->grad[j] += gy[j] * xh[j];
                    if (pb->requires_grad) pb->grad[j] += gy[j];
                }
            }
            if (px->requires_grad) {
                double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
                for (int j = 0; j < d; ++j) {
                    double dxh = gy[j] * pg->value[j];
                    mean_dxhat += dxh;
                    mean_dxhat_xhat += dxh * xh[j];
                }
                mean_dxhat /= d;
                mean_dxhat_xhat /= d;
                double is = (*inv_std)[i];
                for (int j = 0; j < d; ++j) {
                    double dxh = gy[j] * pg->value[j];
                    px->grad[static_cast<size_t>(i) * d + j] +=
                        (dxh - mean_dxhat - xh[j] * mean_dxhat_xhat) * is;
                }
            }
        }
    }, "layer_norm");

    auto& c = out.node()->value;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            c[static_cast<size_t>(i) * d + j] =
                (*xhat)[static_cast<size_t>(i) * d + j] * pg->value[j] + pb->value[j];
    check_finite(*out.node(), "layer_norm");
    return out;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
    if (parts.empty()) fail(ErrorKind::input, "concat_rows of zero tensors");
    const int d = parts[0].cols();
    int total = 0;
    std::vector<NodePtr> parents;
    parents.reserve(parts.size());
    for (const auto& p : parts) {
        if (p.cols() != d) fail(ErrorKind::dimension, "concat_rows column mismatch");
        total += p.rows();
        parents.push_back(p.node());
    }
    auto parents_copy = parents;
    Tensor out = make_op(total, d, std::move(parents), [parents_copy, d](detail::Node& self) {
        size_t offset = 0;
        for (const auto& p : parents_copy) {
            size_t len = p->value.size();
            if (p->requires_grad) {
                p->ensure_grad();
                for (size_t i = 0; i < len; ++i) p->grad[i] += self.grad[offset + i];
            }
            offset += len;
        }
    }, "concat_rows");
    auto& c = out.node()->value;
    size_t offset = 0;
    for (const auto& p : parents_copy) {
        std::copy(p->value.begin(), p->value.end(), c.begin() + offset);
        offset += p->value.size();
    }
    return out;
}

Tensor slice_rows(const Tensor& x, int row_begin, int row_end) {
    if (row_begin < 0 || row_end > x.rows() || row_begin >= row_end) {
        fail(ErrorKind::dimension, "slice_rows range invalid");
    }
    const int d = x.cols();
    auto px = x.node();
    Tensor out = make_op(row_end - row_begin, d, {px}, [px, row_begin, d](detail::Node& self) {
        if (!px->requires_grad) return;
        px->ensure_grad();
        size_t base = static_cast<size_t>(row_begin) * d;
        for (size_t i = 0; i < self.grad.size(); ++i) px->grad[base + i] += self.grad[i];
    }, "slice_rows");
    auto& c = out.node()->value;
    std::copy(px->value.begin() + static_cast<size_t>(row_begin) * d,
              px->value.begin() + static_cast<size_t>(row_end) * d, c.begin());
    return out;
}

Tensor mean_rows(const Tensor& x) {
    const int n = x.rows(), d = x.cols();
    auto px = x.node();
    Tensor out = make_op(1, d, {px}, [px, n, d](detail::Node& self) {
        if (!px->requires_grad) return;
        px->ensure_grad();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < d; ++j)
                px->grad[static_cast<size_t>(i) * d + j] += self.grad[j] / n;
    }, "mean_rows");
    auto& c = out.node()->value;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) c[j] += px->value[static_cast<size_t>(i) * d + j];
    for (int j = 0; j < d; ++j) c[j] /= n;
    check_finite(*out.node(), "mean_rows");
    return out;
}

Tensor tile_rows(const Tensor& x, int times) {
    if (times < 1) fail(ErrorKind::config, "tile_rows times must be >= 1");
    const int n = x.rows(), d = x.cols();
    auto px = x.node();
    Tensor out = make_op(n * times, d, {px}, [px, times, n, d](detail::Node& self) {
        if (!px->requires_grad) return;
        px->ensure_grad();
        size_t block = static_cast<size_t>(n) * d;
        for (int t = 0; t < times; ++t)
            for (size_t i = 0; i < block; ++i) px->grad[i] += self.grad[static_cast<size_t>(t) * block + i];
    }, "tile_rows");
    auto& c = out.node()->value;
    size_t block = static_cast<size_t>(n) * d;
    for (int t = 0; t < times; ++t)
        std::copy(px->value.begin(), px->value.end(), c.begin() + static_cast<size_t>(t) * block);
    return out;
}

Tensor sum(const Tensor& x) {
    auto px = x.node();
    Tensor out = make_op(1, 1, {px}, [px](detail::Node& self) {
        if (!px->requires_grad) return;
        px->ensure_grad();
        for (size_t i = 0; i < px->grad.size(); ++i) px->grad[i] += self.grad[0];
    }, "sum");
    double s = 0.0;
    for (double v : px->value) s += v;
    out.node()->value[0] = s;
    check_finite(*out.node(), "sum");
    return out;
}

Tensor dropout(const Tensor& x, double rate, Rng& rng, bool train) {
    if (rate < 0.0 || rate >= 1.0) fail(ErrorKind::config, "dropout rate must be in [0,1)");
    if (!train || rate == 0.0) return x;
    const double keep = 1.0 - rate;
    auto px = x.node();
    auto mask = std::make_shared<std::vector<double>>(px->value.size());
    for (auto& m : *mask) m = rng.uniform() < rate ? 0.0 : 1.0 / keep;
    Tensor out = make_op(x.rows(), x.cols(), {px}, [px, mask](detail::Node& self) {
        if (!px->requires_grad) return;
        px->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) px->grad[i] += self.grad[i] * (*mask)[i];
    }, "dropout");
    auto& c = out.node()->value;
    for (size_t i = 0; i < c.size(); ++i) c[i] = px->value[i] * (*mask)[i];
    return out;
}

Tensor attention_core(const Tensor& q_proj, const Tensor& k_proj, const Tensor& v_proj,
                      int heads, bool causal, const std::vector<uint8_t>* key_mask,
                      AttentionWeights* weights_out) {
    const int n_q = q_proj.rows(), n_k = k_proj.rows(), d = q_proj.cols();
    if (k_proj.cols() != d || v_proj.cols() != d || v_proj.rows() != n_k) {
        fail(ErrorKind::dimension, "attention_core projected shapes disagree");
    }
    if (heads < 1 || d % heads != 0) {
        fail(ErrorKind::config, "attention dim " + std::to_string(d) +
                                    " not divisible by heads " + std::to_string(heads));
    }
    if (n_k < 1) fail(ErrorKind::input, "attention requires at least one key");
    if (causal && n_q != n_k) fail(ErrorKind::config, "causal attention requires n_q == n_k");
    if (key_mask && static_cast<int>(key_mask->size()) != n_k) {
        fail(ErrorKind::dimension, "key mask length must equal key count");
    }
    const int dh = d / heads;
    const double scl = 1.0 / std::sqrt(static_cast<double>(dh));

    auto pq = q_proj.node(), pk = k_proj.node(), pv = v_proj.node();
    auto attn = std::make_shared<std::vector<double>>(
        static_cast<size_t>(heads) * n_q * n_k, 0.0);
    std::vector<uint8_t> mask_copy;
    if (key_mask) mask_copy = *key_mask;

    // Forward: per head, scaled dot-product with max-subtracted softmax.
    for (int h = 0; h < heads; ++h) {
        const int off = h * dh;
        for (int i = 0; i < n_q; ++i) {
            double* arow = &(*attn)[(static_cast<size_t>(h) * n_q + i) * n_k];
            double maxv = -1e300;
            bool any = false;
            for (int j = 0; j < n_k; ++j) {
                if (causal && j > i) break;
                if (!mask_copy.empty() && !mask_copy[j]) continue;
                double s = 0.0;
                const double* qr = &pq->value[static_cast<size_t>(i) * d + off];
                const double* kr = &pk->value[static_cast<size_t>(j) * d + off];
                for (int t = 0; t < dh; ++t) s += qr[t] * kr[t];
                s *= scl;
                arow[j] = s;
                maxv = std::max(maxv, s);
                any = true;
            }
            if (!any) fail(ErrorKind::input, "attention row has no attendable key");
            double z = 0.0;
            for (int j = 0; j < n_k; ++j) {
                bool active = !(causal && j > i) && (mask_copy.empty() || mask_copy[j]);
                if (!active) { arow[j] = 0.0; continue; }
                arow[j] = std::exp(arow[j] - maxv);
                z += arow[j];
            }
            for (int j = 0; j < n_k; ++j) arow[j] /= z;
        }
    }

    Tensor out = make_op(n_q, d, {pq, pk, pv},
                         [pq, pk, pv, attn, heads, dh, n_q, n_k, scl](detail::Node& self) {
        const int d = heads * dh;
        if (pq->requires_grad) pq->ensure_grad();
        if (pk->requires_grad) pk->ensure_grad();
        if (pv->requires_grad) pv->ensure_grad();
        std::vector<double> drow(n_k);
        for (int h = 0; h < heads; ++h) {
            const int off = h * dh;
            for (int i = 0; i < n_q; ++i) {
                const double* arow = &(*attn)[(static_cast<size_t>(h) * n_q + i) * n_k];
                const double* go = &self.grad[static_cast<size_t>(i) * d + off];
                // dA[j] = sum_t dO[t] * V[j][t]; dV[j] += A[j] * dO
                double dot = 0.0;
                for (int j = 0; j < n_k; ++j) {
                    if (arow[j] == 0.0) { drow[j] = 0.0; continue; }
                    const double* vr = &pv->value[static_cast<size_t>(j) * d + off];
                    double da = 0.0;
                    for (int t = 0; t < dh; ++t) da += go[t] * vr[t];
                    drow[j] = da;
                    dot += da * arow[j];
                    if (pv->requires_grad) {
                        double* gv = &pv->grad[static_cast<size_t>(j) * d + off];
                        for (int t = 0; t < dh; ++t) gv[t] += arow[j] * go[t];
                    }
                }
                // softmax backward: dS[j] = A[j] * (dA[j] - sum_k dA[k]*A[k])
                for (int j = 0; j < n_k; ++j) {
                    if (arow[j] == 0.0) continue;
                    double ds = arow[j] * (drow[j] - dot) * scl;
                    if (ds == 0.0) continue;
                    const double* kr = &pk->value[static_cast<size_t>(j) * d + off];
                    const double* qr = &pq->value[static_cast<size_t>(i) * d + off];
                    if (pq->requires_grad) {
                        double* gq = &pq->grad[static_cast<size_t>(i) * d + off];
                        for (int t = 0; t < dh; ++t) gq[t] += ds * kr[t];
                    }
                    if (pk->requires_grad) {
                        double* gk = &pk->grad[static_cast<size_t>(j) * d + off];
                        for (int t = 0; t < dh; ++t) gk[t] += ds * qr[t];
                    }
                }
            }
        }
    }, "attention_core");

    auto& c = out.node()->value;
    for (int h = 0; h < heads; ++h) {
        const int off = h * dh;
        for (int i = 0; i < n_q; ++i) {
            const double* arow = &(*attn)[(static_cast<size_t>(h) * n_q + i) * n_k];
            double* orow = &c[static_cast<size_t>(i) * d + off];
            for (int j = 0; j < n_k; ++j) {
                if (arow[j] == 0.0) continue;
                const double* vr = &pv->value[static_cast<size_t>(j) * d + off];
                for (int t = 0; t < dh; ++t) orow[t] += arow[j] * vr[t];
            }
        }
    }
    check_finite(*out.node(), "attention_core");

    if (weights_out) {
        weights_out->heads = heads;
        weights_out->n_q = n_q;
        weights_out->n_k = n_k;
        weights_out->w = *attn;
    }
    return out;
}

MhaParams MhaParams::init(int dim, int heads, Rng& rng) {
    MhaParams p;
    p.heads = heads;
    double bound = 1.0 / std::sqrt(static_cast<double>(dim));
    auto mk = [&](int r, int c) { return random_uniform(r, c, -bound, bound, rng, true); };
    p.wq = mk(dim, dim); p.bq = mk(1, dim);
    p.wk = mk(dim, dim); p.bk = mk(1, dim);
    p.wv = mk(dim, dim); p.bv = mk(1, dim);
    p.wo = mk(dim, dim); p.bo = mk(1, dim);
    return p;
}

void MhaParams::collect(std::vector<std::pair<std::string, Tensor>>& out,
                        const std::string& prefix) const {
    out.emplace_back(prefix + ".wq", wq);
    out.emplace_back(prefix + ".bq", bq);
    out.emplace_back(prefix + ".wk", wk);
    out.emplace_back(prefix + ".bk", bk);
    out.emplace_back(prefix + ".wv", wv);
    out.emplace_back(prefix + ".bv", bv);
    out.emplace_back(prefix + ".wo", wo);
    out.emplace_back(prefix + ".bo", bo);
}

Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                            const MhaParams& params, AttentionWeights* weights_out,
                            const std::vector<uint8_t>* key_mask) {
    Tensor qp = add_row_broadcast(matmul(q, params.wq), params.bq);
    Tensor kp = add_row_broadcast(matmul(k, params.wk), params.bk);
    Tensor vp = add_row_broadcast(matmul(v, params.wv), params.bv);
    Tensor o = attention_core(qp, kp, vp, params.heads, false, key_mask, weights_out);
    return add_row_broadcast(matmul(o, params.wo), params.bo);
}

Tensor weighted_cross_entropy(const Tensor& scores, const std::vector<int>& labels,
                              const Tensor& class_weights) {
    const int b = scores.rows(), c = scores.cols();
    if (static_cast<int>(labels.size()) != b) {
        fail(ErrorKind::dimension, "labels length must equal batch size");
    }
    if (class_weights.size() != static_cast<size_t>(c)) {
        fail(ErrorKind::dimension, "class_weights length must equal class count");
    }
    std::vector<double> w(class_weights.data().begin(), class_weights.data().end());
    for (double wi : w) {
        if (!(wi > 0.0)) fail(ErrorKind::config, "class weights must be positive");
    }
    for (int lbl : labels) {
        if (lbl < 0 || lbl >= c) fail(ErrorKind::index, "label " + std::to_string(lbl) + " out of range");
    }

    auto ps = scores.node();
    auto probs = std::make_shared<std::vector<double>>(static_cast<size_t>(b) * c);
    double weight_sum = 0.0;
    double loss = 0.0;
    for (int i = 0; i < b; ++i) {
        const double* row = &ps->value[static_cast<size_t>(i) * c];
        double maxv = row[0];
        for (int j = 1; j < c; ++j) maxv = std::max(maxv, row[j]);
        double z = 0.0;
        for (int j = 0; j < c; ++j) {
            double e = std::exp(row[j] - maxv);
            (*probs)[static_cast<size_t>(i) * c + j] = e;
            z += e;
        }
        for (int j = 0; j < c; ++j) (*probs)[static_cast<size_t>(i) * c + j] /= z;
        double wy = w[labels[i]];
        weight_sum += wy;
        loss += wy * -std::log(std::max((*probs)[static_cast<size_t>(i) * c + labels[i]], 1e-300));
    }
    loss /= weight_sum;

    auto labels_copy = labels;
    Tensor out = make_op(1, 1, {ps}, [ps, probs, labels_copy, w, weight_sum, b, c](detail::Node& self) {
        if (!ps->requires_grad) return;
        ps->ensure_grad();
        double g = self.grad[0] / weight_sum;
        for (int i = 0; i < b; ++i) {
            double wy = w[labels_copy[i]];
            for (int j = 0; j < c; ++j) {
                double p = (*probs)[static_cast<size_t>(i) * c + j];
                double target = (j == labels_copy[i]) ? 1.0 : 0.0;
                ps->grad[static_cast<size_t>(i) * c + j] += g * wy * (p - target);
            }
        }
    }, "weighted_cross_entropy");
    out.node()->value[0] = loss;
    check_finite(*out.node(), "weighted_cross_entropy");
    return out;
}

void backward(const Tensor& loss) {
    if (loss.size() != 1) fail(ErrorKind::dimension, "backward requires a scalar loss");
    auto root = loss.node();
    if (root->backward_done) {
        fail(ErrorKind::state, "backward called twice on the same graph");
    }
    root->backward_done = true;
    if (!root->requires_grad) return; // nothing trainable upstream

    // Reverse topological order via iterative post-order DFS.
    std::vector<detail::Node*> order;
    std::unordered_set<detail::Node*> visited;
    std::vector<std::pair<detail::Node*, size_t>> stack;
    stack.emplace_back(root.get(), 0);
    visited.insert(root.get());
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx < node->parents.size()) {
            detail::Node* parent = node->parents[idx].get();
            ++idx;
            if (parent->backward_fn && !visited.count(parent)) {
                visited.insert(parent);
                stack.emplace_back(parent, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    root->ensure_grad();
    root->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::Node* n = *it;
        if (n->backward_fn) {
            n->ensure_grad();
            n->backward_fn(*n);
        }
    }
}

Linear Linear::init(int in_dim, int out_dim, Rng& rng) {
    Linear l;
    double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
    l.w = random_uniform(in_dim, out_dim, -bound, bound, rng, true);
    l.b = random_uniform(1, out_dim, -bound, bound, rng, true);
    return l;
}

void Linear::collect(std::vector<std::pair<std::string, Tensor>>& out,
                     const std::string& prefix) const {
    out.emplace_back(prefix + ".w", w);
    out.emplace_back(prefix + ".b", b);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) fail(ErrorKind::dimension, "cosine of unequal lengths");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

Tensor random_uniform(int rows, int cols, double lo, double hi, Rng& rng, bool requires_grad) {
    Tensor t = Tensor::zeros(rows, cols, requires_grad);
    auto d = t.mutable_data();
    for (auto& v : d) v = rng.uniform(lo, hi);
    return t;
}

Tensor random_normal(int rows, int cols, double mean, double stddev, Rng& rng, bool requires_grad) {
    Tensor t = Tensor::zeros(rows, cols, requires_grad);
    auto d = t.mutable_data();
    for (auto& v : d) v = rng.normal(mean, stddev);
    return t;
}

} // namespace insight
