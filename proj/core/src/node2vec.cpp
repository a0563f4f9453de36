#include "insight/node2vec.hpp"

#include <algorithm>
#include <cmath>

namespace insight {

void Node2VecConfig::validate() const {
    if (!(p > 0.0) || !(q > 0.0)) fail(ErrorKind::config, "node2vec p and q must be > 0");
    if (walk_length < 1 || walks_per_node < 1 || window < 1 || dim < 1 ||
        negative_samples < 1 || epochs < 1 || !(lr > 0.0)) {
        fail(ErrorKind::config, "node2vec integer/lr parameters must be positive");
    }
}

std::vector<double> node2vec_transition(const InteractionGraph& g, int prev, int cur,
                                        const Node2VecConfig& cfg) {
    cfg.validate();
    const auto& nbrs = g.neighbors(cur);
    if (nbrs.empty()) fail(ErrorKind::input, "transition from isolated node");
    std::vector<double> probs(nbrs.size());
    double total = 0.0;
    for (size_t i = 0; i < nbrs.size(); ++i) {
        auto [x, w] = nbrs[i];
        double bias;
        if (prev < 0) {
            bias = 1.0;
        } else if (x == prev) {
            bias = 1.0 / cfg.p;
        } else if (g.has_edge(prev, x)) {
            bias = 1.0;
        } else {
            bias = 1.0 / cfg.q;
        }
        probs[i] = w * bias;
        total += probs[i];
    }
    for (auto& v : probs) v /= total;
    return probs;
}

namespace {

int sample_index(const std::vector<double>& cumulative, double u) {
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) return static_cast<int>(cumulative.size()) - 1;
    return static_cast<int>(it - cumulative.begin());
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

std::span<const double> NodeEmbeddings::vector_of(const std::string& id) const {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) fail(ErrorKind::index, "unknown node id: " + id);
    size_t row = static_cast<size_t>(it - ids.begin());
    return std::span<const double>(vectors).subspan(row * dim, dim);
}

bool NodeEmbeddings::contains(const std::string& id) const {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    return it != ids.end() && *it == id;
}

NodeEmbeddings node2vec_train(const InteractionGraph& g, const Node2VecConfig& cfg, Rng rng) {
    cfg.validate();
    const int n = g.node_count();
    if (n == 0) fail(ErrorKind::input, "node2vec on empty graph");

    // Walk generation; isolated nodes terminate immediately.
    std::vector<std::vector<int>> walks;
    walks.reserve(static_cast<size_t>(n) * cfg.walks_per_node);
    for (int round = 0; round < cfg.walks_per_node; ++round) {
        for (int start = 0; start < n; ++start) {
            std::vector<int> walk;
            walk.push_back(start);
            int prev = -1, cur = start;
            for (int step = 1; step < cfg.walk_length; ++step) {
                const auto& nbrs = g.neighbors(cur);
                if (nbrs.empty()) break;
                auto probs = node2vec_transition(g, prev, cur, cfg);
                std::vector<double> cum(probs.size());
                double acc = 0.0;
                for (size_t i = 0; i < probs.size(); ++i) {
                    acc += probs[i];
                    cum[i] = acc;
                }
                int pick = sample_index(cum, rng.uniform());
                prev = cur;
                cur = nbrs[pick].first;
                walk.push_back(cur);
            }
            walks.push_back(std::move(walk));
        }
    }

    // Unigram^(3/4) negative table over walk occurrences.
    std::vector<double> freq(n, 0.0);
    for (const auto& w : walks) {
        for (int v : w) freq[v] += 1.0;
    }
    std::vector<double> neg_cum(n);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += std::pow(freq[i], 0.75);
        neg_cum[i] = acc;
    }
    if (acc <= 0.0) fail(ErrorKind::input, "no walk mass for negative sampling");
    for (auto& v : neg_cum) v /= acc;

    std::vector<double> in(static_cast<size_t>(n) * cfg.dim);
    std::vector<double> out(static_cast<size_t>(n) * cfg.dim, 0.0);
    for (auto& v : in) v = rng.uniform(-0.5 / cfg.dim, 0.5 / cfg.dim);

    std::vector<double> grad_center(cfg.dim);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (const auto& walk : walks) {
            const int len = static_cast<int>(walk.size());
            for (int i = 0; i < len; ++i) {
                int center = walk[i];
                double* vc = &in[static_cast<size_t>(center) * cfg.dim];
                int lo = std::max(0, i - cfg.window);
                int hi = std::min(len - 1, i + cfg.window);
                for (int j = lo; j <= hi; ++j) {
                    if (j == i) continue;
                    std::fill(grad_center.begin(), grad_center.end(), 0.0);
                    for (int s = 0; s <= cfg.negative_samples; ++s) {
                        int target;
                        double label;
                        if (s == 0) {
                            target = walk[j];
                            label = 1.0;
                        } else {
                            target = sample_index(neg_cum, rng.uniform());
                            if (target == walk[j]) continue;
                            label = 0.0;
                        }
                        double* uo = &out[static_cast<size_t>(target) * cfg.dim];
                        double dot = 0.0;
                        for (int t = 0; t < cfg.dim; ++t) dot += vc[t] * uo[t];
                        double gscale = (label - sigmoid(dot)) * cfg.lr;
                        for (int t = 0; t < cfg.dim; ++t) {
                            grad_center[t] += gscale * uo[t];
                            uo[t] += gscale * vc[t];
                        }
                    }
                    for (int t = 0; t < cfg.dim; ++t) vc[t] += grad_center[t];
                }
            }
        }
    }

    NodeEmbeddings result;
    result.dim = cfg.dim;
    std::vector<std::pair<std::string, int>> order;
    order.reserve(n);
    for (int i = 0; i < n; ++i) order.emplace_back(g.node_id(i), i);
    std::sort(order.begin(), order.end());
    result.ids.reserve(n);
    result.vectors.resize(static_cast<size_t>(n) * cfg.dim);
    for (size_t r = 0; r < order.size(); ++r) {
        result.ids.push_back(order[r].first);
        const double* src = &in[static_cast<size_t>(order[r].second) * cfg.dim];
        std::copy(src, src + cfg.dim, &result.vectors[r * cfg.dim]);
    }
    return result;
}

} // namespace insight
