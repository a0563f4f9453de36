#pragma once

#include <span>
#include <string>
#include <vector>

#include "insight/graph.hpp"
#include "insight/rng.hpp"

namespace insight {

struct Node2VecConfig {
    double p = 1.0;            // return parameter
    double q = 1.0;            // in-out parameter
    int walk_length = 40;
    int walks_per_node = 10;
    int window = 5;
    int dim = 32;
    int negative_samples = 5;
    int epochs = 2;
    double lr = 0.025;

    void validate() const;
};

// Second-order transition distribution out of `cur` given the previous node:
// unnormalized mass = edge_weight(cur, x) * bias with bias 1/p when x == prev,
// 1 when x is adjacent to prev, 1/q otherwise. prev = -1 (walk start) falls
// back to plain edge-weight proportions. Probabilities align with
// graph.neighbors(cur).
std::vector<double> node2vec_transition(const InteractionGraph& g, int prev, int cur,
                                        const Node2VecConfig& cfg);

struct NodeEmbeddings {
    int dim = 0;
    std::vector<std::string> ids;
    std::vector<double> vectors; // ids.size() x dim

    std::span<const double> vector_of(const std::string& id) const;
    bool contains(const std::string& id) const;
};

// Skip-gram with negative sampling over biased random walks; negatives drawn
// from the walk-frequency unigram distribution raised to 3/4. Deterministic
// for a fixed rng stream.
NodeEmbeddings node2vec_train(const InteractionGraph& g, const Node2VecConfig& cfg, Rng rng);

} // namespace insight
