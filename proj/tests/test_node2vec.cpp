#include "doctest.h"

#include <cmath>
#include <queue>
#include <vector>

#include "insight/node2vec.hpp"
#include "insight/tensor.hpp"

using namespace insight;

namespace {

// BFS shortest-path distance; the oracle route for the bias rule.
int bfs_distance(const InteractionGraph& g, int from, int to) {
    if (from == to) return 0;
    std::vector<int> dist(g.node_count(), -1);
    std::queue<int> q;
    q.push(from);
    dist[from] = 0;
    while (!q.empty()) {
        int cur = q.front();
        q.pop();
        for (auto [nxt, w] : g.neighbors(cur)) {
            if (dist[nxt] < 0) {
                dist[nxt] = dist[cur] + 1;
                if (nxt == to) return dist[nxt];
                q.push(nxt);
            }
        }
    }
    return -1;
}

// Oracle: enumerate neighbor biases via shortest-path distances from prev.
std::vector<double> transition_oracle(const InteractionGraph& g, int prev, int cur,
                                      double p, double q) {
    const auto& nbrs = g.neighbors(cur);
    std::vector<double> mass(nbrs.size());
    double total = 0.0;
    for (size_t i = 0; i < nbrs.size(); ++i) {
        int dist = bfs_distance(g, prev, nbrs[i].first);
        double bias = dist == 0 ? 1.0 / p : (dist == 1 ? 1.0 : 1.0 / q);
        mass[i] = nbrs[i].second * bias;
        total += mass[i];
    }
    for (auto& m : mass) m /= total;
    return mass;
}

InteractionGraph graph_from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
    InteractionGraph g;
    for (int i = 0; i < n; ++i) g.add_node("n" + std::to_string(i));
    for (auto [a, b] : edges) g.add_edge(a, b, 1.0);
    return g;
}

bool connected(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> adj(n);
    for (auto [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<bool> seen(n, false);
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    int count = 1;
    while (!q.empty()) {
        int cur = q.front();
        q.pop();
        for (int nx : adj[cur]) {
            if (!seen[nx]) {
                seen[nx] = true;
                ++count;
                q.push(nx);
            }
        }
    }
    return count == n;
}

} // namespace

TEST_CASE("p=q=1 on an unweighted graph degenerates to uniform") {
    auto g = graph_from_edges(4, {{0, 1}, {1, 2}, {1, 3}});
    Node2VecConfig cfg;
    auto probs = node2vec_transition(g, 0, 1, cfg);
    REQUIRE(probs.size() == 3);
    for (double v : probs) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("triangle bias hand case: prev=a cur=b with p=0.5 q=2") {
    auto g = graph_from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
    Node2VecConfig cfg;
    cfg.p = 0.5;
    cfg.q = 2.0;
    auto probs = node2vec_transition(g, 0, 1, cfg);
    // neighbors of b sorted by index: {a, c}; a at distance 0 -> 1/p = 2;
    // c adjacent to a -> 1. Normalized {2/3, 1/3}.
    REQUIRE(probs.size() == 2);
    CHECK(probs[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(probs[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("transition matches the shortest-path oracle on all connected graphs up to 6 nodes") {
    const std::vector<double> pq = {0.5, 1.0, 2.0};
    for (int n = 2; n <= 6; ++n) {
        std::vector<std::pair<int, int>> all_edges;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) all_edges.push_back({a, b});
        const int m = static_cast<int>(all_edges.size());
        for (uint32_t mask = 0; mask < (1u << m); ++mask) {
            std::vector<std::pair<int, int>> edges;
            for (int e = 0; e < m; ++e) {
                if (mask & (1u << e)) edges.push_back(all_edges[e]);
            }
            if (edges.size() + 1 < static_cast<size_t>(n)) continue;
            if (!connected(n, edges)) continue;
            auto g = graph_from_edges(n, edges);
            for (double p : pq) {
                for (double q : pq) {
                    Node2VecConfig cfg;
                    cfg.p = p;
                    cfg.q = q;
                    for (auto [a, b] : edges) {
                        for (auto [prev, cur] : {std::pair{a, b}, std::pair{b, a}}) {
                            auto got = node2vec_transition(g, prev, cur, cfg);
                            auto want = transition_oracle(g, prev, cur, p, q);
                            REQUIRE(got.size() == want.size());
                            double s = 0.0;
                            for (size_t i = 0; i < got.size(); ++i) {
                                REQUIRE(got[i] == want[i]); // exact
                                s += got[i];
                            }
                            REQUIRE(std::fabs(s - 1.0) <= 1e-12);
                        }
                    }
                }
            }
        }
    }
}

TEST_CASE("empirical walk frequencies match the transition distribution") {
    auto g = graph_from_edges(5, {{0, 1}, {1, 2}, {1, 3}, {1, 4}, {2, 3}});
    Node2VecConfig cfg;
    cfg.p = 0.5;
    cfg.q = 2.0;
    auto probs = node2vec_transition(g, 0, 1, cfg);
    const auto& nbrs = g.neighbors(1);
    std::vector<double> counts(nbrs.size(), 0.0);
    Rng rng(99);
    const int steps = 100000;
    for (int s = 0; s < steps; ++s) {
        double u = rng.uniform();
        double acc = 0.0;
        for (size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc || i + 1 == probs.size()) {
                counts[i] += 1.0;
                break;
            }
        }
    }
    for (size_t i = 0; i < probs.size(); ++i) {
        CHECK(std::fabs(counts[i] / steps - probs[i]) < 0.01);
    }
}

TEST_CASE("isolated node raises, walk from it terminates early in training") {
    InteractionGraph g;
    g.add_node("a");
    g.add_node("b");
    g.add_node("lonely");
    g.add_edge(0, 1, 1.0);
    Node2VecConfig cfg;
    CHECK_THROWS_AS(node2vec_transition(g, -1, 2, cfg), Error);
    cfg.dim = 8;
    cfg.walk_length = 5;
    cfg.walks_per_node = 2;
    cfg.epochs = 1;
    auto emb = node2vec_train(g, cfg, Rng(5));
    CHECK(emb.contains("lonely"));
}

TEST_CASE("two disconnected cliques separate structurally") {
    InteractionGraph g;
    for (int i = 0; i < 12; ++i) g.add_node("n" + std::to_string(i));
    for (int a = 0; a < 6; ++a)
        for (int b = a + 1; b < 6; ++b) g.add_edge(a, b, 1.0);
    for (int a = 6; a < 12; ++a)
        for (int b = a + 1; b < 12; ++b) g.add_edge(a, b, 1.0);

    Node2VecConfig cfg;
    cfg.dim = 16;
    cfg.walk_length = 20;
    cfg.walks_per_node = 8;
    cfg.window = 4;
    cfg.epochs = 3;
    auto emb = node2vec_train(g, cfg, Rng(11));

    auto vec = [&](int i) { return emb.vector_of("n" + std::to_string(i)); };
    double intra = 0.0, inter = 0.0;
    int n_intra = 0, n_inter = 0;
    for (int a = 0; a < 12; ++a) {
        for (int b = a + 1; b < 12; ++b) {
            double c = cosine_similarity(vec(a), vec(b));
            bool same = (a < 6) == (b < 6);
            if (same) {
                intra += c;
                ++n_intra;
            } else {
                inter += c;
                ++n_inter;
            }
        }
    }
    CHECK(intra / n_intra > inter / n_inter);
}

TEST_CASE("node2vec training is reproducible for a fixed seed") {
    auto g = graph_from_edges(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}});
    Node2VecConfig cfg;
    cfg.dim = 8;
    cfg.walk_length = 10;
    cfg.walks_per_node = 4;
    cfg.epochs = 2;
    auto a = node2vec_train(g, cfg, Rng(77));
    auto b = node2vec_train(g, cfg, Rng(77));
    CHECK(a.vectors == b.vectors);
    CHECK(a.ids == b.ids);
}

TEST_CASE("window=1 on a 2-node path: positive pairs are the edge endpoints") {
    auto g = graph_from_edges(2, {{0, 1}});
    Node2VecConfig cfg;
    cfg.dim = 4;
    cfg.window = 1;
    cfg.walk_length = 3;
    cfg.walks_per_node = 1;
    cfg.epochs = 1;
    // Walks on a 2-node path alternate endpoints, so every (center, context)
    // pair within window 1 is the edge pair itself.
    auto emb = node2vec_train(g, cfg, Rng(3));
    CHECK(emb.contains("n0"));
    CHECK(emb.contains("n1"));
    double c = cosine_similarity(emb.vector_of("n0"), emb.vector_of("n1"));
    CHECK(std::isfinite(c));
}

TEST_CASE("node2vec config validation") {
    Node2VecConfig cfg;
    cfg.p = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.walk_length = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}
