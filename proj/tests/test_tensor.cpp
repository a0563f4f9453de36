#include "doctest.h"

#include <cmath>
#include <vector>

#include "insight/grad_check.hpp"
#include "insight/rng.hpp"
#include "insight/tensor.hpp"

using namespace insight;

namespace {

// Independent reference: naive triple-loop product.
std::vector<double> matmul_ref(const std::vector<double>& a, const std::vector<double>& b,
                               int m, int k, int n) {
    std::vector<double> c(static_cast<size_t>(m) * n, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int l = 0; l < k; ++l) s += a[i * k + l] * b[l * n + j];
            c[i * n + j] = s;
        }
    return c;
}

// Independent reference: single-head attention with explicit scalar loops.
std::vector<double> scalar_attention_ref(const Tensor& q, const Tensor& k, const Tensor& v,
                                         const MhaParams& p) {
    int n_q = q.rows(), n_k = k.rows(), d = q.cols();
    auto project = [&](const Tensor& x, const Tensor& w, const Tensor& b) {
        std::vector<double> out(static_cast<size_t>(x.rows()) * d, 0.0);
        for (int i = 0; i < x.rows(); ++i)
            for (int j = 0; j < d; ++j) {
                double s = b.at(0, j);
                for (int l = 0; l < d; ++l) s += x.at(i, l) * w.at(l, j);
                out[i * d + j] = s;
            }
        return out;
    };
    auto qp = project(q, p.wq, p.bq);
    auto kp = project(k, p.wk, p.bk);
    auto vp = project(v, p.wv, p.bv);
    std::vector<double> ctx(static_cast<size_t>(n_q) * d, 0.0);
    for (int i = 0; i < n_q; ++i) {
        std::vector<double> sc(n_k);
        double mx = -1e300;
        for (int j = 0; j < n_k; ++j) {
            double s = 0.0;
            for (int t = 0; t < d; ++t) s += qp[i * d + t] * kp[j * d + t];
            sc[j] = s / std::sqrt(static_cast<double>(d));
            mx = std::max(mx, sc[j]);
        }
        double z = 0.0;
        for (double& s : sc) { s = std::exp(s - mx); z += s; }
        for (double& s : sc) s /= z;
        for (int j = 0; j < n_k; ++j)
            for (int t = 0; t < d; ++t) ctx[i * d + t] += sc[j] * vp[j * d + t];
    }
    std::vector<double> out(static_cast<size_t>(n_q) * d, 0.0);
    for (int i = 0; i < n_q; ++i)
        for (int j = 0; j < d; ++j) {
            double s = p.bo.at(0, j);
            for (int l = 0; l < d; ++l) s += ctx[i * d + l] * p.wo.at(l, j);
            out[i * d + j] = s;
        }
    return out;
}

} // namespace

TEST_CASE("matmul identity and projector") {
    Tensor eye = Tensor::from_data(2, 2, {1, 0, 0, 1});
    Tensor a = Tensor::from_data(2, 2, {1, 2, 3, 4});
    Tensor r = matmul(eye, a);
    for (size_t i = 0; i < 4; ++i) CHECK(r.data()[i] == a.data()[i]);

    Tensor proj = Tensor::from_data(2, 2, {1, 0, 0, 0});
    Tensor b = Tensor::from_data(2, 2, {5, 6, 7, 8});
    Tensor pr = matmul(proj, b);
    CHECK(pr.at(0, 0) == 5);
    CHECK(pr.at(0, 1) == 6);
    CHECK(pr.at(1, 0) == 0);
    CHECK(pr.at(1, 1) == 0);
}

TEST_CASE("matmul matches triple-loop reference") {
    Rng rng(7);
    Tensor a = random_uniform(3, 4, -2, 2, rng, false);
    Tensor b = random_uniform(4, 2, -2, 2, rng, false);
    Tensor c = matmul(a, b);
    auto ref = matmul_ref({a.data().begin(), a.data().end()},
                          {b.data().begin(), b.data().end()}, 3, 4, 2);
    for (size_t i = 0; i < ref.size(); ++i) CHECK(std::fabs(c.data()[i] - ref[i]) < 1e-12);
}

TEST_CASE("matmul shape mismatch raises dimension error") {
    Tensor a = Tensor::zeros(2, 3);
    Tensor b = Tensor::zeros(2, 3);
    CHECK_THROWS_AS(matmul(a, b), Error);
}

TEST_CASE("layer_norm constant row maps to zeros") {
    Tensor x = Tensor::from_data(1, 3, {4.2, 4.2, 4.2});
    Tensor g = Tensor::full(1, 3, 1.0);
    Tensor b = Tensor::zeros(1, 3);
    Tensor y = layer_norm(x, g, b, 1e-5);
    for (double v : y.data()) CHECK(std::fabs(v) < 1e-9);
}

TEST_CASE("layer_norm shift invariance") {
    Rng rng(11);
    Tensor x = random_uniform(2, 5, -1, 1, rng, false);
    std::vector<double> shifted(x.data().begin(), x.data().end());
    for (auto& v : shifted) v += 3.7;
    Tensor xs = Tensor::from_data(2, 5, shifted);
    Tensor g = Tensor::full(1, 5, 1.0);
    Tensor b = Tensor::zeros(1, 5);
    Tensor y0 = layer_norm(x, g, b, 1e-8);
    Tensor y1 = layer_norm(xs, g, b, 1e-8);
    for (size_t i = 0; i < y0.size(); ++i)
        CHECK(y0.data()[i] == doctest::Approx(y1.data()[i]).epsilon(1e-9));
}

TEST_CASE("layer_norm hand value for [1,2,3]") {
    Tensor x = Tensor::from_data(1, 3, {1, 2, 3});
    Tensor g = Tensor::full(1, 3, 1.0);
    Tensor b = Tensor::zeros(1, 3);
    Tensor y = layer_norm(x, g, b, 0.0);
    CHECK(y.at(0, 0) == doctest::Approx(-1.2247).epsilon(1e-3));
    CHECK(std::fabs(y.at(0, 1)) < 1e-3);
    CHECK(y.at(0, 2) == doctest::Approx(1.2247).epsilon(1e-3));
}

TEST_CASE("layer_norm row statistics property") {
    Rng rng(23);
    for (int trial = 0; trial < 25; ++trial) {
        int n = 1 + static_cast<int>(rng.next_below(6));
        int d = 2 + static_cast<int>(rng.next_below(7));
        Tensor x = random_uniform(n, d, -3, 3, rng, false);
        Tensor g = Tensor::full(1, d, 1.0);
        Tensor b = Tensor::zeros(1, d);
        Tensor y = layer_norm(x, g, b, 1e-12);
        for (int i = 0; i < n; ++i) {
            double mean = 0.0;
            for (int j = 0; j < d; ++j) mean += y.at(i, j);
            mean /= d;
            CHECK(std::fabs(mean) < 1e-9);
            double var = 0.0;
            for (int j = 0; j < d; ++j) var += (y.at(i, j) - mean) * (y.at(i, j) - mean);
            var /= d;
            CHECK(std::fabs(var - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("attention with identical keys is uniform and averages values") {
    Rng rng(3);
    int d = 4;
    MhaParams p = MhaParams::init(d, 2, rng);
    Tensor q = random_uniform(3, d, -1, 1, rng, false);
    std::vector<double> krow = {0.3, -0.2, 0.9, 0.1};
    std::vector<double> kd;
    for (int i = 0; i < 5; ++i) kd.insert(kd.end(), krow.begin(), krow.end());
    Tensor k = Tensor::from_data(5, d, kd);
    Tensor v = random_uniform(5, d, -1, 1, rng, false);

    AttentionWeights w;
    Tensor out = multi_head_attention(q, k, v, p, &w);
    for (int h = 0; h < w.heads; ++h)
        for (int i = 0; i < w.n_q; ++i)
            for (int j = 0; j < w.n_k; ++j)
                CHECK(w.at(h, i, j) == doctest::Approx(0.2).epsilon(1e-12));

    // Expected: mean of projected values through the output projection.
    Tensor vmean = mean_rows(v);
    Tensor vproj = add_row_broadcast(matmul(vmean, p.wv), p.bv);
    Tensor expect = add_row_broadcast(matmul(vproj, p.wo), p.bo);
    for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < d; ++j)
            CHECK(out.at(i, j) == doctest::Approx(expect.at(0, j)).epsilon(1e-9));
}

TEST_CASE("attention rows sum to one") {
    Rng rng(5);
    int d = 8;
    MhaParams p = MhaParams::init(d, 4, rng);
    Tensor q = random_uniform(5, d, -2, 2, rng, false);
    Tensor k = random_uniform(7, d, -2, 2, rng, false);
    Tensor v = random_uniform(7, d, -2, 2, rng, false);
    AttentionWeights w;
    multi_head_attention(q, k, v, p, &w);
    for (int h = 0; h < w.heads; ++h)
        for (int i = 0; i < w.n_q; ++i) {
            double s = 0.0;
            for (int j = 0; j < w.n_k; ++j) {
                CHECK(w.at(h, i, j) >= 0.0);
                s += w.at(h, i, j);
            }
            CHECK(std::fabs(s - 1.0) < 1e-9);
        }
}

TEST_CASE("single-head attention matches scalar reference") {
    Rng rng(17);
    int d = 4;
    MhaParams p = MhaParams::init(d, 1, rng);
    Tensor q = Tensor::from_data(2, d, {1, 2, -1, 0, 0, 1, 1, -2});
    Tensor k = Tensor::from_data(3, d, {1, 0, 0, 1, 2, -1, 1, 0, 0, 0, 1, 1});
    Tensor v = Tensor::from_data(3, d, {1, 1, 0, 0, 0, 2, 1, 0, -1, 0, 0, 3});
    Tensor out = multi_head_attention(q, k, v, p);
    auto ref = scalar_attention_ref(q, k, v, p);
    for (size_t i = 0; i < ref.size(); ++i) CHECK(std::fabs(out.data()[i] - ref[i]) < 1e-10);
}

TEST_CASE("attention dim/head mismatch raises config error") {
    Rng rng(1);
    MhaParams p = MhaParams::init(6, 2, rng);
    p.heads = 4; // 6 % 4 != 0
    Tensor x = Tensor::zeros(2, 6);
    CHECK_THROWS_AS(multi_head_attention(x, x, x, p), Error);
}

TEST_CASE("causal attention blocks future keys") {
    Rng rng(9);
    int d = 4;
    Tensor x = random_uniform(5, d, -1, 1, rng, true);
    AttentionWeights w;
    attention_core(x, x, x, 2, true, nullptr, &w);
    for (int h = 0; h < w.heads; ++h)
        for (int i = 0; i < w.n_q; ++i)
            for (int j = i + 1; j < w.n_k; ++j)
                CHECK(w.at(h, i, j) == 0.0);
}

TEST_CASE("key mask removes masked keys exactly") {
    Rng rng(13);
    int d = 4;
    Tensor q = random_uniform(2, d, -1, 1, rng, false);
    Tensor k = random_uniform(6, d, -1, 1, rng, false);
    Tensor v = random_uniform(6, d, -1, 1, rng, false);
    std::vector<uint8_t> mask = {1, 0, 1, 1, 0, 1};
    AttentionWeights w;
    attention_core(q, k, v, 1, false, &mask, &w);
    for (int i = 0; i < 2; ++i) {
        CHECK(w.at(0, i, 1) == 0.0);
        CHECK(w.at(0, i, 4) == 0.0);
        double s = 0.0;
        for (int j = 0; j < 6; ++j) s += w.at(0, i, j);
        CHECK(std::fabs(s - 1.0) < 1e-9);
    }
}

TEST_CASE("weighted cross entropy degenerate and hand cases") {
    Tensor scores = Tensor::from_data(2, 2, {1, 0, 0, 1});
    std::vector<int> labels = {0, 1};

    Tensor uniform = Tensor::full(1, 2, 1.0);
    Tensor l_uniform = weighted_cross_entropy(scores, labels, uniform);
    // Unweighted reference: mean of -log softmax at the true class.
    double ce0 = -std::log(std::exp(1.0) / (std::exp(1.0) + 1.0));
    CHECK(l_uniform.scalar() == doctest::Approx(ce0).epsilon(1e-12));

    Tensor w19 = Tensor::from_data(1, 2, {1, 9});
    Tensor l_weighted = weighted_cross_entropy(scores, labels, w19);
    double hand = (1.0 * ce0 + 9.0 * ce0) / 10.0;
    CHECK(l_weighted.scalar() == doctest::Approx(hand).epsilon(1e-9));

    Tensor confident = Tensor::from_data(1, 2, {50.0, 0.0});
    Tensor l_conf = weighted_cross_entropy(confident, {0}, uniform);
    CHECK(l_conf.scalar() < 1e-12);

    CHECK_THROWS_AS(weighted_cross_entropy(scores, {0, 2}, uniform), Error);
}

TEST_CASE("backward of sum is all ones, of dot-square is 2x") {
    Tensor x = Tensor::from_data(2, 3, {1, -2, 3, 0.5, 0, -1}, true);
    Tensor s = sum(x);
    backward(s);
    for (double g : x.grad()) CHECK(g == 1.0);

    Tensor y = Tensor::from_data(1, 4, {1, 2, 3, 4}, true);
    Tensor q = sum(mul(y, y));
    y.zero_grad();
    backward(q);
    for (int j = 0; j < 4; ++j) CHECK(y.grad()[j] == doctest::Approx(2.0 * y.at(0, j)));
}

TEST_CASE("backward twice on the same graph raises state error") {
    Tensor x = Tensor::from_data(1, 2, {1, 2}, true);
    Tensor s = sum(x);
    backward(s);
    CHECK_THROWS_AS(backward(s), Error);
}

TEST_CASE("per-op gradients match central finite differences") {
    Rng rng(101);
    int trials = 100;
    for (int t = 0; t < trials; ++t) {
        int n = 2 + static_cast<int>(rng.next_below(4));
        int d = 2 + static_cast<int>(rng.next_below(4)) * 2; // even, <= 8
        Tensor a = random_uniform(n, d, -1.5, 1.5, rng, true);
        Tensor b = random_uniform(d, d, -1.0, 1.0, rng, true);
        Tensor g = random_uniform(1, d, 0.5, 1.5, rng, true);
        Tensor bias = random_uniform(1, d, -0.5, 0.5, rng, true);
        MhaParams mha = MhaParams::init(d, 2, rng);
        Tensor head = random_uniform(d, 2, -1, 1, rng, false);
        Tensor cw = Tensor::from_data(1, 2, {0.4, 1.6});
        std::vector<int> labels(n);
        for (auto& l : labels) l = static_cast<int>(rng.next_below(2));

        auto f = [&]() {
            Tensor h = matmul(a, b);
            h = layer_norm(h, g, bias, 1e-5);
            h = gelu(h);
            Tensor att = multi_head_attention(h, h, h, mha);
            Tensor merged = add(att, h);
            Tensor pooled = mean_rows(merged);
            Tensor tiled = tile_rows(pooled, n);
            Tensor joined = concat_rows({slice_rows(merged, 0, n), tiled});
            Tensor sc = slice_rows(joined, 0, n);
            Tensor logits = matmul(sc, head);
            return weighted_cross_entropy(logits, labels, cw);
        };
        std::vector<std::pair<std::string, Tensor>> params = {
            {"a", a}, {"b", b}, {"g", g}, {"bias", bias},
            {"wq", mha.wq}, {"bq", mha.bq}, {"wk", mha.wk}, {"bk", mha.bk},
            {"wv", mha.wv}, {"bv", mha.bv}, {"wo", mha.wo}, {"bo", mha.bo},
        };
        auto report = finite_diff_check(f, params, 1e-5);
        INFO("trial ", t, " worst ", report.worst_param, "[", report.worst_index,
             "] analytic=", report.analytic, " numeric=", report.numeric);
        CHECK(report.max_rel_error <= 1e-4);
    }
}

TEST_CASE("dropout eval is identity, train rescales kept entries") {
    Rng rng(55);
    Tensor x = Tensor::from_data(1, 8, {1, 1, 1, 1, 1, 1, 1, 1}, true);
    Tensor y_eval = dropout(x, 0.5, rng, false);
    CHECK(y_eval.id() == x.id());
    Tensor y_train = dropout(x, 0.5, rng, true);
    for (double v : y_train.data()) CHECK((v == 0.0 || v == doctest::Approx(2.0)));
}

TEST_CASE("finite checks flag non-finite op results") {
    Tensor big = Tensor::full(1, 1, 1e308);
    CHECK_THROWS_AS(mul(big, big), Error);
    CHECK_THROWS(Tensor::from_data(1, 1, {std::nan("")}));
}

TEST_CASE("forward passes are bitwise deterministic for a fixed seed") {
    auto run = [] {
        Rng rng(2024);
        Tensor x = random_normal(4, 8, 0.0, 1.0, rng, false);
        MhaParams p = MhaParams::init(8, 2, rng);
        Tensor g = Tensor::full(1, 8, 1.0);
        Tensor b = Tensor::zeros(1, 8);
        Tensor y = multi_head_attention(layer_norm(x, g, b, 1e-5), x, x, p);
        return std::vector<double>(y.data().begin(), y.data().end());
    };
    auto r1 = run();
    auto r2 = run();
    CHECK(r1 == r2);
}
