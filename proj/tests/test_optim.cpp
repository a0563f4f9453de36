#include "doctest.h"

#include <cmath>
#include <vector>

#include "insight/grad_check.hpp"
#include "insight/optim.hpp"
#include "insight/rng.hpp"
#include "insight/tensor.hpp"

using namespace insight;

namespace {

// Drives a chosen gradient into a parameter: loss = sum(p * c) has dL/dp = c.
void set_grad(Tensor& p, const std::vector<double>& g) {
    Tensor c = Tensor::from_data(p.rows(), p.cols(), g);
    p.zero_grad();
    backward(sum(mul(p, c)));
}

} // namespace

TEST_CASE("adamw zero gradient leaves parameters unchanged when wd=0") {
    Tensor p = Tensor::from_data(1, 3, {1.0, -2.0, 0.5}, true);
    AdamW opt({p}, {.lr = 0.1, .weight_decay = 0.0});
    set_grad(p, {0, 0, 0});
    opt.step();
    CHECK(p.at(0, 0) == 1.0);
    CHECK(p.at(0, 1) == -2.0);
    CHECK(p.at(0, 2) == 0.5);
}

TEST_CASE("adamw zero gradient with decay scales parameters") {
    Tensor p = Tensor::from_data(1, 2, {1.0, -4.0}, true);
    AdamW opt({p}, {.lr = 0.1, .weight_decay = 0.01});
    set_grad(p, {0, 0});
    opt.step();
    CHECK(p.at(0, 0) == doctest::Approx(1.0 * (1.0 - 0.001)).epsilon(1e-15));
    CHECK(p.at(0, 1) == doctest::Approx(-4.0 * (1.0 - 0.001)).epsilon(1e-15));
}

TEST_CASE("adamw first step matches hand-computed bias-corrected update") {
    double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8, wd = 0.0;
    Tensor p = Tensor::from_data(1, 1, {2.0}, true);
    AdamW opt({p}, {.lr = lr, .weight_decay = wd, .beta1 = b1, .beta2 = b2, .eps = eps});
    set_grad(p, {1.0});
    opt.step();
    // m=0.1, v=0.001, mhat=1, vhat=1 -> theta = 2 - lr * 1/(1+eps)
    double expected = 2.0 - lr * 1.0 / (1.0 + eps);
    CHECK(p.at(0, 0) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("adamw with wd=0 equals plain adam over several steps") {
    Rng rng(31);
    Tensor p = Tensor::from_data(1, 4, {0.3, -0.7, 1.1, 0.0}, true);
    std::vector<double> ref(p.data().begin(), p.data().end());
    double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    std::vector<double> m(4, 0.0), v(4, 0.0);
    AdamW opt({p}, {.lr = lr, .weight_decay = 0.0, .beta1 = b1, .beta2 = b2, .eps = eps});
    for (int step = 1; step <= 7; ++step) {
        std::vector<double> g(4);
        for (auto& x : g) x = rng.uniform(-1, 1);
        set_grad(p, g);
        opt.step();
        for (int i = 0; i < 4; ++i) {
            m[i] = b1 * m[i] + (1 - b1) * g[i];
            v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
            double mh = m[i] / (1 - std::pow(b1, step));
            double vh = v[i] / (1 - std::pow(b2, step));
            ref[i] -= lr * mh / (std::sqrt(vh) + eps);
            CHECK(p.at(0, i) == doctest::Approx(ref[i]).epsilon(1e-14));
        }
    }
}

TEST_CASE("adamw without populated gradients raises state error") {
    Tensor p = Tensor::from_data(1, 2, {1.0, 2.0}, true);
    AdamW opt({p}, {});
    CHECK_THROWS_AS(opt.step(), Error);
}

TEST_CASE("lr step decay schedule") {
    CHECK(lr_step_decay(0, 5e-5, 2, 0.5) == 5e-5);
    CHECK(lr_step_decay(2, 5e-5, 2, 0.5) == doctest::Approx(2.5e-5).epsilon(1e-15));
    CHECK(lr_step_decay(5, 5e-5, 2, 0.5) == doctest::Approx(1.25e-5).epsilon(1e-15));
    CHECK_THROWS_AS(lr_step_decay(1, 1.0, 0, 0.5), Error);
    CHECK_THROWS_AS(lr_step_decay(1, 1.0, 2, 0.0), Error);
}

TEST_CASE("finite_diff_check on quadratic and linear functions") {
    Tensor x = Tensor::from_data(1, 1, {3.0}, true);
    auto f_quad = [&]() { return sum(mul(x, x)); };
    auto report = finite_diff_check(f_quad, {{"x", x}}, 1e-5);
    CHECK(report.max_rel_error < 1e-6);

    Tensor y = Tensor::from_data(1, 3, {1.0, -2.0, 0.5}, true);
    Tensor c = Tensor::from_data(1, 3, {2.0, 3.0, -1.0});
    auto f_lin = [&]() { return sum(mul(y, c)); };
    auto lin_report = finite_diff_check(f_lin, {{"y", y}}, 1e-5);
    CHECK(lin_report.max_rel_error < 1e-9);
}

TEST_CASE("rng forks are label-separated and reproducible") {
    Rng a(42);
    Rng b(42);
    CHECK(a.fork("text").next_u64() == b.fork("text").next_u64());
    CHECK(a.fork("text").next_u64() != a.fork("sent").next_u64());
    // Forking is independent of draw position.
    Rng c(42);
    c.next_u64();
    CHECK(c.fork("text").next_u64() == b.fork("text").next_u64());
}
