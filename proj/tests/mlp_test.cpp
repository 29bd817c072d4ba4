#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "ergolab/errors.hpp"
#include "ergolab/mlp.hpp"
#include "ergolab/rng.hpp"
#include "oracles.hpp"

using namespace ergolab;

namespace {

// Independent finite-difference gradient of the Smooth-L1 head, used to
// cross-check mlp_backward without going through grad_check.
double head_loss(const Mlp& net, const std::vector<double>& input,
                 const std::vector<double>& targets) {
    auto out = mlp_forward(net, input);
    double loss = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i)
        loss += smooth_l1(out[i], targets[i]).loss;
    return loss;
}

}  // namespace

TEST_SUITE("mlp") {

TEST_CASE("init is deterministic and respects the fan-in bound") {
    const int dims[] = {1, 16, 2};
    Mlp a = mlp_init(dims, 7);
    Mlp b = mlp_init(dims, 7);
    CHECK(a.weights == b.weights);
    CHECK(a.biases == b.biases);

    CHECK(a.weights[0].size() == 16u * 1u);
    CHECK(a.weights[1].size() == 2u * 16u);
    CHECK(a.biases[0].size() == 16u);
    CHECK(a.biases[1].size() == 2u);

    const int wide[] = {2, 32, 2};
    Mlp c = mlp_init(wide, 1);
    double bound0 = 1.0 / std::sqrt(2.0);
    double bound1 = 1.0 / std::sqrt(32.0);
    for (double w : c.weights[0]) CHECK(std::abs(w) <= bound0);
    for (double w : c.weights[1]) CHECK(std::abs(w) <= bound1);
    for (const auto& layer : c.biases)
        for (double v : layer) CHECK(v == 0.0);

    Mlp d = mlp_init(dims, 8);
    CHECK(a.weights != d.weights);
}

TEST_CASE("init rejects bad dims") {
    const int too_short[] = {4};
    CHECK_THROWS_AS(mlp_init(too_short, 1), ConfigError);
    const int zero_width[] = {1, 0, 2};
    CHECK_THROWS_AS(mlp_init(zero_width, 1), ConfigError);
}

TEST_CASE("forward: zero network, affine identity, purity") {
    const int dims[] = {1, 16, 2};
    Mlp zero = mlp_init(dims, 1);
    for (auto& layer : zero.weights)
        for (auto& w : layer) w = 0.0;
    std::vector<double> in{3.7};
    auto out = mlp_forward(zero, in);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == 0.0);

    // Single linear layer: y = w x + b.
    const int linear_dims[] = {1, 1};
    Mlp linear = mlp_init(linear_dims, 1);
    linear.weights[0][0] = 2.0;
    linear.biases[0][0] = 1.0;
    std::vector<double> three{3.0};
    CHECK(mlp_forward(linear, three)[0] == doctest::Approx(7.0).epsilon(1e-15));

    Mlp net = mlp_init(dims, 42);
    std::vector<double> x{0.83};
    CHECK(mlp_forward(net, x) == mlp_forward(net, x));

    std::vector<double> wrong{1.0, 2.0};
    CHECK_THROWS_AS(mlp_forward(net, wrong), ShapeError);
}

TEST_CASE("backward: zero grad, scalar chain rule, finite differences") {
    const int dims[] = {1, 16, 2};
    Mlp net = mlp_init(dims, 3);
    ForwardCache cache;
    std::vector<double> in{1.3};
    mlp_forward(net, in, cache);

    std::vector<double> zeros{0.0, 0.0};
    ParamGrads g = mlp_backward(net, cache, zeros);
    for (const auto& layer : g.weights)
        for (double v : layer) CHECK(v == 0.0);
    for (const auto& layer : g.biases)
        for (double v : layer) CHECK(v == 0.0);

    // Scalar linear net: dL/dw = x for unit output gradient.
    const int linear_dims[] = {1, 1};
    Mlp linear = mlp_init(linear_dims, 1);
    linear.weights[0][0] = 0.4;
    ForwardCache lcache;
    std::vector<double> x{2.5};
    mlp_forward(linear, x, lcache);
    std::vector<double> unit{1.0};
    ParamGrads lg = mlp_backward(linear, lcache, unit);
    CHECK(lg.weights[0][0] == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(lg.biases[0][0] == doctest::Approx(1.0).epsilon(1e-15));

    // Analytic vs central differences through the Smooth-L1 head.
    RandomSource rng(99);
    std::vector<double> input{rng.uniform(-1.0, 1.0)};
    std::vector<double> targets{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    ForwardCache c2;
    auto out = mlp_forward(net, input, c2);
    std::vector<double> out_grad(2);
    for (int i = 0; i < 2; ++i) out_grad[i] = smooth_l1(out[i], targets[i]).gradient;
    ParamGrads analytic = mlp_backward(net, c2, out_grad);

    const double h = 1e-5;
    double max_rel = 0.0;
    Mlp probe = net;
    for (std::size_t l = 0; l < probe.weights.size(); ++l) {
        for (std::size_t i = 0; i < probe.weights[l].size(); ++i) {
            double saved = probe.weights[l][i];
            probe.weights[l][i] = saved + h;
            double up = head_loss(probe, input, targets);
            probe.weights[l][i] = saved - h;
            double down = head_loss(probe, input, targets);
            probe.weights[l][i] = saved;
            double numeric = (up - down) / (2 * h);
            double denom = std::max(1e-8, std::abs(analytic.weights[l][i]) + std::abs(numeric));
            max_rel = std::max(max_rel, std::abs(analytic.weights[l][i] - numeric) / denom);
        }
    }
    CHECK(max_rel < 1e-4);
}

TEST_CASE("smooth_l1 branch values and continuity") {
    auto [l0, g0] = smooth_l1(0.7, 0.7);
    CHECK(l0 == 0.0);
    CHECK(g0 == 0.0);

    auto [l1, g1] = smooth_l1(2.0, 0.0);
    CHECK(l1 == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(g1 == 1.0);

    auto [l2, g2] = smooth_l1(0.5, 0.0);
    CHECK(l2 == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(g2 == doctest::Approx(0.5).epsilon(1e-15));

    // Both one-sided limits at |d| = 1 agree: loss 0.5, gradient 1.
    double eps = 1e-9;
    CHECK(smooth_l1(1.0 - eps, 0.0).loss == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(smooth_l1(1.0 + eps, 0.0).loss == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(smooth_l1(1.0 - eps, 0.0).gradient == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(smooth_l1(1.0 + eps, 0.0).gradient == doctest::Approx(1.0).epsilon(1e-6));

    CHECK_THROWS_AS(smooth_l1(std::nan(""), 0.0), NumericError);
    CHECK_THROWS_AS(smooth_l1(0.0, std::numeric_limits<double>::infinity()), NumericError);
}

TEST_CASE("adam: zero grads, hand-derived first step, determinism") {
    const int dims[] = {1, 16, 2};
    Mlp net = mlp_init(dims, 5);
    Mlp before = net;
    AdamState state = adam_init(net, 0.8);

    ParamGrads zero = zero_grads(net);
    adam_step(net, zero, state);
    CHECK(net.weights == before.weights);
    CHECK(net.biases == before.biases);
    CHECK(state.step_count == 1);

    // Fresh state, one step with gradient g: delta = -lr * g / (|g| + eps).
    Mlp scalar;
    scalar.layer_dims = {1, 1};
    scalar.weights = {{0.0}};
    scalar.biases = {{0.0}};
    AdamState s = adam_init(scalar, 0.01);
    ParamGrads g = zero_grads(scalar);
    g.weights[0][0] = -3.4;
    adam_step(scalar, g, s);
    double expected = -0.01 * (-3.4) / (std::abs(-3.4) + 1e-8);
    CHECK(scalar.weights[0][0] == doctest::Approx(expected).epsilon(1e-14));

    // Identical calls from identical states match bitwise.
    Mlp n1 = mlp_init(dims, 11), n2 = mlp_init(dims, 11);
    AdamState s1 = adam_init(n1, 0.1), s2 = adam_init(n2, 0.1);
    ParamGrads gg = zero_grads(n1);
    for (auto& layer : gg.weights)
        for (auto& v : layer) v = 0.25;
    adam_step(n1, gg, s1);
    adam_step(n2, gg, s2);
    CHECK(n1.weights == n2.weights);

    ParamGrads bad = zero_grads(n1);
    bad.weights[0].pop_back();
    CHECK_THROWS_AS(adam_step(n1, bad, s1), ShapeError);
}

TEST_CASE("adam converges on (w - 3)^2") {
    double w = 0.0, m = 0.0, v = 0.0;
    for (long t = 1; t <= 5000; ++t) {
        double grad = 2.0 * (w - 3.0);
        adam_update({&w, 1}, {&grad, 1}, {&m, 1}, {&v, 1}, t, 0.01, 0.9, 0.999, 1e-8);
    }
    CHECK(std::abs(w - 3.0) < 0.01);
}

TEST_CASE("grad_check reference cases") {
    const int dims[] = {1, 16, 2};
    Mlp net = mlp_init(dims, 17);
    std::vector<double> in{0.8};
    std::vector<double> targets{0.3, -0.2};
    CHECK(grad_check(net, in, targets) < 1e-4);

    Mlp zero = mlp_init(dims, 1);
    for (auto& layer : zero.weights)
        for (auto& w : layer) w = 0.0;
    std::vector<double> zin{0.0};
    std::vector<double> ztargets{0.0, 0.0};
    CHECK(grad_check(zero, zin, ztargets) == 0.0);

    const int critic_dims[] = {2, 32, 1};
    Mlp critic = mlp_init(critic_dims, 23);
    std::vector<double> cin{1.0, 0.4};
    std::vector<double> ctarget{0.7};
    CHECK(grad_check(critic, cin, ctarget) < 1e-4);
}

TEST_CASE("gradient correctness over 100 random network/input pairs") {
    RandomSource rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        int hidden = 4 + static_cast<int>(rng.next_unit() * 12.0);
        int inputs = 1 + static_cast<int>(rng.next_unit() * 2.0);
        int outputs = 1 + static_cast<int>(rng.next_unit() * 2.0);
        const int dims[] = {inputs, hidden, outputs};
        Mlp net = mlp_init(dims, rng.next_u64());
        std::vector<double> in(inputs), targets(outputs);
        for (auto& v : in) v = rng.uniform(-2.0, 2.0);
        for (auto& v : targets) v = rng.uniform(-2.0, 2.0);
        CHECK(grad_check(net, in, targets) < 1e-4);
    }
}

}  // TEST_SUITE
