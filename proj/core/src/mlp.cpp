#include "ergolab/mlp.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "ergolab/errors.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

void ParamGrads::scale(double factor) {
    for (auto& w : weights)
        for (auto& v : w) v *= factor;
    for (auto& b : biases)
        for (auto& v : b) v *= factor;
}

Mlp mlp_init(std::span<const int> layer_dims, std::uint64_t seed) {
    if (layer_dims.size() < 2)
        throw ConfigError("mlp_init: need at least input and output dims");
    for (int d : layer_dims)
        if (d < 1) throw ConfigError("mlp_init: layer dims must be positive");

    Mlp net;
    net.layer_dims.assign(layer_dims.begin(), layer_dims.end());
    RandomSource rng(seed);
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        int fan_in = layer_dims[l];
        int fan_out = layer_dims[l + 1];
        double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::vector<double> w(static_cast<std::size_t>(fan_out) * fan_in);
        for (auto& v : w) v = rng.uniform(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(fan_out, 0.0);
    }
    return net;
}

namespace {

void forward_impl(const Mlp& net, std::span<const double> input,
                  ForwardCache* cache, std::vector<double>& out) {
    if (static_cast<int>(input.size()) != net.input_dim())
        throw ShapeError("mlp_forward: input length " + std::to_string(input.size()) +
                         " != input dim " + std::to_string(net.input_dim()));

    std::vector<double> act(input.begin(), input.end());
    if (cache) {
        cache->input = act;
        cache->pre_activations.clear();
        cache->activations.clear();
    }

    int layers = net.layer_count();
    for (int l = 0; l < layers; ++l) {
        int in_dim = net.layer_dims[l];
        int out_dim = net.layer_dims[l + 1];
        const auto& w = net.weights[l];
        const auto& b = net.biases[l];
        std::vector<double> z(out_dim);
        for (int i = 0; i < out_dim; ++i) {
            double s = b[i];
            const double* row = &w[static_cast<std::size_t>(i) * in_dim];
            for (int j = 0; j < in_dim; ++j) s += row[j] * act[j];
            z[i] = s;
        }
        bool hidden = l + 1 < layers;
        std::vector<double> a(out_dim);
        for (int i = 0; i < out_dim; ++i) a[i] = hidden && z[i] < 0.0 ? 0.0 : z[i];
        if (cache) {
            cache->pre_activations.push_back(z);
            cache->activations.push_back(a);
        }
        act = std::move(a);
    }
    out = std::move(act);
}

}  // namespace

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input) {
    std::vector<double> out;
    forward_impl(net, input, nullptr, out);
    return out;
}

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input,
                                ForwardCache& cache) {
    std::vector<double> out;
    forward_impl(net, input, &cache, out);
    return out;
}

ParamGrads zero_grads(const Mlp& net) {
    ParamGrads g;
    for (const auto& w : net.weights) g.weights.emplace_back(w.size(), 0.0);
    for (const auto& b : net.biases) g.biases.emplace_back(b.size(), 0.0);
    return g;
}

void mlp_backward_into(const Mlp& net, const ForwardCache& cache,
                       std::span<const double> output_grad, ParamGrads& into) {
    int layers = net.layer_count();
    if (static_cast<int>(cache.activations.size()) != layers ||
        static_cast<int>(cache.pre_activations.size()) != layers)
        throw ShapeError("mlp_backward: cache does not match network layer count");
    if (static_cast<int>(output_grad.size()) != net.output_dim())
        throw ShapeError("mlp_backward: output_grad length mismatch");
    if (static_cast<int>(cache.input.size()) != net.input_dim())
        throw ShapeError("mlp_backward: cache input width mismatch");

    std::vector<double> delta(output_grad.begin(), output_grad.end());
    for (int l = layers - 1; l >= 0; --l) {
        int in_dim = net.layer_dims[l];
        int out_dim = net.layer_dims[l + 1];
        const auto& prev_act = l == 0 ? cache.input : cache.activations[l - 1];
        auto& gw = into.weights[l];
        auto& gb = into.biases[l];
        for (int i = 0; i < out_dim; ++i) {
            double d = delta[i];
            gb[i] += d;
            double* row = &gw[static_cast<std::size_t>(i) * in_dim];
            for (int j = 0; j < in_dim; ++j) row[j] += d * prev_act[j];
        }
        if (l > 0) {
            const auto& w = net.weights[l];
            const auto& z_prev = cache.pre_activations[l - 1];
            std::vector<double> next(in_dim, 0.0);
            for (int i = 0; i < out_dim; ++i) {
                double d = delta[i];
                const double* row = &w[static_cast<std::size_t>(i) * in_dim];
                for (int j = 0; j < in_dim; ++j) next[j] += d * row[j];
            }
            // ReLU subgradient: 0 at exactly 0.
            for (int j = 0; j < in_dim; ++j)
                if (z_prev[j] <= 0.0) next[j] = 0.0;
            delta = std::move(next);
        }
    }
}

ParamGrads mlp_backward(const Mlp& net, const ForwardCache& cache,
                        std::span<const double> output_grad) {
    ParamGrads g = zero_grads(net);
    mlp_backward_into(net, cache, output_grad, g);
    return g;
}

SmoothL1Result smooth_l1(double prediction, double target) {
    if (!std::isfinite(prediction) || !std::isfinite(target))
        throw NumericError("smooth_l1: non-finite input");
    double d = prediction - target;
    if (std::abs(d) < 1.0) return {0.5 * d * d, d};
    return {std::abs(d) - 0.5, d > 0.0 ? 1.0 : -1.0};
}

AdamState adam_init(const Mlp& net, double learning_rate) {
    AdamState s;
    s.learning_rate = learning_rate;
    for (const auto& w : net.weights) {
        s.m_weights.emplace_back(w.size(), 0.0);
        s.v_weights.emplace_back(w.size(), 0.0);
    }
    for (const auto& b : net.biases) {
        s.m_biases.emplace_back(b.size(), 0.0);
        s.v_biases.emplace_back(b.size(), 0.0);
    }
    return s;
}

void adam_update(std::span<double> params, std::span<const double> grads,
                 std::span<double> m, std::span<double> v, long step_count,
                 double learning_rate, double beta1, double beta2, double epsilon) {
    if (params.size() != grads.size() || params.size() != m.size() ||
        params.size() != v.size())
        throw ShapeError("adam_update: span size mismatch");
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        double g = grads[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        double m_hat = m[i] / bc1;
        double v_hat = v[i] / bc2;
        params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + epsilon);
    }
}

void adam_step(Mlp& net, const ParamGrads& grads, AdamState& state) {
    if (grads.weights.size() != net.weights.size() ||
        grads.biases.size() != net.biases.size())
        throw ShapeError("adam_step: grads do not match network");
    state.step_count += 1;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        if (grads.weights[l].size() != net.weights[l].size())
            throw ShapeError("adam_step: weight grad shape mismatch");
        adam_update(net.weights[l], grads.weights[l], state.m_weights[l],
                    state.v_weights[l], state.step_count, state.learning_rate,
                    state.beta1, state.beta2, state.epsilon_stability);
        adam_update(net.biases[l], grads.biases[l], state.m_biases[l],
                    state.v_biases[l], state.step_count, state.learning_rate,
                    state.beta1, state.beta2, state.epsilon_stability);
    }
}

namespace {

double smooth_l1_head(const Mlp& net, std::span<const double> input,
                      std::span<const double> targets) {
    auto out = mlp_forward(net, input);
    double loss = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i)
        loss += smooth_l1(out[i], targets[i]).loss;
    return loss;
}

}  // namespace

double grad_check(const Mlp& net, std::span<const double> input,
                  std::span<const double> targets) {
    if (static_cast<int>(targets.size()) != net.output_dim())
        throw ShapeError("grad_check: targets length mismatch");

    ForwardCache cache;
    auto out = mlp_forward(net, input, cache);
    std::vector<double> out_grad(out.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out_grad[i] = smooth_l1(out[i], targets[i]).gradient;
    ParamGrads analytic = mlp_backward(net, cache, out_grad);

    const double h = 1e-5;
    double max_err = 0.0;
    Mlp probe = net;
    auto check_block = [&](std::vector<double>& params, const std::vector<double>& grad) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            double saved = params[i];
            params[i] = saved + h;
            double up = smooth_l1_head(probe, input, targets);
            params[i] = saved - h;
            double down = smooth_l1_head(probe, input, targets);
            params[i] = saved;
            double numeric = (up - down) / (2.0 * h);
            double denom = std::max(1e-8, std::abs(grad[i]) + std::abs(numeric));
            double err = std::abs(grad[i] - numeric) / denom;
            if (err > max_err) max_err = err;
        }
    };
    for (std::size_t l = 0; l < probe.weights.size(); ++l) {
        check_block(probe.weights[l], analytic.weights[l]);
        check_block(probe.biases[l], analytic.biases[l]);
    }
    return max_err;
}

}  // namespace ergolab
