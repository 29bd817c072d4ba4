#include "ergolab/actor_critic.hpp"

#include <algorithm>
#include <cmath>

#include "ergolab/errors.hpp"

namespace ergolab {

double softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

double digamma(double x) {
    double result = 0.0;
    while (x < 10.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    double inv = 1.0 / x;
    double inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv -
              inv2 * (1.0 / 12.0 -
                      inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
    return result;
}

double beta_log_density(const BetaParams& params, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw DomainError("beta_log_density: fraction must lie in (0,1)");
    double log_norm = std::lgamma(params.alpha) + std::lgamma(params.beta) -
                      std::lgamma(params.alpha + params.beta);
    return (params.alpha - 1.0) * std::log(fraction) +
           (params.beta - 1.0) * std::log1p(-fraction) - log_norm;
}

namespace {

double sample_gamma(double shape, RandomSource& rng) {
    if (shape < 1.0) {
        double u = 1.0 - rng.next_unit();  // (0,1]
        return sample_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = rng.next_normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        double u = 1.0 - rng.next_unit();
        double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

}  // namespace

double sample_beta(const BetaParams& params, RandomSource& rng) {
    double x = sample_gamma(params.alpha, rng);
    double y = sample_gamma(params.beta, rng);
    double f = x / (x + y);
    return std::clamp(f, 1e-12, 1.0 - 1e-12);
}

namespace {

BetaParams head_params(const Actor& actor, std::span<const double> z) {
    // Keep the mean strictly inside (0,1) so both concentrations stay positive.
    double mu = std::clamp(logistic(z[0]), 1e-15, 1.0 - 1e-15);
    double spread = softplus(z[1]);
    if (actor.concentration_cap > 0.0)
        spread = std::min(spread, actor.concentration_cap);
    double c = 1.0 + spread;
    return {mu * c, (1.0 - mu) * c};
}

}  // namespace

BetaParams actor_distribution(const Actor& actor, std::span<const double> state) {
    auto z = mlp_forward(actor.network, state);
    BetaParams params = head_params(actor, z);
    if (!std::isfinite(params.alpha) || !std::isfinite(params.beta) ||
        !(params.alpha > 0.0) || !(params.beta > 0.0))
        throw NumericError("actor: non-finite distribution parameters");
    return params;
}

FractionSample propose_fraction(const Actor& actor, std::span<const double> state,
                                RandomSource& rng) {
    BetaParams params = actor_distribution(actor, state);
    double f = sample_beta(params, rng);
    return {f, beta_log_density(params, f)};
}

double deterministic_fraction(const Actor& actor, std::span<const double> state) {
    return actor_distribution(actor, state).mean();
}

double critic_value(const Critic& critic, std::span<const double> state) {
    return mlp_forward(critic.network, state)[0];
}

std::vector<double> AcAgent::features(double p) const {
    // At fixed p the initial wealth is a constant carrying no information,
    // so the state reduces to a constant feature. Full-policy mode carries
    // p in complementary form: the policy-gradient written to an input
    // pathway scales with the input value, so a bare p feature starves the
    // p ~ 0 end of the range.
    if (full_policy) return {1.0, p, 1.0 - p};
    return {1.0};
}

AcAgent ac_agent_init(const AcHyperparams& hp, std::uint64_t seed) {
    if (hp.actor_hidden < 1 || hp.critic_hidden < 1)
        throw ConfigError("ac: hidden widths must be >= 1");
    AcAgent agent;
    agent.full_policy = hp.full_policy;
    agent.normalize_returns = hp.normalize_returns;
    agent.advantage_clip = hp.advantage_clip;
    if (hp.advantage_clip < 0.0)
        throw ConfigError("ac: advantage_clip must be non-negative");
    if (hp.concentration_cap < 0.0)
        throw ConfigError("ac: concentration_cap must be non-negative");
    int input_dim = hp.full_policy ? 3 : 1;
    const int actor_dims[] = {input_dim, hp.actor_hidden, 2};
    const int critic_dims[] = {input_dim, hp.critic_hidden, 1};
    agent.actor.network = mlp_init(actor_dims, derive_seed(seed, 0xAC, 0, 0));
    agent.actor.concentration_cap = hp.concentration_cap;
    agent.critic.network = mlp_init(critic_dims, derive_seed(seed, 0xAC, 1, 0));
    agent.actor_adam = adam_init(agent.actor.network, hp.actor_lr);
    agent.critic_adam = adam_init(agent.critic.network, hp.critic_lr);
    return agent;
}

double apply_policy_gradient(AcAgent& agent, std::span<const double> state,
                             double fraction, double advantage) {
    ForwardCache cache;
    auto z = mlp_forward(agent.actor.network, state, cache);
    BetaParams params = head_params(agent.actor, z);
    if (!std::isfinite(params.alpha) || !std::isfinite(params.beta))
        throw NumericError("ac: non-finite distribution parameters");
    double log_density = beta_log_density(params, fraction);

    // Score in (mean, concentration) coordinates, advantage held constant:
    //   d log pi / d mu = c (ln f - ln(1-f) - psi(alpha) + psi(beta))
    //   d log pi / d c  = mu ln f + (1-mu) ln(1-f)
    //                     - mu psi(alpha) - (1-mu) psi(beta) + psi(c)
    double c = params.alpha + params.beta;
    double mu = params.alpha / c;
    double psi_a = digamma(params.alpha);
    double psi_b = digamma(params.beta);
    double log_f = std::log(fraction);
    double log_1mf = std::log1p(-fraction);
    double dlog_dmu = c * (log_f - log_1mf - psi_a + psi_b);
    double dlog_dc =
        mu * log_f + (1.0 - mu) * log_1mf - mu * psi_a - (1.0 - mu) * psi_b + digamma(c);

    double out_grad[2] = {
        -advantage * dlog_dmu * mu * (1.0 - mu),  // logistic chain
        -advantage * dlog_dc * logistic(z[1]),    // softplus chain
    };
    // Semi-permeable concentration rail: drop only gradients pushing past it.
    if (agent.actor.concentration_cap > 0.0 &&
        softplus(z[1]) >= agent.actor.concentration_cap && out_grad[1] < 0.0)
        out_grad[1] = 0.0;

    ParamGrads grads = mlp_backward(agent.actor.network, cache, out_grad);
    adam_step(agent.actor.network, grads, agent.actor_adam);
    return -log_density * advantage;
}

double apply_critic_update(AcAgent& agent, std::span<const double> state,
                           double target_return) {
    ForwardCache cache;
    double value = mlp_forward(agent.critic.network, state, cache)[0];
    double residual = target_return - value;
    // Smooth-L1 training signal: compounding makes returns heavy-tailed,
    // and the robust loss keeps the baseline near the typical return
    // instead of chasing the tail mean. The reported value loss stays the
    // squared advantage.
    double out_grad[1] = {smooth_l1(value, target_return).gradient};
    ParamGrads grads = mlp_backward(agent.critic.network, cache, out_grad);
    adam_step(agent.critic.network, grads, agent.critic_adam);
    return residual * residual;
}

AcUpdate episode_update(AcAgent& agent, const PortfolioConfig& env, RandomSource& rng,
                        long episode_index) {
    std::vector<double> state = agent.features(env.p);

    BetaParams params;
    try {
        params = actor_distribution(agent.actor, state);
    } catch (const NumericError& e) {
        throw TrainingDivergedError(e.what(), episode_index);
    }
    double f = sample_beta(params, rng);

    double g = run_portfolio_episode(env, f, rng).episode_reward;
    if (agent.normalize_returns) {
        agent.return_count += 1;
        double delta = g - agent.return_mean;
        agent.return_mean += delta / static_cast<double>(agent.return_count);
        agent.return_m2 += delta * (g - agent.return_mean);
        if (agent.return_count > 1) {
            double sd = std::sqrt(agent.return_m2 /
                                  static_cast<double>(agent.return_count - 1));
            g /= std::max(sd, 1e-8);
        }
    }

    double value = critic_value(agent.critic, state);
    double advantage = g - value;
    if (!std::isfinite(advantage))
        throw TrainingDivergedError("ac: non-finite advantage", episode_index);

    double policy_advantage =
        agent.advantage_clip > 0.0
            ? std::clamp(advantage, -agent.advantage_clip, agent.advantage_clip)
            : advantage;
    double policy_loss = apply_policy_gradient(agent, state, f, policy_advantage);
    double value_loss = apply_critic_update(agent, state, g);
    if (!std::isfinite(policy_loss) || !std::isfinite(value_loss))
        throw TrainingDivergedError("ac: non-finite loss", episode_index);

    return {f, g, advantage, policy_loss, value_loss};
}

namespace {

AcTrainResult train_loop(const PortfolioConfig& env_template, const AcHyperparams& hp,
                         std::uint64_t seed, long log_every, bool resample_p) {
    if (hp.episodes < 1) throw ConfigError("ac: episodes must be >= 1");
    env_template.validate();
    AcTrainResult result{ac_agent_init(hp, seed), 0.0, {}};
    RandomSource rng(seed);
    PortfolioConfig env = env_template;
    for (long e = 0; e < hp.episodes; ++e) {
        if (resample_p) env.p = rng.next_unit();
        AcUpdate update = episode_update(result.agent, env, rng, e);
        if (log_every > 0 && e % log_every == 0)
            result.log.push_back({e, update.fraction, update.episode_return,
                                  update.advantage, update.policy_loss,
                                  update.value_loss});
    }
    result.fraction =
        deterministic_fraction(result.agent.actor, result.agent.features(env_template.p));
    return result;
}

}  // namespace

AcTrainResult train_ac_agent(const PortfolioConfig& env, const AcHyperparams& hp,
                             std::uint64_t seed, long log_every) {
    if (hp.full_policy)
        throw ConfigError("train_ac_agent: full-policy hyperparams need the full-policy trainer");
    return train_loop(env, hp, seed, log_every, false);
}

AcTrainResult train_full_policy_agent(const PortfolioConfig& env_template,
                                      const AcHyperparams& hp, std::uint64_t seed,
                                      long log_every) {
    AcHyperparams full = hp;
    full.full_policy = true;
    return train_loop(env_template, full, seed, log_every, true);
}

}  // namespace ergolab
