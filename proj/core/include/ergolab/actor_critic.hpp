#pragma once

#include <cstdint>
#include <vector>

#include "ergolab/environments.hpp"
#include "ergolab/mlp.hpp"

namespace ergolab {

/// Numerically stable log(1 + e^x).
double softplus(double x);

/// Logistic function, the derivative of softplus.
double logistic(double x);

/// Digamma via upward recurrence and the asymptotic series.
double digamma(double x);

/// Concentration parameters of the actor's distribution over fractions.
struct BetaParams {
    double alpha;
    double beta;

    double mean() const { return alpha / (alpha + beta); }
};

double beta_log_density(const BetaParams& params, double fraction);

/// Gamma-ratio Beta sampler (Marsaglia-Tsang); the result is nudged into
/// the open interval so log densities stay finite.
double sample_beta(const BetaParams& params, RandomSource& rng);

/// Policy network: maps state features to a Beta distribution over
/// fractions through a mean/concentration head: mean mu = logistic(z0),
/// concentration c = 1 + softplus(z1) (optionally capped), alpha = mu c,
/// beta = (1 - mu) c. The mean can reach the edges of the action range
/// while a concentration cap keeps a floor under the sampling spread, so
/// exploration never collapses. The family itself confines every action
/// to [0,1]; nothing is clipped afterwards.
struct Actor {
    Mlp network;
    double concentration_cap = 0.0;  // 0 = uncapped
};

/// Scalar state-value estimator.
struct Critic {
    Mlp network;
};

BetaParams actor_distribution(const Actor& actor, std::span<const double> state);

struct FractionSample {
    double fraction;
    double log_density;
};

FractionSample propose_fraction(const Actor& actor, std::span<const double> state,
                                RandomSource& rng);

/// Distribution mean, used by greedy evaluation.
double deterministic_fraction(const Actor& actor, std::span<const double> state);

double critic_value(const Critic& critic, std::span<const double> state);

struct AcHyperparams {
    int actor_hidden = 32;
    int critic_hidden = 32;
    double actor_lr = 1e-3;
    double critic_lr = 1e-3;
    long episodes = 100000;
    bool normalize_returns = false;  // divide G by its running std
    // Saturation bound on the advantage fed to the policy gradient
    // (0 = off). Compounding returns are heavy-tailed: a handful of
    // win-streak episodes otherwise outweighs every typical trajectory and
    // drags the policy to the all-in expected-value optimum. A bound a few
    // times the initial wealth leaves single-round advantages untouched
    // while capping the tail's leverage.
    double advantage_clip = 0.0;
    // Upper bound on the Beta concentration (0 = none). Compounding
    // starves the policy gradient once the distribution narrows: ruined
    // and jackpot regions of the action range stop being sampled, and the
    // advantage signal there dies. A bounded concentration keeps those
    // regions visited.
    double concentration_cap = 0.0;
    bool full_policy = false;  // features (1, p, 1-p), p resampled per episode
};

struct AcUpdate {
    double fraction;
    double episode_return;  // G as used by the update (normalised when enabled)
    double advantage;       // G - V(s), exactly
    double policy_loss;
    double value_loss;
};

/// One agent: actor, critic, their optimiser states and the running
/// return statistics for optional normalisation.
struct AcAgent {
    Actor actor;
    AdamState actor_adam;
    Critic critic;
    AdamState critic_adam;
    bool normalize_returns = false;
    double advantage_clip = 0.0;
    bool full_policy = false;
    long return_count = 0;
    double return_mean = 0.0;
    double return_m2 = 0.0;

    std::vector<double> features(double p) const;
};

AcAgent ac_agent_init(const AcHyperparams& hp, std::uint64_t seed);

/// One Adam step on the actor for a given (fraction, advantage) pair:
/// loss -log pi(f|s) * A with the advantage held constant. Returns the
/// policy loss. A zero advantage is a zero gradient.
double apply_policy_gradient(AcAgent& agent, std::span<const double> state,
                             double fraction, double advantage);

/// One Adam step on the critic toward the return target under squared
/// loss. Returns (target - V)^2 evaluated before the step.
double apply_critic_update(AcAgent& agent, std::span<const double> state,
                           double target_return);

/// One episode of training: the actor proposes a single fraction, the
/// environment compounds it over M rounds, G = W_M - W_0, and both
/// networks take one Adam step (REINFORCE with the critic baseline).
AcUpdate episode_update(AcAgent& agent, const PortfolioConfig& env, RandomSource& rng,
                        long episode_index = 0);

struct AcEpisodeLogRow {
    long episode;
    double fraction;
    double episode_return;
    double advantage;
    double policy_loss;
    double value_loss;
};

struct AcTrainResult {
    AcAgent agent;
    double fraction;  // deterministic evaluation at the trained p
    std::vector<AcEpisodeLogRow> log;
};

AcTrainResult train_ac_agent(const PortfolioConfig& env, const AcHyperparams& hp,
                             std::uint64_t seed, long log_every = 0);

/// Trains a single agent that generalises over p: the win probability is
/// resampled uniformly every episode and enters the state features.
AcTrainResult train_full_policy_agent(const PortfolioConfig& env_template,
                                      const AcHyperparams& hp, std::uint64_t seed,
                                      long log_every = 0);

}  // namespace ergolab
