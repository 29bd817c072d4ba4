#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "ergolab/rng.hpp"

namespace ergolab {

enum class ToyAction { safe, risky };

enum class ToyRewardMode {
    wealth_increment,  // r_t = W' - W (default)
    raw_factor,        // r_t = R
};

/// Two-action multiplicative bet: a deterministic safe multiplier against a
/// binomial risky one that pays r1 (< 1) with probability p and r2 (> 1)
/// otherwise. Wealth compounds over rounds_per_episode rounds.
struct ToyConfig {
    double r1 = 0.5;
    double r2 = 2.0;
    double r_safe = 1.2;
    double p = 0.5;
    int rounds_per_episode = 1;  // M
    double initial_wealth = 1.0;
    ToyRewardMode reward_mode = ToyRewardMode::wealth_increment;

    void validate() const;
};

/// Binary portfolio: a fraction f of wealth is exposed to a bet that
/// multiplies it by r_win with probability p and r_loss otherwise; the
/// uninvested fraction is carried through unchanged.
struct PortfolioConfig {
    double r_win = 3.0;
    double r_loss = 0.2;
    double p = 0.5;
    int rounds_per_episode = 1;  // M
    double initial_wealth = 10.0;

    void validate() const;
};

struct Transition {
    double state_wealth;
    ToyAction action;
    double reward;
    double next_wealth;
};

struct EpisodeTrace {
    std::vector<Transition> steps;
    double final_wealth = 0.0;
};

struct ToyStepResult {
    double reward;
    double next_wealth;
};

ToyStepResult toy_step(const ToyConfig& config, double wealth, ToyAction action,
                       RandomSource& rng);

/// Runs one full M-round episode under the given policy, recording every
/// transition. The policy sees (wealth, step index).
EpisodeTrace run_toy_episode(const ToyConfig& config,
                             const std::function<ToyAction(double, int)>& policy,
                             RandomSource& rng);

/// CSV columns: step,wealth,action,reward,next_wealth
void write_trace_csv(std::ostream& out, const EpisodeTrace& trace);

double portfolio_step(const PortfolioConfig& config, double wealth, double fraction,
                      RandomSource& rng);

struct PortfolioEpisode {
    double final_wealth;
    double episode_reward;  // W_M - W_0
};

PortfolioEpisode run_portfolio_episode(const PortfolioConfig& config, double fraction,
                                       RandomSource& rng);

struct GrowthDiagnostic {
    double time_avg_growth;        // mean over trajectories of (1/T) ln(W_T/W_0)
    double time_avg_se;
    double ensemble_avg_growth;    // ln of the estimated per-step expected factor
    double ensemble_se;
    double time_avg_closed_form;   // p ln r1 + (1-p) ln r2
    double ensemble_closed_form;   // ln(p r1 + (1-p) r2)
};

/// Estimates both growth rates along all-risky trajectories. The time
/// average accumulates per-step log factors (wealth itself would overflow
/// long horizons). The ensemble average uses the i.i.d. factorisation
/// E[W_T/W_0] = (E R)^T, i.e. the log of the sample-mean factor over all
/// n*T draws; the naive mean of W_T/W_0 over a finite ensemble is
/// exponentially biased low at long horizons.
GrowthDiagnostic ergodicity_diagnostic(const ToyConfig& config, int horizon,
                                       int ensemble_size, RandomSource& rng);

}  // namespace ergolab
