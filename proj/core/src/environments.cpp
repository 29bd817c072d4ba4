#include "ergolab/environments.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "ergolab/csv.hpp"
#include "ergolab/errors.hpp"

namespace ergolab {

void ToyConfig::validate() const {
    if (!(r1 > 0.0 && r1 < 1.0)) throw ConfigError("toy config: need 0 < r1 < 1");
    if (!(r2 > 1.0)) throw ConfigError("toy config: need r2 > 1");
    if (!(r_safe > 0.0)) throw ConfigError("toy config: need r_safe > 0");
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("toy config: p outside [0,1]");
    if (rounds_per_episode < 1) throw ConfigError("toy config: M must be >= 1");
    if (!(initial_wealth > 0.0)) throw ConfigError("toy config: initial wealth must be positive");
}

void PortfolioConfig::validate() const {
    if (!(r_loss > 0.0 && r_loss < 1.0)) throw ConfigError("portfolio config: need 0 < r_loss < 1");
    if (!(r_win > 1.0)) throw ConfigError("portfolio config: need r_win > 1");
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("portfolio config: p outside [0,1]");
    if (rounds_per_episode < 1) throw ConfigError("portfolio config: M must be >= 1");
    if (!(initial_wealth > 0.0)) throw ConfigError("portfolio config: initial wealth must be positive");
}

ToyStepResult toy_step(const ToyConfig& config, double wealth, ToyAction action,
                       RandomSource& rng) {
    if (!(wealth > 0.0)) throw DomainError("toy_step: wealth must be positive");
    double factor;
    if (action == ToyAction::safe) {
        factor = config.r_safe;
    } else {
        factor = rng.bernoulli(config.p) ? config.r1 : config.r2;
    }
    double next = factor * wealth;
    double reward = config.reward_mode == ToyRewardMode::wealth_increment
                        ? next - wealth
                        : factor;
    return {reward, next};
}

EpisodeTrace run_toy_episode(const ToyConfig& config,
                             const std::function<ToyAction(double, int)>& policy,
                             RandomSource& rng) {
    config.validate();
    EpisodeTrace trace;
    trace.steps.reserve(config.rounds_per_episode);
    double wealth = config.initial_wealth;
    for (int t = 0; t < config.rounds_per_episode; ++t) {
        ToyAction action = policy(wealth, t);
        auto [reward, next] = toy_step(config, wealth, action, rng);
        trace.steps.push_back({wealth, action, reward, next});
        wealth = next;
    }
    trace.final_wealth = wealth;
    return trace;
}

void write_trace_csv(std::ostream& out, const EpisodeTrace& trace) {
    out << "step,wealth,action,reward,next_wealth\n";
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& t = trace.steps[i];
        out << i << ',' << format_double(t.state_wealth) << ','
            << (t.action == ToyAction::safe ? "safe" : "risky") << ','
            << format_double(t.reward) << ',' << format_double(t.next_wealth) << '\n';
    }
}

double portfolio_step(const PortfolioConfig& config, double wealth, double fraction,
                      RandomSource& rng) {
    if (!(wealth > 0.0)) throw DomainError("portfolio_step: wealth must be positive");
    if (!(fraction >= 0.0 && fraction <= 1.0))
        throw DomainError("portfolio_step: fraction outside [0,1]");
    double factor = rng.bernoulli(config.p) ? config.r_win : config.r_loss;
    return wealth * (1.0 - fraction) + wealth * fraction * factor;
}

PortfolioEpisode run_portfolio_episode(const PortfolioConfig& config, double fraction,
                                       RandomSource& rng) {
    double wealth = config.initial_wealth;
    for (int t = 0; t < config.rounds_per_episode; ++t)
        wealth = portfolio_step(config, wealth, fraction, rng);
    return {wealth, wealth - config.initial_wealth};
}

GrowthDiagnostic ergodicity_diagnostic(const ToyConfig& config, int horizon,
                                       int ensemble_size, RandomSource& rng) {
    config.validate();
    if (horizon < 1) throw ConfigError("ergodicity_diagnostic: horizon must be >= 1");
    if (ensemble_size < 1) throw ConfigError("ergodicity_diagnostic: ensemble size must be >= 1");

    const double log_r1 = std::log(config.r1);
    const double log_r2 = std::log(config.r2);

    double growth_sum = 0.0, growth_sq_sum = 0.0;
    double factor_sum = 0.0, factor_sq_sum = 0.0;
    const double n_draws = static_cast<double>(horizon) * ensemble_size;

    for (int i = 0; i < ensemble_size; ++i) {
        double log_wealth_ratio = 0.0;
        for (int t = 0; t < horizon; ++t) {
            bool worst = rng.bernoulli(config.p);
            double factor = worst ? config.r1 : config.r2;
            log_wealth_ratio += worst ? log_r1 : log_r2;
            factor_sum += factor;
            factor_sq_sum += factor * factor;
        }
        double growth = log_wealth_ratio / horizon;
        growth_sum += growth;
        growth_sq_sum += growth * growth;
    }

    GrowthDiagnostic d{};
    d.time_avg_growth = growth_sum / ensemble_size;
    double growth_var =
        ensemble_size > 1
            ? (growth_sq_sum - growth_sum * growth_sum / ensemble_size) / (ensemble_size - 1)
            : 0.0;
    d.time_avg_se = std::sqrt(std::max(0.0, growth_var) / ensemble_size);

    double mean_factor = factor_sum / n_draws;
    d.ensemble_avg_growth = std::log(mean_factor);
    double factor_var =
        n_draws > 1 ? (factor_sq_sum - factor_sum * factor_sum / n_draws) / (n_draws - 1) : 0.0;
    // Delta method for ln of a sample mean.
    d.ensemble_se = std::sqrt(std::max(0.0, factor_var) / n_draws) / mean_factor;

    d.time_avg_closed_form = config.p * log_r1 + (1.0 - config.p) * log_r2;
    d.ensemble_closed_form = std::log(config.p * config.r1 + (1.0 - config.p) * config.r2);
    return d;
}

}  // namespace ergolab
