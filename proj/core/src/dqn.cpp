#include "ergolab/dqn.hpp"

#include <algorithm>
#include <cmath>

#include "ergolab/errors.hpp"

namespace ergolab {

double EpsilonSchedule::at_episode(long episode) const {
    return std::max(floor, initial * std::pow(decay_rate, static_cast<double>(episode)));
}

void ReplayBuffer::push(const Transition& t, bool episode_end) {
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back({t, episode_end});
}

std::vector<StoredTransition> ReplayBuffer::sample(std::size_t count,
                                                   RandomSource& rng) const {
    if (count > items_.size())
        throw DomainError("replay buffer: sample larger than contents");
    // Partial Fisher-Yates over an index vector.
    std::vector<std::size_t> idx(items_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<StoredTransition> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.next_unit() *
                                                     static_cast<double>(idx.size() - i));
        if (j >= idx.size()) j = idx.size() - 1;
        std::swap(idx[i], idx[j]);
        out.push_back(items_[idx[i]]);
    }
    return out;
}

double DqnAgent::feature(double wealth) const {
    return log_feature ? std::log(wealth) : wealth;
}

DqnAgent dqn_agent_init(const ToyConfig& env, const DqnHyperparams& hp,
                        std::uint64_t seed) {
    env.validate();
    if (hp.batch_size < 1) throw ConfigError("dqn: batch size must be >= 1");
    if (hp.hidden_width < 1) throw ConfigError("dqn: hidden width must be >= 1");
    if (!(hp.gamma >= 0.0 && hp.gamma <= 1.0)) throw ConfigError("dqn: gamma outside [0,1]");

    DqnAgent agent;
    const int dims[] = {1, hp.hidden_width, 2};
    agent.q_network = mlp_init(dims, seed);
    agent.adam = adam_init(agent.q_network, hp.learning_rate);
    agent.gamma = hp.gamma;
    agent.epsilon_schedule = hp.epsilon;
    agent.batch_size = hp.batch_size;
    int capacity = hp.buffer_capacity > 0
                       ? hp.buffer_capacity
                       : 10 * env.rounds_per_episode * hp.batch_size;
    agent.buffer = ReplayBuffer(static_cast<std::size_t>(capacity));
    agent.log_feature =
        hp.feature == WealthFeature::log ||
        (hp.feature == WealthFeature::automatic && env.rounds_per_episode >= 10);
    agent.horizon = hp.horizon;
    return agent;
}

namespace {

ToyAction greedy_action(const DqnAgent& agent, double wealth) {
    double s = agent.feature(wealth);
    auto q = mlp_forward(agent.q_network, std::span<const double>(&s, 1));
    // Index 0 is Safe; ties go to Safe.
    return q[0] >= q[1] ? ToyAction::safe : ToyAction::risky;
}

}  // namespace

ToyAction select_action(const DqnAgent& agent, double wealth, double epsilon,
                        RandomSource& rng) {
    if (rng.bernoulli(epsilon))
        return rng.bernoulli(0.5) ? ToyAction::safe : ToyAction::risky;
    return greedy_action(agent, wealth);
}

std::vector<double> bellman_targets(const DqnAgent& agent,
                                    std::span<const Transition> batch) {
    if (batch.empty()) throw DomainError("bellman_targets: empty batch");
    std::vector<double> targets;
    targets.reserve(batch.size());
    for (const auto& t : batch) {
        double s = agent.feature(t.next_wealth);
        auto q = mlp_forward(agent.q_network, std::span<const double>(&s, 1));
        targets.push_back(t.reward + agent.gamma * std::max(q[0], q[1]));
    }
    return targets;
}

DqnEpisodeStats train_episode(DqnAgent& agent, const ToyConfig& env, long episode_index,
                              RandomSource& rng) {
    double epsilon = agent.epsilon_schedule.at_episode(episode_index);
    double wealth = env.initial_wealth;
    for (int t = 0; t < env.rounds_per_episode; ++t) {
        ToyAction action = select_action(agent, wealth, epsilon, rng);
        auto [reward, next] = toy_step(env, wealth, action, rng);
        agent.buffer.push({wealth, action, reward, next},
                          t + 1 == env.rounds_per_episode);
        wealth = next;
    }

    DqnEpisodeStats stats{epsilon, wealth, std::nullopt};
    if (agent.buffer.size() < static_cast<std::size_t>(agent.batch_size)) return stats;

    auto batch = agent.buffer.sample(static_cast<std::size_t>(agent.batch_size), rng);
    std::vector<Transition> transitions;
    transitions.reserve(batch.size());
    for (const auto& entry : batch) transitions.push_back(entry.transition);
    auto targets = bellman_targets(agent, transitions);
    if (agent.horizon == HorizonMode::episodic) {
        // The wealth resets after the last round; its target is the reward.
        for (std::size_t i = 0; i < batch.size(); ++i)
            if (batch[i].episode_end) targets[i] = transitions[i].reward;
    }

    ParamGrads grads = zero_grads(agent.q_network);
    double loss = 0.0;
    std::vector<double> out_grad(2);
    ForwardCache cache;
    for (std::size_t i = 0; i < transitions.size(); ++i) {
        double s = agent.feature(transitions[i].state_wealth);
        auto q = mlp_forward(agent.q_network, std::span<const double>(&s, 1), cache);
        int a = transitions[i].action == ToyAction::safe ? 0 : 1;
        auto [l, dl] = smooth_l1(q[a], targets[i]);
        loss += l;
        out_grad[0] = out_grad[1] = 0.0;
        out_grad[a] = dl / static_cast<double>(transitions.size());
        mlp_backward_into(agent.q_network, cache, out_grad, grads);
    }
    loss /= static_cast<double>(transitions.size());
    if (!std::isfinite(loss))
        throw TrainingDivergedError("dqn: non-finite loss", episode_index);
    adam_step(agent.q_network, grads, agent.adam);
    stats.loss = loss;
    return stats;
}

double evaluate_policy(const DqnAgent& agent, const ToyConfig& env, int n_eval,
                       RandomSource& rng) {
    if (n_eval < 1) throw ConfigError("evaluate_policy: n_eval must be >= 1");
    long safe_count = 0;
    int counted = 0;
    while (counted < n_eval) {
        double wealth = env.initial_wealth;
        for (int t = 0; t < env.rounds_per_episode && counted < n_eval; ++t) {
            ToyAction action = greedy_action(agent, wealth);
            if (action == ToyAction::safe) ++safe_count;
            ++counted;
            wealth = toy_step(env, wealth, action, rng).next_wealth;
        }
    }
    return static_cast<double>(safe_count) / static_cast<double>(n_eval);
}

DqnTrainResult train_dqn_agent(const ToyConfig& env, const DqnHyperparams& hp,
                               std::uint64_t seed, long log_every) {
    if (hp.episodes < 1) throw ConfigError("dqn: episodes must be >= 1");
    DqnAgent agent = dqn_agent_init(env, hp, derive_seed(seed, 0x6e65, 0x74, 0));
    RandomSource rng(seed);

    DqnTrainResult result{std::move(agent), 0.0, {}};
    for (long e = 0; e < hp.episodes; ++e) {
        auto stats = train_episode(result.agent, env, e, rng);
        if (log_every > 0 && e % log_every == 0) {
            double snapshot = evaluate_policy(result.agent, env, 100, rng);
            result.log.push_back({e, stats.epsilon,
                                  stats.loss.value_or(std::nan("")), snapshot});
        }
    }
    result.pi_safe = evaluate_policy(result.agent, env, hp.eval_states, rng);
    return result;
}

}  // namespace ergolab
