#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "ergolab/environments.hpp"
#include "ergolab/mlp.hpp"

namespace ergolab {

/// Exponentially decaying exploration rate, applied once per episode:
/// eps(e) = max(floor, initial * decay_rate^e).
struct EpsilonSchedule {
    double initial = 1.0;
    double decay_rate = 0.995;
    double floor = 0.05;

    double at_episode(long episode) const;
};

enum class WealthFeature {
    raw,         // state is the wealth itself
    log,         // state is ln(wealth); steadier when wealth spans decades
    automatic,   // raw for M < 10, log for M >= 10
};

enum class HorizonMode {
    episodic,    // the episode-final transition does not bootstrap (y = r)
    continuing,  // every target bootstraps: y = r + gamma max Q(s')
};

struct DqnHyperparams {
    int hidden_width = 16;
    double learning_rate = 0.8;
    double gamma = 0.9;
    int batch_size = 2;
    int buffer_capacity = 0;  // 0 -> 10 * M * batch_size
    long episodes = 10000;
    EpsilonSchedule epsilon;
    WealthFeature feature = WealthFeature::raw;
    // Episodic by default: the environment resets after M rounds, and
    // bootstrapping through that reset lets Q-values feed on their own
    // extrapolation (they grow without bound and can lock in arbitrary
    // action preferences). The continuing mode keeps the unmasked target
    // available for comparison.
    HorizonMode horizon = HorizonMode::episodic;
    int eval_states = 200;  // greedy states sampled by the final evaluation
};

/// A stored transition plus its position marker: whether it closed an
/// episode (the wealth resets afterwards, so episodic targets stop there).
struct StoredTransition {
    Transition transition;
    bool episode_end = false;
};

/// Bounded FIFO store of transitions.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void push(const Transition& t, bool episode_end = false);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }

    /// Uniform sample without replacement; count must not exceed size().
    std::vector<StoredTransition> sample(std::size_t count, RandomSource& rng) const;

private:
    std::size_t capacity_;
    std::deque<StoredTransition> items_;
};

/// Q-learner over the two toy actions. Output 0 is Q(s, Safe), output 1 is
/// Q(s, Risky); ties break to Safe so greedy evaluation is deterministic.
/// A single network serves both prediction and target.
struct DqnAgent {
    Mlp q_network;
    AdamState adam;
    double gamma = 0.9;
    EpsilonSchedule epsilon_schedule;
    ReplayBuffer buffer{1};
    int batch_size = 2;
    bool log_feature = false;
    HorizonMode horizon = HorizonMode::episodic;

    double feature(double wealth) const;
};

DqnAgent dqn_agent_init(const ToyConfig& env, const DqnHyperparams& hp, std::uint64_t seed);

ToyAction select_action(const DqnAgent& agent, double wealth, double epsilon,
                        RandomSource& rng);

/// y_i = r_i + gamma * max_a' Q(s'_i, a'), evaluated with the current
/// network and treated as constants by the update.
std::vector<double> bellman_targets(const DqnAgent& agent,
                                    std::span<const Transition> batch);

struct DqnEpisodeStats {
    double epsilon;
    double final_wealth;
    std::optional<double> loss;  // absent when the buffer was still short
};

/// One episode of Algorithm-style training: M rounds of epsilon-greedy
/// interaction, then a single mini-batch Smooth-L1 update guarded by
/// buffer size >= batch size.
DqnEpisodeStats train_episode(DqnAgent& agent, const ToyConfig& env, long episode_index,
                              RandomSource& rng);

/// Fraction of greedy Safe choices over n_eval states visited along
/// greedy rollouts of length M.
double evaluate_policy(const DqnAgent& agent, const ToyConfig& env, int n_eval,
                       RandomSource& rng);

struct DqnEpisodeLogRow {
    long episode;
    double epsilon;
    double loss;     // NaN when no update happened
    double pi_safe;  // snapshot evaluation
};

struct DqnTrainResult {
    DqnAgent agent;
    double pi_safe;
    std::vector<DqnEpisodeLogRow> log;  // filled only when log_every > 0
};

/// Full training run followed by greedy evaluation. Throws
/// TrainingDivergedError if the loss or parameters go non-finite.
DqnTrainResult train_dqn_agent(const ToyConfig& env, const DqnHyperparams& hp,
                               std::uint64_t seed, long log_every = 0);

}  // namespace ergolab
