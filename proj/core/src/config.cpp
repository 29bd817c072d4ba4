#include "ergolab/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ergolab/csv.hpp"
#include "ergolab/errors.hpp"

namespace ergolab {

SweepConfig profile_config(ExperimentKind kind, Profile profile) {
    SweepConfig config;
    config.kind = kind;
    config.base_seed = 1;
    switch (kind) {
        case ExperimentKind::toy_dqn:
            config.toy = ToyConfig{};
            config.dqn = DqnHyperparams{};
            if (profile == Profile::paper) {
                config.n_agents = 40;
                config.dqn.episodes = 10000;
                config.dqn.feature = WealthFeature::automatic;
                config.dqn.buffer_capacity = 1000;
            } else {
                config.n_agents = 10;
                config.dqn.episodes = 2000;
                // Raw wealth below ten rounds, log-wealth from ten up; with
                // twenty rounds raw wealth spans six decades and the Q-net
                // input saturates.
                config.dqn.feature = WealthFeature::automatic;
                // The Table-1 rate (0.8) needs the full 10^4-episode budget
                // to settle; at 2000 episodes a smaller step plus a buffer
                // that retains the exploration phase gives clean curves.
                config.dqn.learning_rate = 0.01;
                config.dqn.buffer_capacity = 1000;
            }
            break;
        case ExperimentKind::portfolio_ac:
            config.portfolio = PortfolioConfig{};
            config.ac = AcHyperparams{};
            // Five initial wealths: above any single-round advantage, far
            // below the compounding tails.
            config.ac.advantage_clip = 50.0;
            if (profile == Profile::paper) {
                config.n_agents = 20;
                config.ac.episodes = 100000;
            } else {
                config.n_agents = 8;
                config.ac.episodes = 20000;
            }
            break;
        case ExperimentKind::portfolio_full_policy:
            config.portfolio = PortfolioConfig{};
            config.ac = AcHyperparams{};
            config.ac.full_policy = true;
            // The joint task needs tighter advantages (per-p signals must
            // not drown each other), a permanent exploration floor, and far
            // more episodes than fixed-p training.
            config.ac.advantage_clip = 5.0;
            config.ac.concentration_cap = 6.0;
            config.ac.episodes = 3000000;
            if (profile == Profile::paper) {
                config.n_agents = 8;
            } else {
                config.n_agents = 4;
                config.m_values = {1, 5, 20};
            }
            break;
    }
    return config;
}

namespace {

class KeyValues {
public:
    explicit KeyValues(const std::string& origin) : origin_(origin) {}

    void insert(const std::string& key, const std::string& value, int line) {
        if (values_.count(key))
            fail(key, "duplicate key");
        values_[key] = value;
        lines_[key] = line;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    [[noreturn]] void fail(const std::string& key, const std::string& message) const {
        throw ConfigError(origin_ + ": key '" + key + "': " + message);
    }

    double get_double(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const std::string& raw = consume(key);
        try {
            std::size_t pos = 0;
            double v = std::stod(raw, &pos);
            if (pos != raw.size() || !std::isfinite(v)) fail(key, "malformed number '" + raw + "'");
            return v;
        } catch (const ConfigError&) {
            throw;
        } catch (...) {
            fail(key, "malformed number '" + raw + "'");
        }
    }

    long get_long(const std::string& key, long fallback) {
        if (!has(key)) return fallback;
        const std::string& raw = consume(key);
        try {
            std::size_t pos = 0;
            long v = std::stol(raw, &pos);
            if (pos != raw.size()) fail(key, "malformed integer '" + raw + "'");
            return v;
        } catch (const ConfigError&) {
            throw;
        } catch (...) {
            fail(key, "malformed integer '" + raw + "'");
        }
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const std::string& raw = consume(key);
        try {
            std::size_t pos = 0;
            std::uint64_t v = std::stoull(raw, &pos);
            if (pos != raw.size()) fail(key, "malformed integer '" + raw + "'");
            return v;
        } catch (const ConfigError&) {
            throw;
        } catch (...) {
            fail(key, "malformed integer '" + raw + "'");
        }
    }

    bool get_bool(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const std::string& raw = consume(key);
        if (raw == "true") return true;
        if (raw == "false") return false;
        fail(key, "expected true or false, got '" + raw + "'");
    }

    std::string get_string(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        return consume(key);
    }

    std::vector<double> get_double_list(const std::string& key,
                                        std::vector<double> fallback) {
        if (!has(key)) return fallback;
        const std::string raw = consume(key);
        std::vector<double> out;
        std::stringstream ss(raw);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t pos = 0;
                out.push_back(std::stod(item, &pos));
                if (pos != item.size()) fail(key, "malformed list entry '" + item + "'");
            } catch (const ConfigError&) {
                throw;
            } catch (...) {
                fail(key, "malformed list entry '" + item + "'");
            }
        }
        if (out.empty()) fail(key, "empty list");
        return out;
    }

    std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) {
        if (!has(key)) return fallback;
        const std::string raw = consume(key);
        std::vector<int> out;
        std::stringstream ss(raw);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t pos = 0;
                out.push_back(static_cast<int>(std::stol(item, &pos)));
                if (pos != item.size()) fail(key, "malformed list entry '" + item + "'");
            } catch (const ConfigError&) {
                throw;
            } catch (...) {
                fail(key, "malformed list entry '" + item + "'");
            }
        }
        if (out.empty()) fail(key, "empty list");
        return out;
    }

    void require_all_consumed() const {
        for (const auto& [key, value] : values_)
            if (!consumed_.count(key))
                throw ConfigError(origin_ + ": unknown key '" + key + "' (line " +
                                  std::to_string(lines_.at(key)) + ")");
    }

private:
    const std::string& consume(const std::string& key) {
        consumed_.insert(key);
        return values_.at(key);
    }

    std::string origin_;
    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
    std::set<std::string> consumed_;
};

std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

void check_range(const KeyValues& kv, const std::string& key, double value, double lo,
                 double hi) {
    if (!(value >= lo && value <= hi))
        kv.fail(key, "value " + format_double(value) + " outside [" + format_double(lo) +
                         "," + format_double(hi) + "]");
}

void check_positive(const KeyValues& kv, const std::string& key, double value) {
    if (!(value > 0.0)) kv.fail(key, "value must be positive");
}

}  // namespace

SweepConfig parse_config_text(std::string_view text, const std::string& origin) {
    KeyValues kv(origin);
    std::size_t start = 0;
    int line_no = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        std::string_view line = end == std::string_view::npos
                                    ? text.substr(start)
                                    : text.substr(start, end - start);
        start = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        std::string stripped = trim(line);
        if (stripped.empty()) continue;
        std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ": line " + std::to_string(line_no) +
                              ": expected 'key = value', got '" + stripped + "'");
        std::string key = trim(std::string_view(stripped).substr(0, eq));
        std::string value = trim(std::string_view(stripped).substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(origin + ": line " + std::to_string(line_no) +
                              ": empty key or value");
        kv.insert(key, value, line_no);
    }

    std::string kind_name = kv.get_string("experiment", "");
    SweepConfig config;
    if (kind_name == "toy-dqn")
        config.kind = ExperimentKind::toy_dqn;
    else if (kind_name == "portfolio-ac")
        config.kind = ExperimentKind::portfolio_ac;
    else if (kind_name == "portfolio-full-policy")
        config.kind = ExperimentKind::portfolio_full_policy;
    else if (kind_name.empty())
        throw ConfigError(origin + ": missing required key 'experiment'");
    else
        kv.fail("experiment", "unknown experiment '" + kind_name + "'");

    config.p_grid = kv.get_double_list("p_grid", default_p_grid());
    config.m_values = kv.get_int_list("m_values", {1, 2, 5, 10, 20});
    config.n_agents = static_cast<int>(kv.get_long("agents", 10));
    config.base_seed = kv.get_u64("base_seed", 1);
    config.workers = static_cast<int>(kv.get_long("workers", 0));
    if (kv.has("p")) {
        double p = kv.get_double("p", 0.0);
        check_range(kv, "p", p, 0.0, 1.0);
        config.fixed_p = p;
    }

    if (config.kind == ExperimentKind::toy_dqn) {
        ToyConfig& toy = config.toy;
        toy.r1 = kv.get_double("r1", toy.r1);
        check_positive(kv, "r1", toy.r1);
        toy.r2 = kv.get_double("r2", toy.r2);
        toy.r_safe = kv.get_double("r_safe", toy.r_safe);
        toy.initial_wealth = kv.get_double("initial_wealth", toy.initial_wealth);
        std::string mode = kv.get_string("reward_mode", "increment");
        if (mode == "increment")
            toy.reward_mode = ToyRewardMode::wealth_increment;
        else if (mode == "factor")
            toy.reward_mode = ToyRewardMode::raw_factor;
        else
            kv.fail("reward_mode", "expected increment or factor, got '" + mode + "'");

        DqnHyperparams& dqn = config.dqn;
        dqn.episodes = kv.get_long("episodes", dqn.episodes);
        dqn.gamma = kv.get_double("gamma", dqn.gamma);
        check_range(kv, "gamma", dqn.gamma, 0.0, 1.0);
        dqn.learning_rate = kv.get_double("learning_rate", dqn.learning_rate);
        check_positive(kv, "learning_rate", dqn.learning_rate);
        dqn.batch_size = static_cast<int>(kv.get_long("batch_size", dqn.batch_size));
        dqn.buffer_capacity =
            static_cast<int>(kv.get_long("buffer_capacity", dqn.buffer_capacity));
        dqn.hidden_width = static_cast<int>(kv.get_long("hidden_width", dqn.hidden_width));
        dqn.epsilon.initial = kv.get_double("epsilon_initial", dqn.epsilon.initial);
        dqn.epsilon.decay_rate = kv.get_double("epsilon_decay", dqn.epsilon.decay_rate);
        check_range(kv, "epsilon_decay", dqn.epsilon.decay_rate, 0.0, 1.0);
        dqn.epsilon.floor = kv.get_double("epsilon_floor", dqn.epsilon.floor);
        dqn.eval_states = static_cast<int>(kv.get_long("eval_states", dqn.eval_states));
        std::string feature = kv.get_string("state_feature", "");
        if (feature == "wealth")
            dqn.feature = WealthFeature::raw;
        else if (feature == "log-wealth")
            dqn.feature = WealthFeature::log;
        else if (feature == "auto")
            dqn.feature = WealthFeature::automatic;
        else if (!feature.empty())
            kv.fail("state_feature", "expected wealth, log-wealth or auto, got '" +
                                         feature + "'");
        std::string horizon = kv.get_string("horizon", "");
        if (horizon == "episodic")
            dqn.horizon = HorizonMode::episodic;
        else if (horizon == "continuing")
            dqn.horizon = HorizonMode::continuing;
        else if (!horizon.empty())
            kv.fail("horizon", "expected episodic or continuing, got '" + horizon + "'");
    } else {
        PortfolioConfig& pf = config.portfolio;
        pf.r_win = kv.get_double("r_win", pf.r_win);
        pf.r_loss = kv.get_double("r_loss", pf.r_loss);
        pf.initial_wealth = kv.get_double("initial_wealth", pf.initial_wealth);

        AcHyperparams& ac = config.ac;
        ac.full_policy = config.kind == ExperimentKind::portfolio_full_policy;
        ac.episodes = kv.get_long("episodes", ac.episodes);
        ac.actor_lr = kv.get_double("actor_lr", ac.actor_lr);
        check_positive(kv, "actor_lr", ac.actor_lr);
        ac.critic_lr = kv.get_double("critic_lr", ac.critic_lr);
        check_positive(kv, "critic_lr", ac.critic_lr);
        ac.actor_hidden = static_cast<int>(kv.get_long("actor_hidden", ac.actor_hidden));
        ac.critic_hidden =
            static_cast<int>(kv.get_long("critic_hidden", ac.critic_hidden));
        ac.normalize_returns = kv.get_bool("normalize_returns", ac.normalize_returns);
        ac.advantage_clip = kv.get_double("advantage_clip", ac.advantage_clip);
        if (ac.advantage_clip < 0.0) kv.fail("advantage_clip", "must be non-negative");
        ac.concentration_cap = kv.get_double("concentration_cap", ac.concentration_cap);
        if (ac.concentration_cap < 0.0)
            kv.fail("concentration_cap", "must be non-negative");
    }

    kv.require_all_consumed();
    try {
        config.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return config;
}

SweepConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path);
}

std::string config_to_text(const SweepConfig& config) {
    std::ostringstream out;
    out << "experiment = " << experiment_name(config.kind) << '\n';
    out << "p_grid = ";
    for (std::size_t i = 0; i < config.p_grid.size(); ++i)
        out << (i ? "," : "") << format_double(config.p_grid[i]);
    out << '\n' << "m_values = ";
    for (std::size_t i = 0; i < config.m_values.size(); ++i)
        out << (i ? "," : "") << config.m_values[i];
    out << '\n';
    out << "agents = " << config.n_agents << '\n';
    out << "base_seed = " << config.base_seed << '\n';
    if (config.workers != 0) out << "workers = " << config.workers << '\n';
    if (config.fixed_p) out << "p = " << format_double(*config.fixed_p) << '\n';

    if (config.kind == ExperimentKind::toy_dqn) {
        const ToyConfig& toy = config.toy;
        const DqnHyperparams& dqn = config.dqn;
        out << "r1 = " << format_double(toy.r1) << '\n';
        out << "r2 = " << format_double(toy.r2) << '\n';
        out << "r_safe = " << format_double(toy.r_safe) << '\n';
        out << "initial_wealth = " << format_double(toy.initial_wealth) << '\n';
        out << "reward_mode = "
            << (toy.reward_mode == ToyRewardMode::wealth_increment ? "increment"
                                                                   : "factor")
            << '\n';
        out << "episodes = " << dqn.episodes << '\n';
        out << "gamma = " << format_double(dqn.gamma) << '\n';
        out << "learning_rate = " << format_double(dqn.learning_rate) << '\n';
        out << "batch_size = " << dqn.batch_size << '\n';
        if (dqn.buffer_capacity > 0)
            out << "buffer_capacity = " << dqn.buffer_capacity << '\n';
        out << "hidden_width = " << dqn.hidden_width << '\n';
        out << "epsilon_initial = " << format_double(dqn.epsilon.initial) << '\n';
        out << "epsilon_decay = " << format_double(dqn.epsilon.decay_rate) << '\n';
        out << "epsilon_floor = " << format_double(dqn.epsilon.floor) << '\n';
        out << "eval_states = " << dqn.eval_states << '\n';
        out << "state_feature = "
            << (dqn.feature == WealthFeature::raw
                    ? "wealth"
                    : dqn.feature == WealthFeature::log ? "log-wealth" : "auto")
            << '\n';
        out << "horizon = "
            << (dqn.horizon == HorizonMode::episodic ? "episodic" : "continuing") << '\n';
    } else {
        const PortfolioConfig& pf = config.portfolio;
        const AcHyperparams& ac = config.ac;
        out << "r_win = " << format_double(pf.r_win) << '\n';
        out << "r_loss = " << format_double(pf.r_loss) << '\n';
        out << "initial_wealth = " << format_double(pf.initial_wealth) << '\n';
        out << "episodes = " << ac.episodes << '\n';
        out << "actor_lr = " << format_double(ac.actor_lr) << '\n';
        out << "critic_lr = " << format_double(ac.critic_lr) << '\n';
        out << "actor_hidden = " << ac.actor_hidden << '\n';
        out << "critic_hidden = " << ac.critic_hidden << '\n';
        out << "normalize_returns = " << (ac.normalize_returns ? "true" : "false")
            << '\n';
        out << "advantage_clip = " << format_double(ac.advantage_clip) << '\n';
        out << "concentration_cap = " << format_double(ac.concentration_cap) << '\n';
    }
    return out.str();
}

}  // namespace ergolab
