#include "ergolab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <ostream>
#include <thread>

#include "ergolab/csv.hpp"
#include "ergolab/errors.hpp"

namespace ergolab {

std::string experiment_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::toy_dqn: return "toy-dqn";
        case ExperimentKind::portfolio_ac: return "portfolio-ac";
        case ExperimentKind::portfolio_full_policy: return "portfolio-full-policy";
    }
    return "unknown";
}

std::vector<double> default_p_grid() {
    std::vector<double> grid;
    grid.reserve(21);
    for (int i = 0; i <= 20; ++i) grid.push_back(static_cast<double>(i) / 20.0);
    return grid;
}

void SweepConfig::validate() const {
    if (p_grid.empty()) throw ConfigError("sweep: p_grid must not be empty");
    for (double p : p_grid)
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("sweep: p_grid value outside [0,1]");
    for (std::size_t i = 1; i < p_grid.size(); ++i)
        if (!(p_grid[i] > p_grid[i - 1]))
            throw ConfigError("sweep: p_grid must be strictly increasing");
    if (m_values.empty()) throw ConfigError("sweep: m_values must not be empty");
    for (int m : m_values)
        if (m < 1) throw ConfigError("sweep: m_values must be positive");
    if (n_agents < 1) throw ConfigError("sweep: agents must be >= 1");
    if (kind == ExperimentKind::toy_dqn) {
        ToyConfig t = toy;
        t.p = 0.0;
        t.validate();
    } else {
        PortfolioConfig c = portfolio;
        c.p = 0.0;
        c.validate();
    }
    if (fixed_p && !(*fixed_p >= 0.0 && *fixed_p <= 1.0))
        throw ConfigError("sweep: p outside [0,1]");
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) return std::nan("");
    if (sorted.size() == 1) return sorted[0];
    double pos = q * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

namespace {

void finalize_cell(CellAggregate& cell) {
    std::vector<double> converged;
    converged.reserve(cell.agent_values.size());
    for (double v : cell.agent_values)
        if (std::isfinite(v)) converged.push_back(v);
    std::sort(converged.begin(), converged.end());
    cell.n_converged = static_cast<int>(converged.size());
    cell.n_diverged = static_cast<int>(cell.agent_values.size()) - cell.n_converged;
    if (converged.empty()) {
        cell.mean = cell.median = cell.q25 = cell.q75 = std::nan("");
    } else {
        double sum = 0.0;
        for (double v : converged) sum += v;
        cell.mean = sum / static_cast<double>(converged.size());
        cell.median = quantile_sorted(converged, 0.5);
        cell.q25 = quantile_sorted(converged, 0.25);
        cell.q75 = quantile_sorted(converged, 0.75);
    }
    cell.complete = cell.n_diverged * 5 <= static_cast<int>(cell.agent_values.size());
}

/// Runs tasks 0..n_tasks-1 on a bounded pool. Results must be written to
/// pre-assigned slots; the merge order is index order by construction, so
/// scheduling cannot influence the output.
void parallel_for(std::size_t n_tasks, int workers,
                  const std::function<void(std::size_t)>& task) {
    unsigned pool = workers > 0 ? static_cast<unsigned>(workers)
                                : std::max(1u, std::thread::hardware_concurrency());
    pool = std::min<unsigned>(pool, n_tasks == 0 ? 1 : static_cast<unsigned>(n_tasks));
    if (pool <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n_tasks) return;
            try {
                task(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (unsigned t = 0; t < pool; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

SweepResult make_empty_result(const SweepConfig& config) {
    SweepResult result;
    result.config = config;
    result.cells.assign(config.m_values.size(), {});
    for (auto& row : result.cells) {
        row.assign(config.p_grid.size(), {});
        for (auto& cell : row)
            cell.agent_values.assign(static_cast<std::size_t>(config.n_agents),
                                     std::nan(""));
    }
    return result;
}

void finalize_result(SweepResult& result) {
    for (auto& row : result.cells)
        for (auto& cell : row) finalize_cell(cell);
}

}  // namespace

PolicyCurve SweepResult::mean_curve(std::size_t m_index) const {
    PolicyCurve curve;
    curve.grid = config.p_grid;
    curve.values.reserve(curve.grid.size());
    for (const auto& cell : cells.at(m_index)) curve.values.push_back(cell.mean);
    return curve;
}

PolicyCurve SweepResult::median_curve(std::size_t m_index) const {
    PolicyCurve curve;
    curve.grid = config.p_grid;
    for (const auto& cell : cells.at(m_index)) {
        curve.values.push_back(cell.median);
        curve.band_low.push_back(cell.q25);
        curve.band_high.push_back(cell.q75);
    }
    return curve;
}

SweepResult run_toy_sweep(const SweepConfig& config) {
    if (config.kind != ExperimentKind::toy_dqn)
        throw ConfigError("run_toy_sweep: config kind is not toy-dqn");
    config.validate();

    SweepResult result = make_empty_result(config);
    const std::size_t n_p = config.p_grid.size();
    const std::size_t n_agents = static_cast<std::size_t>(config.n_agents);
    const std::size_t n_tasks = config.m_values.size() * n_p * n_agents;

    parallel_for(n_tasks, config.workers, [&](std::size_t task) {
        std::size_t agent = task % n_agents;
        std::size_t p_idx = (task / n_agents) % n_p;
        std::size_t m_idx = task / (n_agents * n_p);
        ToyConfig env = config.toy;
        env.p = config.p_grid[p_idx];
        env.rounds_per_episode = config.m_values[m_idx];
        std::uint64_t seed = derive_seed(config.base_seed, p_idx, m_idx, agent);
        try {
            result.cells[m_idx][p_idx].agent_values[agent] =
                train_dqn_agent(env, config.dqn, seed).pi_safe;
        } catch (const TrainingDivergedError&) {
            // leave the NaN slot; the cell aggregate counts it
        }
    });

    finalize_result(result);
    return result;
}

SweepResult run_portfolio_sweep(const SweepConfig& config) {
    if (config.kind != ExperimentKind::portfolio_ac)
        throw ConfigError("run_portfolio_sweep: config kind is not portfolio-ac");
    config.validate();

    SweepResult result = make_empty_result(config);
    const std::size_t n_p = config.p_grid.size();
    const std::size_t n_agents = static_cast<std::size_t>(config.n_agents);
    const std::size_t n_tasks = config.m_values.size() * n_p * n_agents;

    parallel_for(n_tasks, config.workers, [&](std::size_t task) {
        std::size_t agent = task % n_agents;
        std::size_t p_idx = (task / n_agents) % n_p;
        std::size_t m_idx = task / (n_agents * n_p);
        PortfolioConfig env = config.portfolio;
        env.p = config.p_grid[p_idx];
        env.rounds_per_episode = config.m_values[m_idx];
        std::uint64_t seed = derive_seed(config.base_seed, p_idx, m_idx, agent);
        try {
            result.cells[m_idx][p_idx].agent_values[agent] =
                train_ac_agent(env, config.ac, seed).fraction;
        } catch (const TrainingDivergedError&) {
        }
    });

    finalize_result(result);
    return result;
}

SweepResult run_full_policy_experiment(const SweepConfig& config) {
    if (config.kind != ExperimentKind::portfolio_full_policy)
        throw ConfigError("run_full_policy_experiment: config kind is not portfolio-full-policy");
    config.validate();

    SweepResult result = make_empty_result(config);
    const std::size_t n_agents = static_cast<std::size_t>(config.n_agents);
    const std::size_t n_tasks = config.m_values.size() * n_agents;

    parallel_for(n_tasks, config.workers, [&](std::size_t task) {
        std::size_t agent = task % n_agents;
        std::size_t m_idx = task / n_agents;
        PortfolioConfig env = config.portfolio;
        env.rounds_per_episode = config.m_values[m_idx];
        std::uint64_t seed = derive_seed(config.base_seed, 0, m_idx, agent);
        try {
            AcTrainResult trained = train_full_policy_agent(env, config.ac, seed);
            for (std::size_t p_idx = 0; p_idx < config.p_grid.size(); ++p_idx) {
                double f = deterministic_fraction(
                    trained.agent.actor, trained.agent.features(config.p_grid[p_idx]));
                result.cells[m_idx][p_idx].agent_values[agent] = f;
            }
        } catch (const TrainingDivergedError&) {
        }
    });

    finalize_result(result);
    return result;
}

IndifferenceResult extract_indifference(const SweepResult& result, double p_e,
                                        double p_t) {
    if (result.config.p_grid.size() < 4)
        throw ConfigError("extract_indifference: need at least 4 grid points");
    IndifferenceResult out{p_e, p_t, {}};
    for (std::size_t m_idx = 0; m_idx < result.config.m_values.size(); ++m_idx) {
        IndifferenceEntry entry;
        entry.m = result.config.m_values[m_idx];
        try {
            SigmoidFit fit = sigmoid_fit(result.mean_curve(m_idx));
            entry.params = fit.params;
            entry.residual = fit.residual;
            entry.dist_to_p_e = std::abs(fit.params.midpoint - p_e);
            entry.dist_to_p_t = std::abs(fit.params.midpoint - p_t);
            entry.valid = true;
        } catch (const FitError& e) {
            entry.error = e.what();
        }
        out.per_m.push_back(entry);
    }
    return out;
}

MseReport compute_mse_report(const SweepResult& result, const PolicyCurve& ev_curve,
                             const PolicyCurve& optimal_curve) {
    MseReport report;
    for (std::size_t m_idx = 0; m_idx < result.config.m_values.size(); ++m_idx) {
        PolicyCurve learned = result.median_curve(m_idx);
        learned.band_low.clear();
        learned.band_high.clear();
        report.per_m.push_back({result.config.m_values[m_idx],
                                policy_mse(learned, ev_curve),
                                policy_mse(learned, optimal_curve)});
    }
    return report;
}

void write_policy_curve_csv(std::ostream& out, const SweepResult& result) {
    out << "experiment,M,p,mean,median,q25,q75,n_converged\n";
    const std::string name = experiment_name(result.config.kind);
    for (std::size_t m_idx = 0; m_idx < result.config.m_values.size(); ++m_idx) {
        for (std::size_t p_idx = 0; p_idx < result.config.p_grid.size(); ++p_idx) {
            const auto& cell = result.cells[m_idx][p_idx];
            out << name << ',' << result.config.m_values[m_idx] << ','
                << format_double(result.config.p_grid[p_idx]) << ','
                << format_double(cell.mean) << ',' << format_double(cell.median) << ','
                << format_double(cell.q25) << ',' << format_double(cell.q75) << ','
                << cell.n_converged << '\n';
        }
    }
}

void write_theory_curve_csv(std::ostream& out, const std::string& experiment,
                            const PolicyCurve& curve) {
    out << "experiment,M,p,mean,median,q25,q75,n_converged\n";
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        const std::string v = format_double(curve.values[i]);
        out << experiment << ",0," << format_double(curve.grid[i]) << ',' << v << ','
            << v << ',' << v << ',' << v << ",0\n";
    }
}

void write_indifference_csv(std::ostream& out, const IndifferenceResult& result) {
    out << "M,k,p0,residual,p_E,p_T\n";
    for (const auto& entry : result.per_m) {
        if (!entry.valid) continue;
        out << entry.m << ',' << format_double(entry.params.steepness) << ','
            << format_double(entry.params.midpoint) << ','
            << format_double(entry.residual) << ',' << format_double(result.p_e) << ','
            << format_double(result.p_t) << '\n';
    }
}

void write_mse_csv(std::ostream& out, const MseReport& report) {
    out << "M,mse_ev,mse_kelly\n";
    for (const auto& entry : report.per_m)
        out << entry.m << ',' << format_double(entry.mse_ev) << ','
            << format_double(entry.mse_kelly) << '\n';
}

}  // namespace ergolab
