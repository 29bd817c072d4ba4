#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ergolab/actor_critic.hpp"
#include "ergolab/dqn.hpp"
#include "ergolab/environments.hpp"
#include "ergolab/theory.hpp"

namespace ergolab {

enum class ExperimentKind { toy_dqn, portfolio_ac, portfolio_full_policy };

std::string experiment_name(ExperimentKind kind);

/// Default 21-point probability grid {0.00, 0.05, ..., 1.00}.
std::vector<double> default_p_grid();

struct SweepConfig {
    ExperimentKind kind = ExperimentKind::toy_dqn;
    std::vector<double> p_grid = default_p_grid();
    std::vector<int> m_values = {1, 2, 5, 10, 20};
    int n_agents = 10;
    ToyConfig toy;
    PortfolioConfig portfolio;
    DqnHyperparams dqn;
    AcHyperparams ac;
    std::uint64_t base_seed = 1;
    int workers = 0;                 // 0 -> hardware concurrency
    std::optional<double> fixed_p;   // single-cell runs (train/diagnose commands)

    void validate() const;
};

/// Raw per-agent policy outputs for one (p, M) cell plus their spread.
/// Diverged agents keep a NaN slot so every cell holds exactly N entries;
/// aggregates cover the converged ones only. A cell with more than 20%
/// divergence is marked incomplete.
struct CellAggregate {
    std::vector<double> agent_values;
    int n_converged = 0;
    int n_diverged = 0;
    double mean = 0.0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    bool complete = true;
};

struct SweepResult {
    SweepConfig config;
    std::vector<std::vector<CellAggregate>> cells;  // [m_index][p_index]

    PolicyCurve mean_curve(std::size_t m_index) const;
    PolicyCurve median_curve(std::size_t m_index) const;  // carries the IQR band
};

/// Linear-interpolation quantile of an ascending sample.
double quantile_sorted(std::span<const double> sorted, double q);

SweepResult run_toy_sweep(const SweepConfig& config);
SweepResult run_portfolio_sweep(const SweepConfig& config);

/// Trains N agents that generalise over p (resampled each episode) and
/// evaluates each on the full grid.
SweepResult run_full_policy_experiment(const SweepConfig& config);

struct IndifferenceEntry {
    int m;
    SigmoidParams params{0.0, 0.0};
    double residual = 0.0;
    double dist_to_p_e = 0.0;
    double dist_to_p_t = 0.0;
    bool valid = false;
    std::string error;  // set when the fit degenerated
};

struct IndifferenceResult {
    double p_e;
    double p_t;
    std::vector<IndifferenceEntry> per_m;
};

/// Sigmoid fit per M on the mean learned curve, with distances to both
/// theoretical predictions.
IndifferenceResult extract_indifference(const SweepResult& result, double p_e,
                                        double p_t);

struct MseEntry {
    int m;
    double mse_ev;
    double mse_kelly;
};

struct MseReport {
    std::vector<MseEntry> per_m;
};

/// MSE of the median learned curve against both theoretical curves.
MseReport compute_mse_report(const SweepResult& result, const PolicyCurve& ev_curve,
                             const PolicyCurve& optimal_curve);

// Report writers. Columns are fixed contracts; floats use 12 significant
// digits so identical runs serialise to identical bytes.

/// policy_curve.csv: experiment,M,p,mean,median,q25,q75,n_converged
void write_policy_curve_csv(std::ostream& out, const SweepResult& result);

/// Theoretical curves exported in the same schema (single-valued rows).
void write_theory_curve_csv(std::ostream& out, const std::string& experiment,
                            const PolicyCurve& curve);

/// indifference.csv: M,k,p0,residual,p_E,p_T
void write_indifference_csv(std::ostream& out, const IndifferenceResult& result);

/// mse_report.csv: M,mse_ev,mse_kelly
void write_mse_csv(std::ostream& out, const MseReport& report);

}  // namespace ergolab
