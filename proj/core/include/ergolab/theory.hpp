#pragma once

#include <span>
#include <vector>

#include "ergolab/environments.hpp"

namespace ergolab {

/// Logistic policy model sigma(p) = 1 / (1 + exp(-k (p - p0))).
struct SigmoidParams {
    double steepness;  // k
    double midpoint;   // p0, the indifference point
};

/// A policy as a function over the probability grid: the probability of
/// choosing Safe (toy) or the invested fraction f (portfolio). Optional
/// band vectors carry an interquartile spread for plotting.
struct PolicyCurve {
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<double> band_low;   // optional, empty when absent
    std::vector<double> band_high;  // optional
};

/// Indifference point of an expected-value optimiser in the toy model:
/// p_E = (r_safe - r2) / (r1 - r2).
double indifference_expected_toy(double r1, double r2, double r_safe);

/// Indifference point of a time-growth optimiser in the toy model:
/// p_T = (ln r_safe - ln r2) / (ln r1 - ln r2).
double indifference_time_toy(double r1, double r2, double r_safe);

/// Expected logarithmic growth per round at investment fraction f:
/// g(f) = p ln(1 + f (r_win - 1)) + (1 - p) ln(1 + f (r_loss - 1)).
double kelly_objective(double fraction, double p, double r_win, double r_loss);

struct KellyFraction {
    double unclamped;
    double clamped;  // into [0,1], the playable action
};

/// Stationary point of the growth objective,
/// f* = (p (r_win - r_loss) + r_loss - 1) / ((r_win - 1)(1 - r_loss)),
/// reported both raw and clamped to the action space.
KellyFraction kelly_fraction(double p, double r_win, double r_loss);

/// Win probability above which the expected return exceeds 1 and an
/// expected-value optimiser goes all-in: p_E = (1 - r_loss) / (r_win - r_loss).
double ev_threshold_portfolio(double r_win, double r_loss);

double sigmoid_eval(const SigmoidParams& params, double p);

struct SigmoidFit {
    SigmoidParams params;
    double residual;  // sum of squared residuals
};

/// Least-squares fit of the sigmoid model: coarse grid search over
/// (k log-spaced in [1, 200], p0 over the grid hull) followed by
/// Gauss-Newton refinement, capped at 100 iterations with step tolerance
/// 1e-10. Deterministic for given data; data order does not matter.
SigmoidFit sigmoid_fit(const PolicyCurve& curve);

/// Mean squared difference over identical grids.
double policy_mse(const PolicyCurve& a, const PolicyCurve& b);

enum class TheoreticalPolicyKind {
    expected_value_toy,
    time_growth_toy,
    expected_value_portfolio,
    kelly_portfolio,
};

/// Toy reference curves: hard steps at the respective indifference point
/// (0 before, 1 after, 0.5 at the point itself).
PolicyCurve theoretical_curve(TheoreticalPolicyKind kind, const ToyConfig& config,
                              std::span<const double> grid);

/// Portfolio reference curves: the all-or-nothing step at p_E (f = 1 for
/// p >= p_E) or the clamped Kelly fraction.
PolicyCurve theoretical_curve(TheoreticalPolicyKind kind, const PortfolioConfig& config,
                              std::span<const double> grid);

}  // namespace ergolab
