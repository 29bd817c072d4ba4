#include "ergolab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ergolab/errors.hpp"

namespace ergolab {

double indifference_expected_toy(double r1, double r2, double r_safe) {
    if (r1 == r2) throw ConfigError("indifference point: r1 == r2 is degenerate");
    return (r_safe - r2) / (r1 - r2);
}

double indifference_time_toy(double r1, double r2, double r_safe) {
    if (!(r1 > 0.0 && r2 > 0.0 && r_safe > 0.0))
        throw ConfigError("indifference point: factors must be positive");
    if (r1 == r2) throw ConfigError("indifference point: r1 == r2 is degenerate");
    return (std::log(r_safe) - std::log(r2)) / (std::log(r1) - std::log(r2));
}

double kelly_objective(double fraction, double p, double r_win, double r_loss) {
    double win_arg = 1.0 + fraction * (r_win - 1.0);
    double loss_arg = 1.0 + fraction * (r_loss - 1.0);
    if (!(win_arg > 0.0 && loss_arg > 0.0))
        throw DomainError("kelly_objective: log argument not positive");
    return p * std::log(win_arg) + (1.0 - p) * std::log(loss_arg);
}

KellyFraction kelly_fraction(double p, double r_win, double r_loss) {
    if (!(r_win > 1.0) || !(r_loss > 0.0 && r_loss < 1.0))
        throw ConfigError("kelly_fraction: need r_win > 1 > r_loss > 0");
    double raw = (p * (r_win - r_loss) + r_loss - 1.0) / ((r_win - 1.0) * (1.0 - r_loss));
    return {raw, std::clamp(raw, 0.0, 1.0)};
}

double ev_threshold_portfolio(double r_win, double r_loss) {
    if (r_win == r_loss) throw ConfigError("ev_threshold: r_win == r_loss is degenerate");
    return (1.0 - r_loss) / (r_win - r_loss);
}

double sigmoid_eval(const SigmoidParams& params, double p) {
    double x = params.steepness * (p - params.midpoint);
    // Split on sign so exp never overflows.
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

double sigmoid_sse(const SigmoidParams& params, const std::vector<double>& ps,
                   const std::vector<double>& ys) {
    double sse = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        double r = sigmoid_eval(params, ps[i]) - ys[i];
        sse += r * r;
    }
    return sse;
}

}  // namespace

SigmoidFit sigmoid_fit(const PolicyCurve& curve) {
    if (curve.grid.size() != curve.values.size())
        throw ShapeError("sigmoid_fit: grid/values length mismatch");
    if (curve.grid.size() < 4)
        throw ConfigError("sigmoid_fit: need at least 4 grid points");
    for (double v : curve.values)
        if (!(v >= 0.0 && v <= 1.0))
            throw DomainError("sigmoid_fit: values must lie in [0,1]");

    // Canonical ascending order so the fit is independent of data order.
    std::vector<std::size_t> order(curve.grid.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return curve.grid[a] < curve.grid[b]; });
    std::vector<double> ps, ys;
    ps.reserve(order.size());
    ys.reserve(order.size());
    for (std::size_t i : order) {
        ps.push_back(curve.grid[i]);
        ys.push_back(curve.values[i]);
    }

    auto [lo, hi] = std::minmax_element(ys.begin(), ys.end());
    if (*hi - *lo < 1e-12)
        throw FitError("sigmoid_fit: constant curve, steepness unidentifiable");

    // Coarse global search over k (log-spaced) and p0 (grid hull).
    const int k_steps = 41, p0_steps = 201;
    const double k_lo = 1.0, k_hi = 200.0;
    SigmoidParams best{k_lo, ps.front()};
    double best_sse = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k_steps; ++i) {
        double k = k_lo * std::pow(k_hi / k_lo, static_cast<double>(i) / (k_steps - 1));
        for (int j = 0; j < p0_steps; ++j) {
            double p0 = ps.front() +
                        (ps.back() - ps.front()) * static_cast<double>(j) / (p0_steps - 1);
            SigmoidParams cand{k, p0};
            double sse = sigmoid_sse(cand, ps, ys);
            if (sse < best_sse) {
                best_sse = sse;
                best = cand;
            }
        }
    }

    // Gauss-Newton refinement with step halving.
    for (int iter = 0; iter < 100; ++iter) {
        double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0, jtr0 = 0.0, jtr1 = 0.0;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            double s = sigmoid_eval(best, ps[i]);
            double r = s - ys[i];
            double slope = s * (1.0 - s);
            double jk = slope * (ps[i] - best.midpoint);
            double jp = -best.steepness * slope;
            jtj00 += jk * jk;
            jtj01 += jk * jp;
            jtj11 += jp * jp;
            jtr0 += jk * r;
            jtr1 += jp * r;
        }
        double det = jtj00 * jtj11 - jtj01 * jtj01;
        if (!(std::abs(det) > 1e-300)) break;  // flat Jacobian, nothing to refine
        double dk = (-jtr0 * jtj11 + jtr1 * jtj01) / det;
        double dp = (-jtr1 * jtj00 + jtr0 * jtj01) / det;

        double scale = 1.0;
        bool improved = false;
        for (int halving = 0; halving < 25; ++halving) {
            SigmoidParams cand{best.steepness + scale * dk, best.midpoint + scale * dp};
            if (cand.steepness > 0.0) {
                double sse = sigmoid_sse(cand, ps, ys);
                if (sse <= best_sse) {
                    best = cand;
                    best_sse = sse;
                    improved = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if (!improved) break;
        if (std::hypot(scale * dk, scale * dp) < 1e-10) break;
    }

    return {best, best_sse};
}

double policy_mse(const PolicyCurve& a, const PolicyCurve& b) {
    if (a.grid.size() != b.grid.size())
        throw ShapeError("policy_mse: grids differ in length");
    for (std::size_t i = 0; i < a.grid.size(); ++i)
        if (a.grid[i] != b.grid[i]) throw ShapeError("policy_mse: grids differ");
    if (a.grid.empty()) throw ShapeError("policy_mse: empty grid");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        double d = a.values[i] - b.values[i];
        sum += d * d;
    }
    return sum / static_cast<double>(a.values.size());
}

namespace {

PolicyCurve step_curve(std::span<const double> grid, double threshold,
                       double below, double above, double at) {
    PolicyCurve curve;
    curve.grid.assign(grid.begin(), grid.end());
    curve.values.reserve(grid.size());
    for (double p : grid) {
        if (p < threshold)
            curve.values.push_back(below);
        else if (p > threshold)
            curve.values.push_back(above);
        else
            curve.values.push_back(at);
    }
    return curve;
}

}  // namespace

PolicyCurve theoretical_curve(TheoreticalPolicyKind kind, const ToyConfig& config,
                              std::span<const double> grid) {
    switch (kind) {
        case TheoreticalPolicyKind::expected_value_toy: {
            double p_e = indifference_expected_toy(config.r1, config.r2, config.r_safe);
            return step_curve(grid, p_e, 0.0, 1.0, 0.5);
        }
        case TheoreticalPolicyKind::time_growth_toy: {
            double p_t = indifference_time_toy(config.r1, config.r2, config.r_safe);
            return step_curve(grid, p_t, 0.0, 1.0, 0.5);
        }
        default:
            throw ConfigError("theoretical_curve: portfolio kind needs a portfolio config");
    }
}

PolicyCurve theoretical_curve(TheoreticalPolicyKind kind, const PortfolioConfig& config,
                              std::span<const double> grid) {
    switch (kind) {
        case TheoreticalPolicyKind::expected_value_portfolio: {
            double p_e = ev_threshold_portfolio(config.r_win, config.r_loss);
            // All-or-nothing: full investment once the expected return clears 1.
            return step_curve(grid, p_e, 0.0, 1.0, 1.0);
        }
        case TheoreticalPolicyKind::kelly_portfolio: {
            PolicyCurve curve;
            curve.grid.assign(grid.begin(), grid.end());
            curve.values.reserve(grid.size());
            for (double p : grid)
                curve.values.push_back(kelly_fraction(p, config.r_win, config.r_loss).clamped);
            return curve;
        }
        default:
            throw ConfigError("theoretical_curve: toy kind needs a toy config");
    }
}

}  // namespace ergolab
