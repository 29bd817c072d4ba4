// Acceptance suite: one pass/fail line per criterion, every tolerance
// pinned in code. Returns the number of failed criteria.

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "ergolab/config.hpp"
#include "ergolab/csv.hpp"
#include "ergolab/sweep.hpp"
#include "../oracles.hpp"

using namespace ergolab;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass,
            const std::string& detail) {
    std::printf("criterion %d [%s]: %s  (%s)\n", criterion, name.c_str(),
                pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) { return format_double(v); }

// ---- criterion 1: closed forms vs oracles ----------------------------------

void criterion_closed_forms() {
    bool pass = true;
    std::ostringstream detail;

    double p_e = indifference_expected_toy(0.5, 2.0, 1.2);
    double p_e_oracle =
        oracles::bisect([](double p) { return 1.2 - (p * 0.5 + (1.0 - p) * 2.0); }, 0.0, 1.0);
    pass &= std::abs(p_e - p_e_oracle) < 1e-9;
    detail << "p_E=" << fmt(p_e);

    double p_t = indifference_time_toy(0.5, 2.0, 1.2);
    double p_t_oracle = oracles::bisect(
        [](double p) {
            return std::log(1.2) - (p * std::log(0.5) + (1.0 - p) * std::log(2.0));
        },
        0.0, 1.0);
    pass &= std::abs(p_t - p_t_oracle) < 1e-9;
    detail << " p_T=" << fmt(p_t);

    double pf_pe = ev_threshold_portfolio(3.0, 0.2);
    double pf_pe_oracle =
        oracles::bisect([](double p) { return p * 3.0 + (1.0 - p) * 0.2 - 1.0; }, 0.0, 1.0);
    pass &= std::abs(pf_pe - pf_pe_oracle) < 1e-9;
    detail << " pf_p_E=" << fmt(pf_pe);

    double f_star = kelly_fraction(0.5, 3.0, 0.2).clamped;
    double f_oracle = oracles::grid_argmax(
        [](double f) { return kelly_objective(f, 0.5, 3.0, 0.2); }, 0.0, 1.0, 1e-6);
    pass &= std::abs(f_star - f_oracle) < 1e-9;
    detail << " f*(0.5)=" << fmt(f_star);

    RandomSource rng(904);
    double worst_deriv = 0.0;
    int tested = 0;
    while (tested < 50) {
        double r_win = rng.uniform(1.5, 4.0);
        double r_loss = rng.uniform(0.05, 0.9);
        double p = rng.uniform(0.05, 0.95);
        KellyFraction f = kelly_fraction(p, r_win, r_loss);
        if (f.unclamped <= 0.01 || f.unclamped >= 0.99) continue;
        double deriv = oracles::central_diff(
            [&](double x) { return kelly_objective(x, p, r_win, r_loss); }, f.unclamped);
        worst_deriv = std::max(worst_deriv, std::abs(deriv));
        ++tested;
    }
    pass &= worst_deriv < 1e-8;
    detail << " max|g'(f*)|=" << fmt(worst_deriv);

    report(1, "closed-form exactness", pass, detail.str());
}

// ---- criterion 2: numerical core --------------------------------------------

void criterion_numerical_core() {
    bool pass = true;
    std::ostringstream detail;

    RandomSource rng(777);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        int hidden = 4 + static_cast<int>(rng.next_unit() * 12.0);
        int inputs = 1 + static_cast<int>(rng.next_unit() * 2.0);
        int outputs = 1 + static_cast<int>(rng.next_unit() * 2.0);
        const int dims[] = {inputs, hidden, outputs};
        Mlp net = mlp_init(dims, rng.next_u64());
        std::vector<double> in(inputs), targets(outputs);
        for (auto& v : in) v = rng.uniform(-2.0, 2.0);
        for (auto& v : targets) v = rng.uniform(-2.0, 2.0);
        worst = std::max(worst, grad_check(net, in, targets));
    }
    pass &= worst < 1e-4;
    detail << "max grad_check=" << fmt(worst);

    auto linear = smooth_l1(2.0, 0.0);
    auto quadratic = smooth_l1(0.5, 0.0);
    auto zero = smooth_l1(0.3, 0.3);
    bool sl1 = linear.loss == 1.5 && linear.gradient == 1.0 && quadratic.loss == 0.125 &&
               quadratic.gradient == 0.5 && zero.loss == 0.0 && zero.gradient == 0.0;
    pass &= sl1;
    detail << " smooth_l1=" << (sl1 ? "exact" : "WRONG");

    Mlp scalar;
    scalar.layer_dims = {1, 1};
    scalar.weights = {{0.25}};
    scalar.biases = {{0.0}};
    AdamState state = adam_init(scalar, 0.8);
    ParamGrads g = zero_grads(scalar);
    g.weights[0][0] = 1.7;
    adam_step(scalar, g, state);
    double expected = 0.25 - 0.8 * 1.7 / (std::abs(1.7) + 1e-8);
    bool adam_ok = std::abs(scalar.weights[0][0] - expected) < 1e-14;
    pass &= adam_ok;
    detail << " adam_t1=" << (adam_ok ? "exact" : "WRONG");

    report(2, "numerical core", pass, detail.str());
}

// ---- criterion 3: ergodicity gap ---------------------------------------------

void criterion_ergodicity_gap() {
    ToyConfig env;
    env.p = 0.5;
    RandomSource rng(12345);
    GrowthDiagnostic d = ergodicity_diagnostic(env, 1000, 1000, rng);
    bool time_ok = std::abs(d.time_avg_growth - 0.0) < 0.02;
    bool ens_ok = std::abs(d.ensemble_avg_growth - std::log(1.25)) < 0.05;
    std::ostringstream detail;
    detail << "time_avg=" << fmt(d.time_avg_growth) << " (|.|<0.02) ensemble="
           << fmt(d.ensemble_avg_growth) << " (target " << fmt(std::log(1.25))
           << " +-0.05)";
    report(3, "ergodicity gap", time_ok && ens_ok, detail.str());
}

// ---- criteria 4 + 5: toy DQN regimes ------------------------------------------

void criteria_toy_dqn() {
    SweepConfig config = profile_config(ExperimentKind::toy_dqn, Profile::desk);
    config.m_values = {1, 5, 20};
    config.base_seed = 20240801;
    std::printf("toy dqn sweep: N=%d E=%ld lr=%s feature=auto (raw below M=10, "
                "log-wealth above) horizon=episodic buffer=%d seed=%llu\n",
                config.n_agents, config.dqn.episodes,
                fmt(config.dqn.learning_rate).c_str(), config.dqn.buffer_capacity,
                static_cast<unsigned long long>(config.base_seed));
    std::fflush(stdout);

    SweepResult result = run_toy_sweep(config);
    double p_e = indifference_expected_toy(config.toy.r1, config.toy.r2, config.toy.r_safe);
    double p_t = indifference_time_toy(config.toy.r1, config.toy.r2, config.toy.r_safe);
    IndifferenceResult indiff = extract_indifference(result, p_e, p_t);

    {
        std::ostringstream curve, ind;
        write_policy_curve_csv(curve, result);
        write_indifference_csv(ind, indiff);
        FILE* f = std::fopen("acceptance_toy_policy_curve.csv", "wb");
        if (f) {
            std::fputs(curve.str().c_str(), f);
            std::fclose(f);
        }
        f = std::fopen("acceptance_toy_indifference.csv", "wb");
        if (f) {
            std::fputs(ind.str().c_str(), f);
            std::fclose(f);
        }
    }

    const IndifferenceEntry& m1 = indiff.per_m[0];
    const IndifferenceEntry& m5 = indiff.per_m[1];
    const IndifferenceEntry& m20 = indiff.per_m[2];

    bool pass4 = m1.valid && std::abs(m1.params.midpoint - p_e) <= 0.06;
    std::ostringstream d4;
    d4 << "p0(M=1)=" << (m1.valid ? fmt(m1.params.midpoint) : "fit-degenerate")
       << " target p_E=" << fmt(p_e) << " +-0.06";
    report(4, "toy dqn expected-value regime", pass4, d4.str());

    bool fits_ok = m1.valid && m5.valid && m20.valid;
    bool near_pt = fits_ok && std::abs(m20.params.midpoint - p_t) <= 0.06;
    bool monotone = fits_ok &&
                    m5.params.midpoint <= m1.params.midpoint + 0.03 &&
                    m20.params.midpoint <= m5.params.midpoint + 0.03;
    std::ostringstream d5;
    if (fits_ok)
        d5 << "p0(M=5)=" << fmt(m5.params.midpoint)
           << " p0(M=20)=" << fmt(m20.params.midpoint) << " target p_T=" << fmt(p_t)
           << " +-0.06, non-increasing tol 0.03";
    else
        d5 << "sigmoid fit degenerate";
    report(5, "toy dqn time-growth regime", near_pt && monotone, d5.str());
}

// ---- criterion 6: portfolio AC regime ordering ---------------------------------

void criterion_portfolio_ac() {
    SweepConfig config = profile_config(ExperimentKind::portfolio_ac, Profile::desk);
    config.m_values = {1, 20};
    config.base_seed = 20240802;
    std::printf("portfolio ac sweep: N=%d E=%ld lr=%s/%s advantage_clip=%s "
                "normalize_returns=%s seed=%llu\n",
                config.n_agents, config.ac.episodes, fmt(config.ac.actor_lr).c_str(),
                fmt(config.ac.critic_lr).c_str(), fmt(config.ac.advantage_clip).c_str(),
                config.ac.normalize_returns ? "true" : "false",
                static_cast<unsigned long long>(config.base_seed));
    std::fflush(stdout);

    SweepResult result = run_portfolio_sweep(config);
    PolicyCurve ev = theoretical_curve(TheoreticalPolicyKind::expected_value_portfolio,
                                       config.portfolio, config.p_grid);
    PolicyCurve kelly = theoretical_curve(TheoreticalPolicyKind::kelly_portfolio,
                                          config.portfolio, config.p_grid);
    MseReport report_rows = compute_mse_report(result, ev, kelly);

    {
        std::ostringstream curve, mse;
        write_policy_curve_csv(curve, result);
        write_mse_csv(mse, report_rows);
        FILE* f = std::fopen("acceptance_portfolio_policy_curve.csv", "wb");
        if (f) {
            std::fputs(curve.str().c_str(), f);
            std::fclose(f);
        }
        f = std::fopen("acceptance_portfolio_mse.csv", "wb");
        if (f) {
            std::fputs(mse.str().c_str(), f);
            std::fclose(f);
        }
    }

    const MseEntry& m1 = report_rows.per_m[0];
    const MseEntry& m20 = report_rows.per_m[1];
    bool pass = m1.mse_ev < m1.mse_kelly && m20.mse_kelly < m20.mse_ev &&
                m20.mse_kelly < 0.02;
    std::ostringstream detail;
    detail << "M=1: mse_ev=" << fmt(m1.mse_ev) << " < mse_kelly=" << fmt(m1.mse_kelly)
           << "; M=20: mse_kelly=" << fmt(m20.mse_kelly) << " < mse_ev="
           << fmt(m20.mse_ev) << " and < 0.02";
    report(6, "portfolio ac regime ordering", pass, detail.str());
}

// ---- criterion 7: full-policy AC ------------------------------------------------

void criterion_full_policy() {
    SweepConfig config = profile_config(ExperimentKind::portfolio_full_policy, Profile::desk);
    config.m_values = {20};
    config.base_seed = 20240803;
    std::printf("full-policy run: N=%d E=%ld advantage_clip=%s concentration_cap=%s "
                "seed=%llu\n",
                config.n_agents, config.ac.episodes, fmt(config.ac.advantage_clip).c_str(),
                fmt(config.ac.concentration_cap).c_str(),
                static_cast<unsigned long long>(config.base_seed));
    std::fflush(stdout);

    SweepResult result = run_full_policy_experiment(config);
    PolicyCurve ev = theoretical_curve(TheoreticalPolicyKind::expected_value_portfolio,
                                       config.portfolio, config.p_grid);
    PolicyCurve kelly = theoretical_curve(TheoreticalPolicyKind::kelly_portfolio,
                                          config.portfolio, config.p_grid);
    MseReport mse = compute_mse_report(result, ev, kelly);
    PolicyCurve median = result.median_curve(0);

    double f0 = median.values.front();
    double f1 = median.values.back();
    bool pass = mse.per_m[0].mse_kelly < mse.per_m[0].mse_ev && f0 < 0.15 && f1 > 0.85;
    std::ostringstream detail;
    detail << "mse_kelly=" << fmt(mse.per_m[0].mse_kelly) << " < mse_ev="
           << fmt(mse.per_m[0].mse_ev) << ", f(0)=" << fmt(f0) << " < 0.15, f(1)="
           << fmt(f1) << " > 0.85";
    report(7, "full-policy ac", pass, detail.str());
}

// ---- criterion 8: determinism ----------------------------------------------------

void criterion_determinism() {
    SweepConfig config = profile_config(ExperimentKind::toy_dqn, Profile::desk);
    config.p_grid = {0.0, 0.3, 0.7, 1.0};
    config.m_values = {1, 5};
    config.n_agents = 3;
    config.dqn.episodes = 500;
    config.base_seed = 99;

    auto render = [&] {
        SweepResult result = run_toy_sweep(config);
        std::ostringstream curve;
        write_policy_curve_csv(curve, result);
        IndifferenceResult indiff = extract_indifference(result, 0.5333, 0.3685);
        std::ostringstream ind;
        write_indifference_csv(ind, indiff);
        return curve.str() + "\n---\n" + ind.str();
    };
    std::string first = render();
    std::string second = render();
    bool pass = first == second;
    report(8, "determinism", pass,
           pass ? "rerun produced byte-identical CSV output" : "outputs differ");
}

}  // namespace

int main() {
    std::printf("ergolab acceptance suite\n");
    criterion_closed_forms();
    criterion_numerical_core();
    criterion_ergodicity_gap();
    criteria_toy_dqn();
    criterion_portfolio_ac();
    criterion_full_policy();
    criterion_determinism();
    if (g_failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criterion/criteria FAILED\n", g_failures);
    return g_failures;
}
