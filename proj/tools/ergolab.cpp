// Command-line surface for the lab: closed-form theory, single training
// runs, sweeps, the ergodicity diagnostic and SVG report generation.
// Exit codes: 0 success, 1 runtime/domain failure, 2 usage or config error.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "ergolab/config.hpp"
#include "ergolab/csv.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/svg_report.hpp"
#include "ergolab/sweep.hpp"

namespace fs = std::filesystem;
using namespace ergolab;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string profile = "desk";
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool verbose = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Config file (key = value format)");
    cmd->add_option("--profile", opts.profile, "Built-in profile when no config is given")
        ->check(CLI::IsMember({"paper", "desk"}));
    cmd->add_option("--out", opts.out_dir, "Output directory");
    cmd->add_option("--seed", opts.seed, "Override the base seed");
    cmd->add_flag("--verbose", opts.verbose, "Enable per-episode logging");
}

Profile profile_from_name(const std::string& name) {
    return name == "paper" ? Profile::paper : Profile::desk;
}

SweepConfig resolve_config(const CommonOpts& opts, ExperimentKind fallback_kind) {
    SweepConfig config = opts.config_path.empty()
                             ? profile_config(fallback_kind, profile_from_name(opts.profile))
                             : parse_config(opts.config_path);
    if (opts.seed) config.base_seed = *opts.seed;
    return config;
}

void require_kind(const SweepConfig& config, ExperimentKind kind,
                  const std::string& command) {
    if (config.kind != kind)
        throw ConfigError(command + ": config is for experiment '" +
                          experiment_name(config.kind) + "', expected '" +
                          experiment_name(kind) + "'");
}

fs::path ensure_out_dir(const CommonOpts& opts) {
    fs::path dir = opts.out_dir.empty() ? fs::path("out") : fs::path(opts.out_dir);
    fs::create_directories(dir);
    return dir;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write '" + path.string() + "'");
    out << content;
}

// ---- theory ---------------------------------------------------------------

int run_theory(const CommonOpts& opts, const std::string& model) {
    bool toy = model == "toy";
    SweepConfig config = resolve_config(
        opts, toy ? ExperimentKind::toy_dqn : ExperimentKind::portfolio_ac);

    if (toy) {
        require_kind(config, ExperimentKind::toy_dqn, "theory --model toy");
        const ToyConfig& env = config.toy;
        double p_e = indifference_expected_toy(env.r1, env.r2, env.r_safe);
        double p_t = indifference_time_toy(env.r1, env.r2, env.r_safe);
        std::printf("rewards: r1=%s r2=%s r_safe=%s\n", format_double(env.r1).c_str(),
                    format_double(env.r2).c_str(), format_double(env.r_safe).c_str());
        std::printf("p_E = %s\n", format_double(p_e).c_str());
        std::printf("p_T = %s\n", format_double(p_t).c_str());
        for (auto [name, value] : {std::pair{"p_E", p_e}, {"p_T", p_t}})
            if (value < 0.0 || value > 1.0)
                std::printf("warning: %s lies outside [0,1]\n", name);
        if (!opts.out_dir.empty()) {
            fs::path dir = ensure_out_dir(opts);
            std::ostringstream ev, tg;
            write_theory_curve_csv(ev, "theory-ev-toy",
                                   theoretical_curve(TheoreticalPolicyKind::expected_value_toy,
                                                     env, config.p_grid));
            write_theory_curve_csv(tg, "theory-time-growth-toy",
                                   theoretical_curve(TheoreticalPolicyKind::time_growth_toy,
                                                     env, config.p_grid));
            write_text_file(dir / "theory_ev_toy.csv", ev.str());
            write_text_file(dir / "theory_time_growth_toy.csv", tg.str());
        }
    } else {
        if (config.kind == ExperimentKind::toy_dqn)
            throw ConfigError("theory --model portfolio: config is for toy-dqn");
        const PortfolioConfig& env = config.portfolio;
        double p_e = ev_threshold_portfolio(env.r_win, env.r_loss);
        std::printf("rewards: r_win=%s r_loss=%s\n", format_double(env.r_win).c_str(),
                    format_double(env.r_loss).c_str());
        std::printf("p_E = %s\n", format_double(p_e).c_str());
        std::printf("%8s %16s %16s\n", "p", "f_star", "f_star_clamped");
        for (double p : config.p_grid) {
            KellyFraction f = kelly_fraction(p, env.r_win, env.r_loss);
            std::printf("%8s %16s %16s\n", format_double(p).c_str(),
                        format_double(f.unclamped).c_str(),
                        format_double(f.clamped).c_str());
        }
        if (!opts.out_dir.empty()) {
            fs::path dir = ensure_out_dir(opts);
            std::ostringstream ev, kelly;
            write_theory_curve_csv(
                ev, "theory-ev-portfolio",
                theoretical_curve(TheoreticalPolicyKind::expected_value_portfolio, env,
                                  config.p_grid));
            write_theory_curve_csv(
                kelly, "theory-kelly-portfolio",
                theoretical_curve(TheoreticalPolicyKind::kelly_portfolio, env,
                                  config.p_grid));
            write_text_file(dir / "theory_ev_portfolio.csv", ev.str());
            write_text_file(dir / "theory_kelly_portfolio.csv", kelly.str());
        }
    }
    return 0;
}

// ---- single-agent training ------------------------------------------------

int run_train_dqn(const CommonOpts& opts, std::optional<double> p, std::optional<int> m,
                  std::optional<long> episodes) {
    SweepConfig config = resolve_config(opts, ExperimentKind::toy_dqn);
    require_kind(config, ExperimentKind::toy_dqn, "train-dqn");

    ToyConfig env = config.toy;
    env.p = p.value_or(config.fixed_p.value_or(0.5));
    env.rounds_per_episode = m.value_or(1);
    DqnHyperparams hp = config.dqn;
    if (episodes) hp.episodes = *episodes;
    env.validate();

    long log_every = opts.verbose ? std::max<long>(1, hp.episodes / 200) : 0;
    DqnTrainResult result = train_dqn_agent(env, hp, config.base_seed, log_every);

    std::printf("experiment=toy-dqn p=%s M=%d episodes=%ld seed=%llu\n",
                format_double(env.p).c_str(), env.rounds_per_episode, hp.episodes,
                static_cast<unsigned long long>(config.base_seed));
    std::printf("pi_safe = %s\n", format_double(result.pi_safe).c_str());

    if (opts.verbose) {
        fs::path dir = ensure_out_dir(opts);
        std::ostringstream log;
        log << "episode,epsilon,loss,pi_safe\n";
        for (const auto& row : result.log)
            log << row.episode << ',' << format_double(row.epsilon) << ','
                << format_double(row.loss) << ',' << format_double(row.pi_safe) << '\n';
        fs::path path = dir / ("dqn_log_seed" + std::to_string(config.base_seed) + ".csv");
        write_text_file(path, log.str());
        std::printf("log: %s\n", path.string().c_str());
    }
    return 0;
}

int run_train_ac(const CommonOpts& opts, std::optional<double> p, std::optional<int> m,
                 std::optional<long> episodes) {
    SweepConfig config = resolve_config(opts, ExperimentKind::portfolio_ac);
    require_kind(config, ExperimentKind::portfolio_ac, "train-ac");

    PortfolioConfig env = config.portfolio;
    env.p = p.value_or(config.fixed_p.value_or(0.5));
    env.rounds_per_episode = m.value_or(1);
    AcHyperparams hp = config.ac;
    if (episodes) hp.episodes = *episodes;
    env.validate();

    long log_every = opts.verbose ? std::max<long>(1, hp.episodes / 200) : 0;
    AcTrainResult result = train_ac_agent(env, hp, config.base_seed, log_every);

    std::printf("experiment=portfolio-ac p=%s M=%d episodes=%ld seed=%llu "
                "normalize_returns=%s\n",
                format_double(env.p).c_str(), env.rounds_per_episode, hp.episodes,
                static_cast<unsigned long long>(config.base_seed),
                hp.normalize_returns ? "true" : "false");
    std::printf("f_hat = %s\n", format_double(result.fraction).c_str());
    std::printf("kelly f_star = %s\n",
                format_double(kelly_fraction(env.p, env.r_win, env.r_loss).clamped).c_str());

    if (opts.verbose) {
        fs::path dir = ensure_out_dir(opts);
        std::ostringstream log;
        log << "episode,f_sampled,G,A,policy_loss,value_loss\n";
        for (const auto& row : result.log)
            log << row.episode << ',' << format_double(row.fraction) << ','
                << format_double(row.episode_return) << ','
                << format_double(row.advantage) << ',' << format_double(row.policy_loss)
                << ',' << format_double(row.value_loss) << '\n';
        fs::path path = dir / ("ac_log_seed" + std::to_string(config.base_seed) + ".csv");
        write_text_file(path, log.str());
        std::printf("log: %s\n", path.string().c_str());
    }
    return 0;
}

// ---- sweeps ----------------------------------------------------------------

void write_sweep_outputs(const fs::path& dir, const SweepResult& result) {
    std::ostringstream curve;
    write_policy_curve_csv(curve, result);
    write_text_file(dir / "policy_curve.csv", curve.str());

    const SweepConfig& config = result.config;
    if (config.kind == ExperimentKind::toy_dqn) {
        double p_e = indifference_expected_toy(config.toy.r1, config.toy.r2,
                                               config.toy.r_safe);
        double p_t = indifference_time_toy(config.toy.r1, config.toy.r2,
                                           config.toy.r_safe);
        IndifferenceResult indiff = extract_indifference(result, p_e, p_t);
        std::ostringstream ind;
        write_indifference_csv(ind, indiff);
        write_text_file(dir / "indifference.csv", ind.str());
        for (const auto& entry : indiff.per_m) {
            if (entry.valid)
                std::printf("M=%-3d p0=%s k=%s |p0-p_E|=%s |p0-p_T|=%s\n", entry.m,
                            format_double(entry.params.midpoint).c_str(),
                            format_double(entry.params.steepness).c_str(),
                            format_double(entry.dist_to_p_e).c_str(),
                            format_double(entry.dist_to_p_t).c_str());
            else
                std::printf("M=%-3d sigmoid fit degenerate: %s\n", entry.m,
                            entry.error.c_str());
        }
    } else {
        PolicyCurve ev = theoretical_curve(TheoreticalPolicyKind::expected_value_portfolio,
                                           config.portfolio, config.p_grid);
        PolicyCurve kelly = theoretical_curve(TheoreticalPolicyKind::kelly_portfolio,
                                              config.portfolio, config.p_grid);
        MseReport report = compute_mse_report(result, ev, kelly);
        std::ostringstream mse;
        write_mse_csv(mse, report);
        write_text_file(dir / "mse_report.csv", mse.str());
        for (const auto& entry : report.per_m)
            std::printf("M=%-3d mse_ev=%s mse_kelly=%s\n", entry.m,
                        format_double(entry.mse_ev).c_str(),
                        format_double(entry.mse_kelly).c_str());
    }

    int incomplete = 0;
    for (const auto& row : result.cells)
        for (const auto& cell : row)
            if (!cell.complete) ++incomplete;
    if (incomplete > 0)
        std::printf("warning: %d cell(s) incomplete (more than 20%% of agents diverged)\n",
                    incomplete);
}

int run_sweep(const CommonOpts& opts, const std::string& experiment,
              std::optional<int> workers) {
    ExperimentKind fallback = ExperimentKind::toy_dqn;
    if (experiment == "portfolio-ac") fallback = ExperimentKind::portfolio_ac;
    SweepConfig config = resolve_config(opts, fallback);
    if (!opts.config_path.empty() && !experiment.empty() &&
        experiment_name(config.kind) != experiment)
        throw ConfigError("sweep: --experiment disagrees with the config file");
    if (config.kind == ExperimentKind::portfolio_full_policy)
        throw ConfigError("sweep: use the full-policy command for this config");
    if (workers) config.workers = *workers;

    if (opts.verbose) std::fputs(config_to_text(config).c_str(), stdout);

    SweepResult result = config.kind == ExperimentKind::toy_dqn
                             ? run_toy_sweep(config)
                             : run_portfolio_sweep(config);
    fs::path dir = ensure_out_dir(opts);
    write_sweep_outputs(dir, result);
    std::printf("wrote %s\n", (dir / "policy_curve.csv").string().c_str());
    return 0;
}

int run_full_policy(const CommonOpts& opts, std::optional<int> workers) {
    SweepConfig config = resolve_config(opts, ExperimentKind::portfolio_full_policy);
    require_kind(config, ExperimentKind::portfolio_full_policy, "full-policy");
    if (workers) config.workers = *workers;
    if (opts.verbose) std::fputs(config_to_text(config).c_str(), stdout);

    SweepResult result = run_full_policy_experiment(config);
    fs::path dir = ensure_out_dir(opts);
    write_sweep_outputs(dir, result);
    std::printf("wrote %s\n", (dir / "policy_curve.csv").string().c_str());
    return 0;
}

// ---- diagnose ---------------------------------------------------------------

int run_diagnose(const CommonOpts& opts, std::optional<double> p, int horizon,
                 int ensemble) {
    SweepConfig config = resolve_config(opts, ExperimentKind::toy_dqn);
    require_kind(config, ExperimentKind::toy_dqn, "diagnose");
    ToyConfig env = config.toy;
    env.p = p.value_or(config.fixed_p.value_or(0.5));
    env.validate();

    RandomSource rng(config.base_seed);
    GrowthDiagnostic d = ergodicity_diagnostic(env, horizon, ensemble, rng);
    std::printf("all-risky growth at p=%s over T=%d, n=%d trajectories\n",
                format_double(env.p).c_str(), horizon, ensemble);
    std::printf("time-average growth:     %12s  (se %s, closed form %s)\n",
                format_double(d.time_avg_growth).c_str(),
                format_double(d.time_avg_se).c_str(),
                format_double(d.time_avg_closed_form).c_str());
    std::printf("ensemble-average growth: %12s  (se %s, closed form %s)\n",
                format_double(d.ensemble_avg_growth).c_str(),
                format_double(d.ensemble_se).c_str(),
                format_double(d.ensemble_closed_form).c_str());
    double gap = d.ensemble_avg_growth - d.time_avg_growth;
    std::printf("gap (ensemble - time):   %12s\n", format_double(gap).c_str());
    return 0;
}

// ---- report -----------------------------------------------------------------

int run_report(const CommonOpts& opts, const std::string& in_dir,
               std::vector<std::string> charts) {
    SweepConfig config = resolve_config(opts, ExperimentKind::toy_dqn);
    fs::path in = in_dir.empty() ? fs::path("out") : fs::path(in_dir);
    fs::path out = opts.out_dir.empty() ? in : fs::path(opts.out_dir);

    if (charts.empty()) {
        if (fs::exists(in / "policy_curve.csv")) charts.push_back("policy-curve");
        if (fs::exists(in / "indifference.csv")) charts.push_back("indifference");
        if (fs::exists(in / "mse_report.csv")) charts.push_back("mse");
        if (charts.empty())
            throw DomainError("report: no report CSVs found in '" + in.string() + "'");
    }

    std::vector<std::string> written;
    for (const std::string& chart : charts) {
        ChartSpec spec;
        spec.out_dir = out.string();
        if (chart == "policy-curve") {
            spec.kind = ChartSpec::Kind::policy_curve;
            spec.csv_path = (in / "policy_curve.csv").string();
            if (config.kind == ExperimentKind::toy_dqn) {
                spec.overlays.emplace_back(
                    "expected-value step",
                    theoretical_curve(TheoreticalPolicyKind::expected_value_toy,
                                      config.toy, config.p_grid));
                spec.overlays.emplace_back(
                    "time-growth step",
                    theoretical_curve(TheoreticalPolicyKind::time_growth_toy, config.toy,
                                      config.p_grid));
                spec.marker_p_e = indifference_expected_toy(config.toy.r1, config.toy.r2,
                                                            config.toy.r_safe);
                spec.marker_p_t = indifference_time_toy(config.toy.r1, config.toy.r2,
                                                        config.toy.r_safe);
            } else {
                spec.overlays.emplace_back(
                    "expected-value step",
                    theoretical_curve(TheoreticalPolicyKind::expected_value_portfolio,
                                      config.portfolio, config.p_grid));
                spec.overlays.emplace_back(
                    "kelly optimum",
                    theoretical_curve(TheoreticalPolicyKind::kelly_portfolio,
                                      config.portfolio, config.p_grid));
                spec.marker_p_e =
                    ev_threshold_portfolio(config.portfolio.r_win, config.portfolio.r_loss);
            }
        } else if (chart == "indifference") {
            spec.kind = ChartSpec::Kind::indifference_vs_m;
            spec.csv_path = (in / "indifference.csv").string();
        } else if (chart == "mse") {
            spec.kind = ChartSpec::Kind::mse_vs_m;
            spec.csv_path = (in / "mse_report.csv").string();
        } else {
            throw ConfigError("report: unknown chart '" + chart + "'");
        }
        for (auto& path : render_chart(spec)) written.push_back(std::move(path));
    }
    for (const auto& path : written) std::printf("wrote %s\n", path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ergolab: RL agents in multiplicative-wealth environments"};
    app.require_subcommand(1);

    CommonOpts theory_opts;
    std::string theory_model = "toy";
    CLI::App* theory_cmd =
        app.add_subcommand("theory", "Print closed-form reference policies");
    add_common(theory_cmd, theory_opts);
    theory_cmd->add_option("--model", theory_model, "toy or portfolio")
        ->check(CLI::IsMember({"toy", "portfolio"}));

    CommonOpts dqn_opts;
    std::optional<double> dqn_p;
    std::optional<int> dqn_m;
    std::optional<long> dqn_episodes;
    CLI::App* dqn_cmd = app.add_subcommand("train-dqn", "Train one DQN agent on the toy model");
    add_common(dqn_cmd, dqn_opts);
    dqn_cmd->add_option("--p", dqn_p, "Probability of the worst risky outcome");
    dqn_cmd->add_option("--m", dqn_m, "Rounds per episode");
    dqn_cmd->add_option("--episodes", dqn_episodes, "Training episodes");

    CommonOpts ac_opts;
    std::optional<double> ac_p;
    std::optional<int> ac_m;
    std::optional<long> ac_episodes;
    CLI::App* ac_cmd =
        app.add_subcommand("train-ac", "Train one actor-critic agent on the portfolio");
    add_common(ac_cmd, ac_opts);
    ac_cmd->add_option("--p", ac_p, "Probability of the winning outcome");
    ac_cmd->add_option("--m", ac_m, "Rounds per episode");
    ac_cmd->add_option("--episodes", ac_episodes, "Training episodes");

    CommonOpts sweep_opts;
    std::string sweep_experiment;
    std::optional<int> sweep_workers;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Train N agents per (p, M) cell");
    add_common(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--experiment", sweep_experiment, "toy-dqn or portfolio-ac")
        ->check(CLI::IsMember({"toy-dqn", "portfolio-ac"}));
    sweep_cmd->add_option("--workers", sweep_workers, "Worker threads (0 = hardware)");

    CommonOpts full_opts;
    std::optional<int> full_workers;
    CLI::App* full_cmd =
        app.add_subcommand("full-policy", "Train agents that generalise over p");
    add_common(full_cmd, full_opts);
    full_cmd->add_option("--workers", full_workers, "Worker threads (0 = hardware)");

    CommonOpts diag_opts;
    std::optional<double> diag_p;
    int diag_horizon = 1000;
    int diag_ensemble = 1000;
    CLI::App* diag_cmd =
        app.add_subcommand("diagnose", "Estimate time vs ensemble growth rates");
    add_common(diag_cmd, diag_opts);
    diag_cmd->add_option("--p", diag_p, "Probability of the worst risky outcome");
    diag_cmd->add_option("--horizon", diag_horizon, "Steps per trajectory");
    diag_cmd->add_option("--ensemble", diag_ensemble, "Number of trajectories");

    CommonOpts report_opts;
    std::string report_in;
    std::vector<std::string> report_charts;
    CLI::App* report_cmd = app.add_subcommand("report", "Render SVG charts from result CSVs");
    add_common(report_cmd, report_opts);
    report_cmd->add_option("--in", report_in, "Directory holding the result CSVs");
    report_cmd->add_option("--charts", report_charts,
                           "Charts to render: policy-curve, indifference, mse");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (theory_cmd->parsed()) return run_theory(theory_opts, theory_model);
        if (dqn_cmd->parsed()) return run_train_dqn(dqn_opts, dqn_p, dqn_m, dqn_episodes);
        if (ac_cmd->parsed()) return run_train_ac(ac_opts, ac_p, ac_m, ac_episodes);
        if (sweep_cmd->parsed()) return run_sweep(sweep_opts, sweep_experiment, sweep_workers);
        if (full_cmd->parsed()) return run_full_policy(full_opts, full_workers);
        if (diag_cmd->parsed()) return run_diagnose(diag_opts, diag_p, diag_horizon, diag_ensemble);
        if (report_cmd->parsed()) return run_report(report_opts, report_in, report_charts);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
