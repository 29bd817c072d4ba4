#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ergolab/config.hpp"
#include "ergolab/csv.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/svg_report.hpp"

using namespace ergolab;

namespace {

std::string config_dir() { return ERGOLAB_CONFIG_DIR; }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "ergolab_config_test";
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("bundled paper configs carry the reference parameters") {
    SweepConfig toy = parse_config(config_dir() + "/toy_paper.cfg");
    CHECK(toy.kind == ExperimentKind::toy_dqn);
    CHECK(toy.toy.r1 == 0.5);
    CHECK(toy.toy.r2 == 2.0);
    CHECK(toy.toy.r_safe == 1.2);
    CHECK(toy.dqn.gamma == 0.9);
    CHECK(toy.dqn.episodes == 10000);
    CHECK(toy.n_agents == 40);
    CHECK(toy.dqn.learning_rate == 0.8);
    CHECK(toy.dqn.batch_size == 2);
    CHECK(toy.dqn.hidden_width == 16);
    CHECK(toy.dqn.epsilon.initial == 1.0);
    CHECK(toy.dqn.epsilon.decay_rate == 0.995);
    CHECK(toy.dqn.epsilon.floor == 0.05);
    CHECK(toy.p_grid.size() == 21u);

    SweepConfig pf = parse_config(config_dir() + "/portfolio_paper.cfg");
    CHECK(pf.kind == ExperimentKind::portfolio_ac);
    CHECK(pf.portfolio.r_win == 3.0);
    CHECK(pf.portfolio.r_loss == 0.2);
    CHECK(pf.portfolio.initial_wealth == 10.0);
    CHECK(pf.m_values == std::vector<int>{1, 2, 5, 10, 20});
    CHECK(pf.ac.episodes == 100000);
    CHECK(pf.n_agents == 20);
    CHECK(pf.ac.actor_lr == 1e-3);
    CHECK(pf.ac.critic_lr == 1e-3);
    CHECK(pf.ac.actor_hidden == 32);
    CHECK(pf.ac.critic_hidden == 32);
}

TEST_CASE("bundled files mirror the built-in profiles") {
    struct Row {
        const char* file;
        ExperimentKind kind;
        Profile profile;
    };
    for (Row row : {Row{"/toy_paper.cfg", ExperimentKind::toy_dqn, Profile::paper},
                    Row{"/toy_desk.cfg", ExperimentKind::toy_dqn, Profile::desk},
                    Row{"/portfolio_paper.cfg", ExperimentKind::portfolio_ac, Profile::paper},
                    Row{"/portfolio_desk.cfg", ExperimentKind::portfolio_ac, Profile::desk},
                    Row{"/full_policy_paper.cfg", ExperimentKind::portfolio_full_policy,
                        Profile::paper},
                    Row{"/full_policy_desk.cfg", ExperimentKind::portfolio_full_policy,
                        Profile::desk}}) {
        SweepConfig from_file = parse_config(config_dir() + row.file);
        SweepConfig preset = profile_config(row.kind, row.profile);
        CAPTURE(row.file);
        CHECK(config_to_text(from_file) == config_to_text(preset));
    }
}

TEST_CASE("out-of-range and malformed values name the key") {
    CHECK_THROWS_WITH_AS(parse_config_text("experiment = toy-dqn\np = 1.5\n"),
                         doctest::Contains("'p'"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("experiment = toy-dqn\ngamma = nope\n"),
                         doctest::Contains("'gamma'"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("experiment = toy-dqn\nmystery = 3\n"),
                         doctest::Contains("'mystery'"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_config_text("experiment = toy-dqn\nr1 = 0.5\nr1 = 0.6\n"),
        doctest::Contains("duplicate"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("experiment = warp-drive\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("r1 = 0.5\n"), ConfigError);  // kind missing
    CHECK_THROWS_AS(parse_config_text("experiment = toy-dqn\nbroken line\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("/nonexistent/path.cfg"), ConfigError);

    // Keys from the other experiment family are unknown, not ignored.
    CHECK_THROWS_WITH_AS(parse_config_text("experiment = toy-dqn\nactor_lr = 0.1\n"),
                         doctest::Contains("'actor_lr'"), ConfigError);
}

TEST_CASE("comments, spacing and round trips") {
    SweepConfig config = parse_config_text(
        "# a comment\n"
        "experiment = toy-dqn\n"
        "  r1 = 0.4   # trailing comment\n"
        "\n"
        "p_grid = 0,0.5,0.9,1\n");
    CHECK(config.toy.r1 == 0.4);
    CHECK(config.p_grid == std::vector<double>{0.0, 0.5, 0.9, 1.0});

    SweepConfig back = parse_config_text(config_to_text(config));
    CHECK(config_to_text(back) == config_to_text(config));
}

TEST_CASE("format_double keeps 12 significant digits") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1.0 / 3.0) == "0.333333333333");
    CHECK(format_double(123456789012.0) == "123456789012");
    CHECK(format_double(-0.000123456789012) == "-0.000123456789012");
}

TEST_CASE("csv reader handles schemas and rejects ragged rows") {
    std::stringstream good("a,b,c\n1,2,3\n4,5,6\n");
    CsvTable table = read_csv(good);
    CHECK(table.columns == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(table.rows.size() == 2u);
    CHECK(table.rows[1][2] == "6");
    CHECK(table.column_index("b") == 1u);
    CHECK_THROWS_WITH_AS(table.column_index("missing"), doctest::Contains("missing"),
                         DomainError);

    std::stringstream ragged("a,b\n1\n");
    CHECK_THROWS_AS(read_csv(ragged), DomainError);
}

TEST_CASE("svg rendering is deterministic and validates input") {
    auto dir = temp_dir();
    auto csv_path = dir / "policy_curve.csv";
    {
        std::ofstream out(csv_path);
        out << "experiment,M,p,mean,median,q25,q75,n_converged\n";
        out << "toy-dqn,1,0,0.1,0.1,0.05,0.15,4\n";
        out << "toy-dqn,1,0.5,0.4,0.45,0.3,0.5,4\n";
        out << "toy-dqn,1,1,0.9,0.95,0.9,1,4\n";
    }

    ChartSpec spec;
    spec.kind = ChartSpec::Kind::policy_curve;
    spec.csv_path = csv_path.string();
    spec.out_dir = (dir / "charts").string();
    spec.marker_p_e = 0.533;
    spec.marker_p_t = 0.368;

    auto written = render_chart(spec);
    REQUIRE(written.size() == 1u);
    std::string first = slurp(written[0]);
    CHECK(first.rfind("<?xml", 0) == 0);
    CHECK(first.find("<svg") != std::string::npos);
    CHECK(first.find("polyline") != std::string::npos);

    auto again = render_chart(spec);
    CHECK(slurp(again[0]) == first);  // byte-identical rerun

    // Missing column is named; nothing is written for an empty table.
    auto bad_path = dir / "bad.csv";
    {
        std::ofstream out(bad_path);
        out << "experiment,M,p,mean\n";
        out << "toy-dqn,1,0,0.1\n";
    }
    ChartSpec bad = spec;
    bad.csv_path = bad_path.string();
    CHECK_THROWS_WITH_AS(render_chart(bad), doctest::Contains("median"), DomainError);

    auto empty_path = dir / "empty.csv";
    {
        std::ofstream out(empty_path);
        out << "experiment,M,p,mean,median,q25,q75,n_converged\n";
    }
    ChartSpec empty = spec;
    empty.csv_path = empty_path.string();
    empty.out_dir = (dir / "charts_empty").string();
    CHECK_THROWS_AS(render_chart(empty), DomainError);
    CHECK(!std::filesystem::exists(dir / "charts_empty" / "policy_curve_m1.svg"));
}

TEST_CASE("indifference and mse charts render") {
    auto dir = temp_dir();
    auto ind_path = dir / "indifference.csv";
    {
        std::ofstream out(ind_path);
        out << "M,k,p0,residual,p_E,p_T\n";
        out << "1,14,0.52,0.02,0.533333333333,0.368458358262\n";
        out << "5,18,0.44,0.03,0.533333333333,0.368458358262\n";
        out << "20,22,0.37,0.02,0.533333333333,0.368458358262\n";
    }
    ChartSpec ind;
    ind.kind = ChartSpec::Kind::indifference_vs_m;
    ind.csv_path = ind_path.string();
    ind.out_dir = (dir / "charts").string();
    CHECK(render_chart(ind).size() == 1u);

    auto mse_path = dir / "mse_report.csv";
    {
        std::ofstream out(mse_path);
        out << "M,mse_ev,mse_kelly\n1,0.01,0.2\n20,0.3,0.004\n";
    }
    ChartSpec mse;
    mse.kind = ChartSpec::Kind::mse_vs_m;
    mse.csv_path = mse_path.string();
    mse.out_dir = (dir / "charts").string();
    auto files = render_chart(mse);
    REQUIRE(files.size() == 1u);
    CHECK(slurp(files[0]).find("MSE") != std::string::npos);
}

}  // TEST_SUITE
