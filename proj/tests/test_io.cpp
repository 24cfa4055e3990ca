#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "nutaxis/io.hpp"

using namespace nutaxis;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    REQUIRE(out);
    out << text;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(item);
    return out;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

RunConfig tiny_sim_config() {
    const KeyValues kv = {
        {"epsilon", "0.5"},          {"n_cells", "64"},
        {"T", "0.06"},               {"sample_interval", "0.01"},
        {"snapshot_interval", "0.02"}, {"cutoff.R", "0.5"},
        {"cutoff.S", "1.5"},         {"label", "tiny"},
    };
    return decode_config(kv);
}

} // namespace

TEST_CASE("config text parsing", "[io]") {
    std::istringstream in(
        "# full-line comment\n"
        "\n"
        "  epsilon = 0.25  \n"
        "label=run a\n"
        "T=2 # trailing comment\n");
    const KeyValues kv = parse_config_text(in);
    REQUIRE(kv.size() == 3);
    CHECK(kv.at("epsilon") == "0.25");
    CHECK(kv.at("label") == "run a");
    CHECK(kv.at("T") == "2");

    std::istringstream dup("a=1\na=2\n");
    CHECK_THROWS_AS(parse_config_text(dup), ConfigError);
    std::istringstream noeq("epsilon 0.5\n");
    CHECK_THROWS_AS(parse_config_text(noeq), ConfigError);
    std::istringstream blank("epsilon=\n");
    CHECK_THROWS_AS(parse_config_text(blank), ConfigError);
}

TEST_CASE("decode defaults", "[io]") {
    const RunConfig c = decode_config({});
    CHECK(c.epsilon == 0.5);
    CHECK(c.T == 1.0);
    CHECK(c.n_cells == 0);
    CHECK(c.dx == 0.0);
    CHECK(c.label.empty());
    CHECK(c.solver.chi == 1.0);
    CHECK(c.window_W == 1.0);
    CHECK(c.distance_q_list == std::vector<double>{1.0});
    CHECK(c.gn_samples == 200);
    CHECK(c.gn_epsilons.size() == 4);
    CHECK(c.gn_cells == 512);
    CHECK(c.balance_tol == 1e-10);
    CHECK(c.gronwall_inflation == 0.1);
    CHECK(c.dissipation_slack == 0.2);
}

TEST_CASE("decode typed keys", "[io]") {
    const KeyValues kv = {
        {"u0.family", "gaussian"},   {"v0.family", "gaussian_pos"},
        {"v0.sigma", "1.5"},         {"v0.floor", "0"},
        {"zeta.family", "zero"},     {"hypothesis_exempt", "false"},
        {"epsilon", "0.25"},         {"dx", "0.0625"},
        {"T", "0.5"},                {"chi", "0.7"},
        {"cfl_safety", "0.8"},       {"p_list", "2,3"},
        {"q_list", "auto"},          {"q_tilde", "3"},
        {"cutoff.R", "0.5"},         {"cutoff.S", "1.25"},
        {"sample_interval", "0.005"}, {"snapshot_interval", "0.01"},
        {"epsilons", "0.5,0.25,0.125"}, {"window_W", "0.5"},
        {"distance_q_list", "1,2"},  {"gn.form", "sup"},
        {"gn.q", "3"},               {"gn.seed", "11"},
        {"gn.samples", "50"},        {"gn.n_cells", "256"},
        {"gn.epsilons", "1,0.5"},    {"gn.sampler", "bump_sum"},
        {"balance_tol", "1e-9"},     {"gronwall_inflation", "0.5"},
        {"label", "demo"},
    };
    const RunConfig c = decode_config(kv);
    CHECK(c.init.v0_family == V0Family::gaussian_pos);
    CHECK(c.init.v0_sigma == 1.5);
    CHECK(c.init.zeta_family == ZetaFamily::zero);
    CHECK(c.epsilon == 0.25);
    CHECK(c.dx == 0.0625);
    CHECK(c.n_cells == 0);
    CHECK(c.T == 0.5);
    CHECK(c.solver.chi == 0.7);
    CHECK(c.solver.cfl_safety == 0.8);
    CHECK(c.monitors.p_list == std::vector<double>{2.0, 3.0});
    CHECK(c.monitors.q_tilde == 3.0);
    CHECK(c.monitors.cutoff.plateau() == 0.5);
    CHECK(c.monitors.cutoff.support() == 1.25);
    CHECK(c.monitors.sample_interval == 0.005);
    CHECK(c.epsilons == std::vector<double>{0.5, 0.25, 0.125});
    CHECK(c.window_W == 0.5);
    CHECK(c.distance_q_list == std::vector<double>{1.0, 2.0});
    CHECK(c.gn_case.form == GNForm::sup);
    CHECK(c.gn_case.q == 3.0);
    CHECK(c.gn_sampler.kind == SamplerKind::bump_sum);
    CHECK(c.gn_sampler.seed == 11);
    CHECK(c.gn_samples == 50);
    CHECK(c.gn_cells == 256);
    CHECK(c.gn_epsilons == std::vector<double>{1.0, 0.5});
    CHECK(c.balance_tol == 1e-9);
    CHECK(c.gronwall_inflation == 0.5);
    CHECK(c.label == "demo");

    // "u0.family=sech" is not a recognized u family
    CHECK_THROWS_AS(decode_config({{"u0.family", "sech"}}), ConfigError);
    CHECK_THROWS_AS(decode_config({{"episolon", "1"}}), ConfigError);
    CHECK_THROWS_AS(decode_config({{"epsilon", "abc"}}), ConfigError);
    CHECK_THROWS_AS(decode_config({{"n_cells", "2.5"}}), ConfigError);
    CHECK_THROWS_AS(decode_config({{"hypothesis_exempt", "maybe"}}), ConfigError);
    CHECK_THROWS_AS(decode_config({{"p_list", "2,,3"}}), ConfigError);
    CHECK_THROWS_AS(decode_config({{"n_cells", "64"}, {"dx", "0.1"}}), ConfigError);
}

TEST_CASE("grid resolution from config", "[io]") {
    RunConfig c = decode_config({{"epsilon", "0.5"}, {"dx", "0.03125"}});
    const Grid g = grid_from_config(c);
    CHECK(g.n_cells == 128);
    CHECK(g.dx == 0.03125);

    RunConfig direct = decode_config({{"epsilon", "0.5"}, {"n_cells", "64"}});
    CHECK(grid_from_config(direct).n_cells == 64);

    RunConfig neither = decode_config({{"epsilon", "0.5"}});
    CHECK_THROWS_AS(grid_from_config(neither), ConfigError);
}

TEST_CASE("g17 round trips doubles exactly", "[io]") {
    for (double x : {0.1, 1.0 / 3.0, std::numbers::pi, 1e-300, -2.5e17,
                     4.450147717014403e-308, 0.0, 6.02214076e23}) {
        const std::string s = g17(x);
        CHECK(std::strtod(s.c_str(), nullptr) == x);
    }
    CHECK(gshort(0.5) == "0.5");
    CHECK(gshort(2.0) == "2");
}

TEST_CASE("snapshot files round trip bitwise", "[io]") {
    const RunConfig cfg = tiny_sim_config();
    const Grid g = grid_from_config(cfg);
    const State init = build_initial(cfg.init, g);
    const Trajectory tr = simulate(init, g, cfg.solver, cfg.monitors, cfg.T, cfg.label);
    REQUIRE(tr.snapshots.size() == 4); // t = 0, 0.02, 0.04, 0.06

    const fs::path dir = fresh_dir("nutaxis_io_snap");
    write_snapshots(tr, dir);
    for (std::size_t m = 0; m < tr.snapshots.size(); ++m) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%06zu.csv", m);
        const SnapshotFile sf = read_snapshot(dir / name);
        CHECK(sf.t == tr.snapshots[m].t);
        CHECK(sf.epsilon == g.epsilon);
        CHECK(sf.n == g.n_cells);
        CHECK(sf.dx == g.dx);
        REQUIRE(sf.u.size() == g.n_cells);
        for (std::size_t i = 0; i < g.n_cells; ++i) {
            CHECK(sf.u[i] == tr.snapshots[m].u[i]);
            CHECK(sf.v[i] == tr.snapshots[m].v[i]);
        }
    }

    const fs::path bad = dir / "bad.csv";
    spit(bad, "not a header\nx,u,v\n0,1,1\n");
    CHECK_THROWS_AS(read_snapshot(bad), IoError);
}

TEST_CASE("simulate mode writes a deterministic bundle", "[io]") {
    const RunConfig cfg = tiny_sim_config();
    const fs::path d1 = fresh_dir("nutaxis_io_sim1");
    const fs::path d2 = fresh_dir("nutaxis_io_sim2");
    CHECK(execute(RunMode::simulate, cfg, d1, WeakFormVariant::derived) == 0);
    CHECK(execute(RunMode::simulate, cfg, d2, WeakFormVariant::derived) == 0);
    for (const char* f : {"functionals.csv", "report.csv", "report.txt"})
        CHECK(fs::exists(d1 / f));
    CHECK(fs::exists(d1 / "snapshots" / "snap_000000.csv"));
    CHECK(fs::exists(d1 / "snapshots" / "snap_000003.csv"));

    // Bit-identical reruns: no time stamps, no nondeterministic reductions.
    CHECK(slurp(d1 / "functionals.csv") == slurp(d2 / "functionals.csv"));
    CHECK(slurp(d1 / "report.csv") == slurp(d2 / "report.csv"));

    const auto lines = split_lines(slurp(d1 / "functionals.csv"));
    REQUIRE(lines.size() == 8); // header + rows at t = 0, 0.01, ..., 0.06
    CHECK(lines[0] == join(functional_columns(cfg.monitors), ","));
    CHECK(split_fields(lines[1]).size() == functional_columns(cfg.monitors).size());

    const auto rep = split_lines(slurp(d1 / "report.csv"));
    REQUIRE(!rep.empty());
    CHECK(rep[0] == "check,pass,min_margin,worst_time,tolerance,fitted,notes");
    bool saw_hypotheses = false, saw_balance = false, saw_residual = false;
    for (const auto& line : rep) {
        if (line.rfind("initial_hypotheses,", 0) == 0) saw_hypotheses = true;
        if (line.rfind("balance_total_mass,", 0) == 0) saw_balance = true;
        if (line.rfind("weak_residual_max,", 0) == 0) saw_residual = true;
    }
    CHECK(saw_hypotheses);
    CHECK(saw_balance);
    CHECK(saw_residual);
}

TEST_CASE("verify accepts genuine output and flags tampering", "[io]") {
    const RunConfig cfg = tiny_sim_config();
    const fs::path d = fresh_dir("nutaxis_io_verify");
    REQUIRE(execute(RunMode::simulate, cfg, d, WeakFormVariant::derived) == 0);

    SECTION("genuine bundle passes") {
        CHECK(execute(RunMode::verify, cfg, d, WeakFormVariant::derived) == 0);
        CHECK(fs::exists(d / "verify" / "report.csv"));
    }

    SECTION("tampered functional row fails") {
        auto lines = split_lines(slurp(d / "functionals.csv"));
        REQUIRE(lines.size() >= 2);
        auto fields = split_fields(lines[1]); // the t = 0 row
        fields[1] = "1.5";                    // mass_u
        lines[1] = join(fields, ",");
        spit(d / "functionals.csv", join(lines, "\n") + "\n");
        CHECK(execute(RunMode::verify, cfg, d, WeakFormVariant::derived) == 1);
    }

    SECTION("tampered snapshot fails") {
        const fs::path sp = d / "snapshots" / "snap_000000.csv";
        auto lines = split_lines(slurp(sp));
        REQUIRE(lines.size() >= 4);
        auto fields = split_fields(lines[2]); // first x,u,v row
        fields[1] = "-1";
        lines[2] = join(fields, ",");
        spit(sp, join(lines, "\n") + "\n");
        CHECK(execute(RunMode::verify, cfg, d, WeakFormVariant::derived) == 1);
    }

    SECTION("mismatched grid fails") {
        RunConfig other = cfg;
        other.n_cells = 128;
        CHECK(execute(RunMode::verify, other, d, WeakFormVariant::derived) == 1);
    }

    SECTION("missing snapshots are an input error") {
        fs::remove_all(d / "snapshots");
        CHECK_THROWS_AS(execute(RunMode::verify, cfg, d, WeakFormVariant::derived), IoError);
    }
}

TEST_CASE("sweep mode writes members, distances and checks", "[io]") {
    const KeyValues kv = {
        {"epsilon", "0.5"},       {"dx", "0.0625"},
        {"T", "0.05"},            {"sample_interval", "0.01"},
        {"snapshot_interval", "0.05"}, {"cutoff.R", "0.5"},
        {"cutoff.S", "1.5"},      {"epsilons", "0.5,0.25,0.125"},
        {"window_W", "1"},        {"distance_q_list", "1,2"},
        {"gronwall_inflation", "0.5"},
    };
    const RunConfig cfg = decode_config(kv);
    const fs::path d = fresh_dir("nutaxis_io_sweep");
    CHECK(execute(RunMode::sweep, cfg, d, WeakFormVariant::derived) == 0);
    for (const char* m : {"eps_0.5", "eps_0.25", "eps_0.125"}) {
        CHECK(fs::exists(d / m / "functionals.csv"));
        CHECK(fs::exists(d / m / "snapshots" / "snap_000000.csv"));
    }
    const auto sweep = split_lines(slurp(d / "sweep.csv"));
    REQUIRE(!sweep.empty());
    CHECK(sweep[0] == "field,q,j,k,eps_j,eps_k,distance");
    CHECK(sweep.size() == 1 + 2 * 2 * 3); // fields x q values x pairs

    const auto rep = slurp(d / "report.csv");
    CHECK(rep.find("cauchy_u_q1,") != std::string::npos);
    CHECK(rep.find("cauchy_v_q2,") != std::string::npos);
    CHECK(rep.find("window_v_positive,") != std::string::npos);
    CHECK(rep.find("gronwall_") != std::string::npos);
    CHECK(rep.find("diss_quartic_time_integral,") != std::string::npos);

    // dx is mandatory for a sweep
    RunConfig bad = cfg;
    bad.dx = 0.0;
    bad.n_cells = 64;
    CHECK_THROWS_AS(execute(RunMode::sweep, bad, d, WeakFormVariant::derived), ConfigError);
}

TEST_CASE("gn-test mode writes ratio table and checks", "[io]") {
    const KeyValues kv = {
        {"gn.samples", "20"},  {"gn.n_cells", "128"},
        {"gn.epsilons", "1,0.5,0.25"}, {"gn.seed", "7"},
    };
    const RunConfig cfg = decode_config(kv);
    const fs::path d = fresh_dir("nutaxis_io_gn");
    CHECK(execute(RunMode::gn_test, cfg, d, WeakFormVariant::derived) == 0);
    const auto gn = split_lines(slurp(d / "gn.csv"));
    REQUIRE(gn.size() == 4); // header + one row per epsilon
    CHECK(gn[0] == "epsilon,max_ratio,argmax_sample");
    const auto rep = slurp(d / "report.csv");
    CHECK(rep.find("rescaling_identities,") != std::string::npos);
    CHECK(rep.find("gn_ratio_variation,") != std::string::npos);
    CHECK(rep.find("gn_constant_closed_form,") != std::string::npos);
}
