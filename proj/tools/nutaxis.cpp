// Command-line front end: simulate | sweep | verify | gn-test, each driven by
// a flat key=value config file.  Exit codes: 0 all checks pass, 1 at least
// one runtime check failed, 2 configuration or input error.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nutaxis/io.hpp"

int main(int argc, char** argv) {
    CLI::App app{"finite-volume simulator and verification harness for a "
                 "degenerate cross-diffusion system"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string variant_name = "derived";

    auto add_common = [&](CLI::App* sub, bool with_variant) {
        sub->add_option("--config", config_path, "path to key=value config file")
            ->required();
        sub->add_option("--out", out_dir, "output directory (default: out)");
        if (with_variant)
            sub->add_option("--variant", variant_name,
                            "weak-form variant: printed|derived (default: derived)")
                ->check(CLI::IsMember({"printed", "derived"}));
    };

    CLI::App* sim = app.add_subcommand("simulate", "run one trajectory and its checks");
    CLI::App* swp = app.add_subcommand("sweep", "run a regularization ladder and its checks");
    CLI::App* ver = app.add_subcommand("verify", "re-derive and cross-check a simulate output");
    CLI::App* gnt = app.add_subcommand("gn-test", "probe interpolation inequalities on large balls");
    add_common(sim, true);
    add_common(swp, true);
    add_common(ver, false);
    add_common(gnt, false);

    CLI11_PARSE(app, argc, argv);

    try {
        const nutaxis::RunConfig cfg =
            nutaxis::decode_config(nutaxis::parse_config_file(config_path));
        const nutaxis::WeakFormVariant variant = variant_name == "printed"
                                                     ? nutaxis::WeakFormVariant::printed
                                                     : nutaxis::WeakFormVariant::derived;
        nutaxis::RunMode mode = nutaxis::RunMode::simulate;
        if (swp->parsed()) mode = nutaxis::RunMode::sweep;
        else if (ver->parsed()) mode = nutaxis::RunMode::verify;
        else if (gnt->parsed()) mode = nutaxis::RunMode::gn_test;

        const int rc = nutaxis::execute(mode, cfg, out_dir, variant);
        if (rc == 0) std::cout << "all checks passed; outputs in " << out_dir << "\n";
        else std::cout << "CHECK FAILURES; see " << out_dir << "/report.txt\n";
        return rc;
    } catch (const nutaxis::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nutaxis::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
