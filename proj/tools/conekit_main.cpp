#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "conekit/io/run.hpp"

int main(int argc, char** argv) {
    if (const char* cap = std::getenv("CONEKIT_THREADS"))
        Eigen::setNbThreads(std::max(1, std::atoi(cap)));

    CLI::App app{"conekit: cone Laplacian analysis, operator probes and Cahn-Hilliard runs"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";

    const char* names[] = {"analyze", "probe-resolvent", "probe-bip", "solve", "fit", "norm"};
    const char* blurbs[] = {"conormal tables: roots, weight window, poles, singular basis",
                            "sectorial resolvent survey of c - Laplacian",
                            "imaginary-power envelope of c - Laplacian",
                            "integrate the Cahn-Hilliard equation",
                            "fit near-tip exponents of a solve snapshot",
                            "weighted Sobolev norm of a snapshot"};
    for (int k = 0; k < 6; ++k) {
        auto* sub = app.add_subcommand(names[k], blurbs[k]);
        sub->add_option("--config", config_path, "TOML configuration file")->required();
        sub->add_option("--out", out_dir, "output directory");
    }

    CLI11_PARSE(app, argc, argv);
    std::string subcommand = app.get_subcommands().front()->get_name();

    std::ifstream in(config_path);
    if (!in) {
        std::fprintf(stderr, "error: cannot read config file '%s'\n", config_path.c_str());
        return 2;
    }
    std::stringstream bytes;
    bytes << in.rdbuf();

    try {
        conekit::io::RunConfig cfg = conekit::io::parse_config_text(bytes.str());
        auto manifest = conekit::io::run(subcommand, cfg, bytes.str(), out_dir);
        for (const auto& check : manifest.checks)
            std::printf("[%s] %s%s%s\n", check.passed ? "ok" : "FAIL", check.name.c_str(),
                        check.detail.empty() ? "" : ": ", check.detail.c_str());
        return manifest.all_passed() ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
