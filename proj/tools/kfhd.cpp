#include "kfhd/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"kfhd: stochastic kinetic Fokker-Planck solver and diagnostics"};
    app.set_version_flag("--version", std::string(kfhd::code_version()));
    app.require_subcommand(1, 1);

    kfhd::RunRequest req;
    int threads = 0;
    app.add_option("-j,--threads", threads, "worker threads (default: KFHD_THREADS or hardware)")->check(CLI::NonNegativeNumber);

    auto* sim = app.add_subcommand("simulate", "integrate the SPDE and write snapshots, diagnostics and a manifest");
    sim->add_option("-c,--config", req.config_path, "YAML run configuration")->required();
    sim->add_option("-o,--out", req.out_dir, "output directory")->required();

    auto* part = app.add_subcommand("particles", "simulate the particle system and compare with the mean-field PDE");
    part->add_option("-c,--config", req.config_path, "YAML run configuration")->required();
    part->add_option("-o,--out", req.out_dir, "output directory")->required();

    auto* diag = app.add_subcommand("diagnose", "recompute diagnostics and residuals for a finished simulate run");
    diag->add_option("-i,--input,run", req.input, "directory written by simulate")->required();
    diag->add_option("-o,--out", req.out_dir, "output directory (default: <run>/diagnose)");

    auto* besov = app.add_subcommand("besov", "anisotropic Besov block norms of a snapshot");
    besov->add_option("-i,--input,snapshot", req.input, "snapshot file")->required();
    besov->add_option("-c,--config", req.config_path, "YAML configuration supplying besov.s and besov.p");
    besov->add_option("-o,--out", req.out_dir, "output directory")->required();
    besov->add_option("-s", req.besov_s, "smoothness index");
    besov->add_option("-p", req.besov_p, "integrability index (>= 1)");

    auto* kernel = app.add_subcommand("kernel", "frequency-localized moments of the kinetic kernel");
    kernel->add_option("-c,--config", req.config_path, "YAML configuration supplying grid and moments");
    kernel->add_option("-o,--out", req.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kfhd::kExitInput;
    }
    req.command = app.get_subcommands().front()->get_name();
    req.threads = threads;
    return kfhd::orchestrate(req, std::cerr);
}
