#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "commands.hpp"
#include "qat/errors.hpp"

namespace {

void system_options(CLI::App* cmd, qatlab::SystemArgs& sys) {
    cmd->add_option("--preset", sys.preset, "Classical system preset")
        ->check(CLI::IsMember(qat::preset_names()));
    cmd->add_option("--gamma", sys.gamma, "Damping rate");
    cmd->add_option("--omega", sys.omega, "Oscillator frequency");
    cmd->add_option("--x-min", sys.x_min, "Left edge of the box");
    cmd->add_option("--x-max", sys.x_max, "Right edge of the box");
    cmd->add_option("--n", sys.n, "Grid points (power of two)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum Arnold transformation lab"};
    app.require_subcommand(1);
    qatlab::Options opt;
    app.add_option("--out-dir", opt.out_dir, "Directory for output files");
    app.add_flag("--quiet", opt.quiet, "Suppress console output");

    std::string config;
    auto* run = app.add_subcommand("run", "Run a scenario file");
    run->add_option("config", config, "Scenario file")->required()->check(CLI::ExistingFile);

    qatlab::SystemArgs alg_sys;
    double alg_t = 0.5, alg_tol = 1e-6;
    auto* alg = app.add_subcommand("verify-algebra", "Commutator table at one time");
    system_options(alg, alg_sys);
    alg->add_option("--t", alg_t, "Time");
    alg->add_option("--tolerance", alg_tol, "Pass threshold");

    qatlab::SystemArgs cmp_sys;
    cmp_sys.x_min = -16, cmp_sys.x_max = 16, cmp_sys.n = 512;
    std::vector<double> cmp_times{0.25, 0.5, 1.0};
    double cmp_dt = 1e-4;
    auto* cmp = app.add_subcommand("compare-propagators", "Exact, Crank-Nicolson and Magnus");
    system_options(cmp, cmp_sys);
    cmp->add_option("--times", cmp_times, "Comparison times");
    cmp->add_option("--cn-dt", cmp_dt, "Crank-Nicolson step");

    qatlab::SystemArgs sp_sys;
    double sp_w = 1.0, sp_g = 0.2, sp_t = 0.0, sp_tol = 1e-5;
    int sp_n = 5;
    auto* sp = app.add_subcommand("spectrum", "Rayleigh quotients of the invariant");
    system_options(sp, sp_sys);
    sp->add_option("--omega-tilde", sp_w, "Invariant frequency");
    sp->add_option("--gamma-tilde", sp_g, "Invariant damping");
    sp->add_option("--t", sp_t, "Time");
    sp->add_option("--n-max", sp_n, "Highest level");
    sp->add_option("--tolerance", sp_tol, "Pass threshold");

    qatlab::SystemArgs db_sys;
    double db_t = 1.0;
    int db_samples = 101;
    auto* db = app.add_subcommand("dump-basis", "Classical solutions and time map");
    system_options(db, db_sys);
    db->add_option("--t-max", db_t, "End time");
    db->add_option("--samples", db_samples, "Number of samples");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : qatlab::kUsage;
    }

    try {
        if (*run) return qatlab::run_scenario(qatlab::load_config(config), opt);
        if (*alg) return qatlab::verify_algebra(alg_sys, alg_t, alg_tol, opt);
        if (*cmp) return qatlab::compare_propagators(cmp_sys, cmp_times, cmp_dt, opt);
        if (*sp) return qatlab::spectrum(sp_sys, sp_w, sp_g, sp_t, sp_n, sp_tol, opt);
        if (*db) return qatlab::dump_basis(db_sys, db_t, db_samples, opt);
    } catch (const qatlab::ConfigParse& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return qatlab::kUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s%s%s\n", config.empty() ? "" : config.c_str(),
                     config.empty() ? "" : ": ", e.what());
        return qatlab::kUsage;
    }
    return qatlab::kUsage;
}
