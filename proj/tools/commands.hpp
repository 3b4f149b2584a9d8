#pragma once

#include <string>
#include <vector>

#include "config.hpp"

namespace qatlab {

enum ExitCode { kPass = 0, kCheckFailed = 1, kUsage = 2 };

struct Options {
    std::string out_dir;  // empty: current directory for run, stdout for the others
    bool quiet = false;
};

struct SystemArgs {
    std::string preset = "damped_harmonic";
    double gamma = 0.2, omega = 1.0;
    double x_min = -12.0, x_max = 12.0;
    int n = 256;
};

int run_scenario(const ScenarioConfig& cfg, const Options& opt);
int verify_algebra(const SystemArgs& sys, double t, double tolerance, const Options& opt);
int compare_propagators(const SystemArgs& sys, const std::vector<double>& times, double cn_dt,
                        const Options& opt);
int spectrum(const SystemArgs& sys, double omega_tilde, double gamma_tilde, double t, int n_max,
             double tolerance, const Options& opt);
int dump_basis(const SystemArgs& sys, double t_max, int samples, const Options& opt);

}  // namespace qatlab
