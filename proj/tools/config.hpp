#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qat/classical.hpp"

namespace qatlab {

struct ConfigParse : std::runtime_error {
    ConfigParse(const std::string& file, int line, int col, const std::string& msg);
    int line, col;
};

struct InitialState {
    std::string kind = "gaussian";  // gaussian | plane_wave | eigen
    double x0 = 0.0, p0 = 0.0, sigma = 1.0;
    double k = 0.0;
    int n = 0;
};

// Flat sectioned text:
//
//   [system]        preset or f / omega_sq / lambda coefficient expressions
//   [units]         m, hbar
//   [grid]          x_min, x_max, n
//   [time]          t_max, samples, cn_dt, propagator
//   [initial_state] kind, x0, p0, sigma, k, n
//   [spectrum]      omega_tilde, gamma_tilde, n_max
//   [outputs]       list, tolerance, seed
struct ScenarioConfig {
    std::string path;

    std::string preset;  // empty when the coefficients are given directly
    qat::PresetParams params;
    std::string f_expr, w2_expr, lambda_expr;

    double x_min = -16.0, x_max = 16.0;
    int n = 512;

    double t_max = 1.0;
    int samples = 11;
    double cn_dt = 1e-4;
    std::string propagator = "qat_exact";  // qat_exact | crank_nicolson

    InitialState initial;

    std::optional<double> omega_tilde, gamma_tilde;
    int n_max = 5;

    std::vector<std::string> outputs;
    double tolerance = 1e-5;
    std::uint64_t seed = 1;

    bool wants(const std::string& what) const;
};

ScenarioConfig parse_config(const std::string& text, const std::string& name = "<config>");
ScenarioConfig load_config(const std::string& path);

// Coefficient expressions, all in absolute t:
//   const c | poly c0 c1 ... | cos A w | sin A w | exp A k | linear_exp A k (A(1 - e^{-k t}))
//   pwpoly t1 t2 ... : c0 c1 ... : c0 c1 ... (one coefficient list per segment)
qat::TimeFn parse_coefficient(const std::string& expr);

qat::LsodeSpec build_spec(const ScenarioConfig& cfg);

const std::vector<std::string>& known_outputs();

}  // namespace qatlab
