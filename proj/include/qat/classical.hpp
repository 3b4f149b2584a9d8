#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qat/cumulative.hpp"

namespace qat {

using TimeFn = std::function<double(double)>;

// Coefficients of  x'' + f'(t) x' + omega^2(t) x = Lambda(t).
// An empty forcing_lambda means Lambda == 0; an empty friction_rate means f'
// is taken by central difference.
struct LsodeSpec {
    TimeFn friction_f;
    TimeFn friction_rate;
    TimeFn omega_sq;
    TimeFn forcing_lambda;
    double mass = 1.0;
    double hbar = 1.0;
    std::string label;
    // Set when f = gamma t, omega constant and Lambda = 0 (needed by the
    // closed-form sixth-order Magnus generator).
    struct DampedHo {
        double gamma, omega;
    };
    std::optional<DampedHo> damped_ho;

    double f(double t) const;
    double fdot(double t) const;
    double w2(double t) const;
    double lambda(double t) const;
    bool forced() const { return static_cast<bool>(forcing_lambda); }

    // Throws InvalidArgument for m, hbar <= 0 or f(0) != 0.
    void validate() const;
};

struct PresetParams {
    double gamma = 0.2;
    double omega = 1.0;
    double force_amplitude = 1.0;
    double force_frequency = 2.0;
    double mass = 1.0;
    double hbar = 1.0;
};

// "free", "damped_particle", "harmonic", "damped_harmonic", "forced_damped_harmonic"
LsodeSpec make_preset(std::string_view name, const PresetParams& p = {});
const std::vector<std::string>& preset_names();

struct BasisPoint {
    double u1 = 0, u2 = 1, up = 0;
    double du1 = 1, du2 = 0, dup = 0;
    double wronskian() const { return du1 * u2 - u1 * du2; }
};

// Time interval on which u2 has no zero. Ends that came from a zero of u2 are
// marked clipped and sit strictly inside the zero.
struct Window {
    double lo = 0, hi = 0;
    bool clipped_lo = false, clipped_hi = false;
    double zero_lo = 0, zero_hi = 0;
    bool contains(double t) const { return t >= lo && t <= hi; }
};

namespace detail {
struct BasisSource {
    virtual ~BasisSource() = default;
    virtual BasisPoint eval(double t) const = 0;
    virtual double t_min() const = 0;
    virtual double t_max() const = 0;
};
}  // namespace detail

class ClassicalBasis {
public:
    ClassicalBasis() = default;
    ClassicalBasis(std::shared_ptr<const detail::BasisSource> src,
                   std::array<double, 4> mix = {1, 0, 0, 1});

    // Throws OutsideWindow when t is not in window().
    BasisPoint at(double t) const;
    // No window check; t must lie in the integration range.
    BasisPoint raw(double t) const;
    double wronskian(double t) const { return at(t).wronskian(); }

    const Window& window() const { return window_; }
    double range_min() const;
    double range_max() const;
    // (a, b, c, d) with u1' = a u1 + b u2, u2' = c u1 + d u2.
    const std::array<double, 4>& mix() const { return mix_; }

    // SL(2,R) reshuffle of the homogeneous pair; the window is recomputed
    // from the new u2 over the full integration range.
    ClassicalBasis shifted(double a, double b, double c, double d) const;

private:
    void compute_window();

    std::shared_ptr<const detail::BasisSource> src_;
    std::array<double, 4> mix_{1, 0, 0, 1};
    Window window_;
};

// Adaptive Dormand-Prince integration of the homogeneous pair and of u_p,
// sampled every <= 1e-3 and interpolated with cubic Hermite.
ClassicalBasis solve_basis(const LsodeSpec& spec, double t_max, double t_min = 0.0);

// Closed forms for f = gamma t, omega constant, all three damping regimes.
ClassicalBasis analytic_basis_damped_ho(double gamma, double omega,
                                        double t_min = -10.0, double t_max = 10.0);

// u_p = K1 u1 + K2 u2 with K1 = int u2 Lambda / W, K2 = -int u1 Lambda / W.
class ParticularSolution {
public:
    ParticularSolution() = default;
    ParticularSolution(const LsodeSpec& spec, const ClassicalBasis& basis);

    double K1(double t) const;
    double K2(double t) const;
    double up(double t) const;
    double dup(double t) const;  // K1 u1' + K2 u2' (the K' terms cancel)
    bool trivial() const { return !forced_; }

private:
    bool forced_ = false;
    ClassicalBasis basis_;
    CumulativeIntegral k1_, k2_;
};

ParticularSolution particular_solution(const LsodeSpec& spec, const ClassicalBasis& basis);

// max |u'' + f' u' + w^2 u| for u = a u1 + b u2 on [t0, t1], with u'' taken
// by central difference of the interpolated u'.
double homogeneous_residual(const LsodeSpec& spec, const ClassicalBasis& basis,
                            double a, double b, double t0, double t1);
// Same for u_p against Lambda.
double particular_residual(const LsodeSpec& spec, const ParticularSolution& ps,
                           double t0, double t1);

}  // namespace qat
