#pragma once

#include <vector>

#include "qat/qat_core.hpp"

namespace qat {

// U(t) psi0 from the factorized exact operator. For the normalized pair the
// factors are applied right to left: dilation by u2, translation by u_p, free
// kernel with tau_eff = u1 u2, then the quadratic, linear and global phases.
// A shifted pair goes through qat_inverse(free_evolve(qat_forward(psi0))).
WaveFunction evolve_qat_exact(const QatContext& ctx, const WaveFunction& psi0, double t,
                              bool check_support = true);
// U(t)^dagger psi_t = U(t)^{-1} psi_t, returning a state at t = 0.
WaveFunction evolve_qat_exact_adjoint(const QatContext& ctx, const WaveFunction& psi_t, double t,
                                      bool check_support = true);

// Smallest c > 0 (from a doubling ladder) such that u2 + c u1 stays positive
// up to t_target; returns the context on that shifted pair. OutsideWindow
// when none is found.
QatContext extend_window(const QatContext& ctx, double t_target);

// Crank-Nicolson with a fourth-order finite-difference Laplacian (zero
// Dirichlet ends) and the Hamiltonian at the step midpoint. dt may be
// negative to run backwards. The step is shrunk so the run ends exactly at
// psi0.time + t.
WaveFunction evolve_crank_nicolson(const LsodeSpec& spec, const WaveFunction& psi0, double t,
                                   double dt);
// States at each requested time (ascending, >= psi0.time).
std::vector<WaveFunction> evolve_crank_nicolson_series(const LsodeSpec& spec,
                                                       const WaveFunction& psi0,
                                                       const std::vector<double>& times,
                                                       double dt);
// Same stepping applied to every column of cols (time t0 -> t0 + t).
CMat crank_nicolson_columns(const LsodeSpec& spec, const Grid& g, CMat cols, double t0, double t,
                            double dt);

// H(t) = e^{-f} K + e^{f} w^2 V - e^{f} Lambda L as a dense spectral matrix.
CMat hamiltonian_matrix(const LsodeSpec& spec, const Grid& g, double t);

// Omega_1 + ... + Omega_order (order 1..3) of the Magnus series for
// U' = -(i/hbar) H U, by nested 16-point Gauss-Legendre quadrature.
CMat magnus_omega(const LsodeSpec& spec, const Grid& g, double t, int order);
// Only the term of the given order.
CMat magnus_term(const LsodeSpec& spec, const Grid& g, double t, int order);

// Closed-form sixth-order generator for the damped oscillator. The
// x d/dx block carries gamma w^2 t^2 / 6; AsPrinted keeps the single power of
// t found in the printed expansion, which is only first-order accurate.
enum class Omega6Form { Corrected, AsPrinted };
CMat magnus_omega6_dho(double gamma, double omega, double t, const Grid& g, double m = 1.0,
                       double hbar = 1.0, Omega6Form form = Omega6Form::Corrected);

// Scaling and squaring with the degree-13 Pade approximant.
CMat matrix_exponential(const CMat& a);

enum class PropagatorMode { QatExact, CrankNicolson, Magnus };

struct EvolutionOperator {
    QatContext ctx;
    PropagatorMode mode = PropagatorMode::QatExact;
    double cn_dt = 1e-4;
    int magnus_order = 6;  // 1..3 from the nested integrals, 6 for the closed form

    WaveFunction apply(const WaveFunction& psi0, double t) const;
    WaveFunction apply_adjoint(const WaveFunction& psi_t, double t) const;
    // Dense realizations, column j = image of the j-th unit vector.
    CMat matrix(const Grid& g, double t) const;
    CMat adjoint_matrix(const Grid& g, double t) const;

private:
    CMat magnus_generator(const Grid& g, double t) const;
};

}  // namespace qat
