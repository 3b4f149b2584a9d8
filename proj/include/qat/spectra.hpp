#pragma once

#include <vector>

#include "qat/operators.hpp"
#include "qat/special.hpp"

namespace qat {

struct HStarParams {
    double omega_tilde = 1.0;
    double gamma_tilde = 0.0;

    HStarParams() = default;
    HStarParams(double omega, double gamma);  // InvalidArgument on negatives

    double omega_tilde_sq_minus() const {  // omega~^2 - gamma~^2 / 4
        return omega_tilde * omega_tilde - 0.25 * gamma_tilde * gamma_tilde;
    }
    // sqrt(omega~^2 - gamma~^2/4): real, or i|.| when imaginary. The critical
    // value is replaced by 1e-6.
    cplx Omega_tilde() const;
    bool real_branch() const { return omega_tilde_sq_minus() >= 0; }
};

struct EigenSolution {
    cplx nu;
    cplx C1 = 1.0, C2 = 0.0;
    HStarParams params;
};

// (1/2m) P^2 + (m w~^2 / 2) X^2 + (g~/2) XP; ForcedNotSupported with forcing.
OperatorRep hstar_operator(const QatContext& ctx, const HStarParams& p);
// hbar Omega~ (nu + 1/2).
cplx hstar_eigenvalue(const HStarParams& p, cplx nu, double hbar);

enum class PhiNormalization {
    Unit,       // rescaled to unit L2 norm on the integer branch
    AsPrinted,  // the printed prefactor only
};
// |phi_n|^2 integrates to this under the printed prefactor.
double printed_norm_squared(const HStarParams& p, double m, double hbar);

// Closed-form phi_nu(x, t) on the grid, including the forced shifts when the
// context carries Lambda. The (.)^{nu+1/2} factor follows the phase of its
// base continuously from t = 0. OutsideWindow outside the basis window;
// InvalidArgument when (u2 - g~ u1/2)^2 + Omega~^2 u1^2 is not positive.
WaveFunction eigenfunction_phi(const QatContext& ctx, const EigenSolution& s, double t,
                               const Grid& g, PhiNormalization norm = PhiNormalization::AsPrinted);

// Integer branch, nu = n, C2 = 0; ComplexOmegaTilde when omega~ < gamma~/2.
WaveFunction eigenfunction_phi_n(const QatContext& ctx, const HStarParams& p, int n, double t,
                                 const Grid& g, PhiNormalization norm = PhiNormalization::Unit);

// nu = -1/2 + i lambda; sign > 0 selects (C1, C2) = (1, 0), sign < 0 selects
// (0, 1). RealOmegaTilde when omega~ > gamma~/2. Not normalizable.
WaveFunction continuous_branch_phi(const QatContext& ctx, const HStarParams& p, double lambda,
                                   double t, int sign, const Grid& g);

// <phi_n | H* | phi_n> / <phi_n | phi_n> for n = 0..n_max at time t.
std::vector<double> rayleigh_quotients(const QatContext& ctx, const HStarParams& p, int n_max,
                                       double t, const Grid& g);

// Smooth bump: 1 for |x - c| <= flat, 0 for |x - c| >= edge, C-infinity between.
Eigen::VectorXd smooth_taper(const Grid& g, double flat, double edge);
// Residuals of tapered states, read off only where |x - c| <= measure. Both
// are max-norm ratios like schrodinger_residual.
double tapered_eigen_residual(const OperatorRep& op, cplx value, const WaveFunction& phi,
                              double flat, double edge, double measure);
double tapered_schrodinger_residual(const LsodeSpec& spec, const std::vector<WaveFunction>& series,
                                    double flat, double edge, double measure);

}  // namespace qat
