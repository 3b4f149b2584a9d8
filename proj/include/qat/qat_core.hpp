#pragma once

#include <vector>

#include "qat/classical.hpp"
#include "qat/cumulative.hpp"
#include "qat/wavegrid.hpp"

namespace qat {

// Everything the transformation needs at one instant.
struct QatPoint {
    BasisPoint b;
    double W = 1;    // Wronskian of the (possibly shifted) pair
    double up = 0;   // particular solution and its derivative
    double dup = 0;
    double Ap = 0;   // int_0^t (up^2 w^2 - up'^2) / W
    double tau = 0;  // u1 / u2
};

class QatContext {
public:
    QatContext(LsodeSpec spec, ClassicalBasis basis);

    const LsodeSpec& spec() const { return spec_; }
    const ClassicalBasis& basis() const { return basis_; }
    const ParticularSolution& particular() const { return ps_; }
    const Window& window() const { return basis_.window(); }
    double mass() const { return spec_.mass; }
    double hbar() const { return spec_.hbar; }
    // True when the pair obeys u1(0)=0, u2(0)=1, u1'(0)=1, u2'(0)=0.
    bool normalized() const;

    QatPoint at(double t) const;  // OutsideWindow
    double action(double t) const;

    double map_time(double t) const;       // OutsideWindow
    double inverse_time(double tau) const;  // TimeNotInImage

    // New context on the shifted pair (a, b, c, d); see ClassicalBasis::shifted.
    QatContext shifted(double a, double b, double c, double d) const;

private:
    LsodeSpec spec_;
    ClassicalBasis basis_;
    ParticularSolution ps_;
    CumulativeIntegral action_;
};

// solve_basis on [t_min, t_max] followed by context construction.
QatContext make_context(const LsodeSpec& spec, double t_max, double t_min = 0.0);

// Lsode frame at time psi.time -> free frame at tau. Order: shift by -u_p,
// the three phases, then the dilation kappa = (x - u_p) / u2 with sqrt(u2).
// SupportOverflow when the dilation pushes mass against the box edge and
// check_support is set.
WaveFunction qat_forward(const QatContext& ctx, const WaveFunction& phi, bool check_support = true);
// Exact reverse of qat_forward; the target time comes from inverse_time.
WaveFunction qat_inverse(const QatContext& ctx, const WaveFunction& varphi,
                         bool check_support = true);
// As qat_inverse with the target time t given directly.
WaveFunction qat_inverse_at(const QatContext& ctx, const WaveFunction& varphi, double t,
                            bool check_support = true);

// H(t) psi with spectral second derivative:
// -(hbar^2/2m) e^{-f} psi'' + (m w^2 x^2 / 2 - m Lambda x) e^{f} psi.
CVec apply_hamiltonian(const LsodeSpec& spec, const Grid& g, const CVec& psi, double t);
CVec apply_free_hamiltonian(const Grid& g, const CVec& psi, double m, double hbar);

// Max over interior samples of |i hbar dpsi/dt - H psi|_inf / |H psi|_inf with
// a central time difference. Free-frame series use the free Hamiltonian.
double schrodinger_residual(const LsodeSpec& spec, const std::vector<WaveFunction>& series);

}  // namespace qat
