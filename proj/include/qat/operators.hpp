#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qat/propagators.hpp"

namespace qat {

// Monomials, each acting as (coefficient) * x^a d^b, x to the left of d.
enum class Mono { One, X, X2, D, XD, D2, Dt };
constexpr int kMonoCount = 7;
using Coeffs = std::array<cplx, kMonoCount>;

enum class OpLabel { X, P, P2, X2, XP, HStar, Custom };

struct OperatorRep {
    OpLabel label = OpLabel::Custom;
    std::string name;
    std::function<Coeffs(double)> coeffs;

    Coeffs at(double t) const { return coeffs(t); }
    bool hermitian() const { return label != OpLabel::Custom; }

    // Spectral application at fixed t; InvalidArgument if a d/dt term is present.
    CVec apply(const Grid& g, const CVec& psi, double t) const;
    WaveFunction apply(const WaveFunction& psi) const;
    // Application to sample i of an equally spaced series; d/dt by central difference.
    CVec apply_on_series(const std::vector<WaveFunction>& series, size_t i) const;
    // Dense realization with spectral derivative matrices.
    CMat matrix(const Grid& g, double t) const;
};

OperatorRep combine(const std::vector<std::pair<cplx, OperatorRep>>& terms, OpLabel label,
                    std::string name);

struct BasicOperators {
    OperatorRep X, P;
};
struct QuadraticOperators {
    OperatorRep P2, X2, XP;
};

BasicOperators basic_operators(const QatContext& ctx);
// Second-order forms with the printed ordering constants; ForcedNotSupported
// when the context is forced.
QuadraticOperators quadratic_operators(const QatContext& ctx);
// First-order forms valid on solutions (carry a d/dt monomial).
QuadraticOperators first_order_on_shell(const QatContext& ctx);
// The quantized LSODE Hamiltonian, -(hbar^2/2m) e^{-f} d^2 + (m w^2 x^2/2 - m Lambda x) e^f.
OperatorRep hamiltonian_operator(const LsodeSpec& spec);

// |(A - A')psi_i| / |A psi_i| at the interior samples of an equally spaced series.
double on_shell_difference(const OperatorRep& second, const OperatorRep& first,
                           const std::vector<WaveFunction>& series);
// Schrodinger residual of the series t_i -> op(t_i) psi_i.
double solution_preservation_residual(const LsodeSpec& spec, const OperatorRep& op,
                                      const std::vector<WaveFunction>& series);

// Orthonormal Hermite functions squeezed into the interior 60% of the box.
CMat interior_test_basis(const Grid& g, int count = 12);
// |P (A - B) Q|_F, divided by |P B Q|_F when relative; P keeps interior rows.
double windowed_difference(const CMat& a, const CMat& b, const Grid& g, const CMat& q,
                           bool relative);

struct CommutatorEntry {
    std::string name;
    double error = 0;
    bool relative = true;  // false when the right-hand side is zero
};
std::vector<CommutatorEntry> commutator_table(const QatContext& ctx, double t, const Grid& g);

struct Sl2Shift {
    QatContext context;
    double a, b, c, d;
    double operator_map_error = 0;  // max relative error of X', P' vs the linear combinations
    double commutator_error = 0;    // relative error of [X', P'] = i hbar
};
// Checks the operator map at a spread of times inside both windows.
Sl2Shift sl2_shift(const QatContext& ctx, double a, double b, double c, double d, const Grid& g);
// The t = 0 map of the shifted family member, sqrt(d) e^{-i c m d x^2 / 2hbar} psi(d x).
WaveFunction boundary_map(const Sl2Shift& s, const WaveFunction& psi);
// sqrt(d) e^{-i c m x^2 / (2 hbar d)} psi(x / d) taken literally.
WaveFunction boundary_map_printed(double c, double d, const WaveFunction& psi, double m,
                                  double hbar);

// U(t)^dagger op(t) U(t) as a dense matrix.
CMat de_evolve(const OperatorRep& op, const EvolutionOperator& U, double t, const Grid& g);

// U^dagger H U written as k(t) K + v(t) (m x^2 / 2) + s(t) XP + e(t) 1 with
// K = -(hbar^2/2m) d^2 and XP = -i hbar (x d + 1/2), fitted on interior test
// states at `samples` times in [0, t_end]; each coefficient is then fitted by
// a cubic in t. Lambda = 0 only.
struct HamiltonianDrift {
    std::array<double, 4> k{}, v{}, xp{};  // polynomial coefficients, constant term first
    double max_fit_residual = 0;            // worst relative least-squares misfit
};
HamiltonianDrift de_evolved_hamiltonian_fit(const QatContext& ctx, const Grid& g,
                                            double t_end = 0.05, int samples = 11);

}  // namespace qat
