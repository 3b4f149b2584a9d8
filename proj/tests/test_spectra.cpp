#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "qat/errors.hpp"
#include "qat/spectra.hpp"

using namespace qat;

namespace {

LsodeSpec preset(const char* name, double gamma = 0.2, double omega = 1.0) {
    PresetParams p;
    p.gamma = gamma;
    p.omega = omega;
    return make_preset(name, p);
}

double eigen_residual(const OperatorRep& op, cplx value, const WaveFunction& phi) {
    const CVec r = op.apply(phi.grid, phi.psi, phi.time) - value * phi.psi;
    return r.norm() / phi.psi.norm();
}

}  // namespace

TEST_CASE("parameters and regimes") {
    CHECK_THROWS_AS(HStarParams(-1, 0), InvalidArgument);
    CHECK(HStarParams(1, 0.2).real_branch());
    CHECK(std::abs(HStarParams(1, 0.2).Omega_tilde() - std::sqrt(0.99)) < 1e-15);
    CHECK(std::abs(HStarParams(0.3, 1.0).Omega_tilde() - cplx(0, 0.4)) < 1e-15);
    CHECK(std::abs(HStarParams(0.5, 1.0).Omega_tilde() - 1e-6) < 1e-18);
    CHECK(std::abs(hstar_eigenvalue(HStarParams(1, 0.2), 2.0, 1.0) - 2.5 * std::sqrt(0.99)) < 1e-14);
}

TEST_CASE("H* without damping is an oscillator in the invariants") {
    const QatContext ctx = make_context(preset("damped_harmonic"), 1.0);
    const auto quad = quadratic_operators(ctx);
    const OperatorRep h = hstar_operator(ctx, HStarParams(1.3, 0.0));
    for (double t : {0.0, 0.6}) {
        const Coeffs a = h.at(t), p2 = quad.P2.at(t), x2 = quad.X2.at(t);
        for (int k = 0; k < kMonoCount; ++k)
            CHECK(std::abs(a[k] - (0.5 * p2[k] + 0.5 * 1.69 * x2[k])) < 1e-12);
    }
    CHECK_THROWS_AS(hstar_operator(make_context(preset("forced_damped_harmonic"), 1.0),
                                   HStarParams(1, 0.2)),
                    ForcedNotSupported);
}

TEST_CASE("H* is Hermitian and consistent with the first-order forms on solutions") {
    const Grid g(-16, 16, 512);
    const QatContext ctx = make_context(preset("damped_harmonic"), 1.0);
    const HStarParams p(1.0, 0.2);
    const OperatorRep h = hstar_operator(ctx, p);
    const CMat q = interior_test_basis(g, 16);
    const CMat a = q.adjoint() * h.matrix(g, 0.7) * q;
    CHECK((a - a.adjoint()).norm() / a.norm() < 1e-8);

    const auto f = first_order_on_shell(ctx);
    const OperatorRep hf = combine(
        {{0.5, f.P2}, {0.5 * p.omega_tilde * p.omega_tilde, f.X2}, {0.5 * p.gamma_tilde, f.XP}},
        OpLabel::Custom, "H*'");
    const WaveFunction psi0 = gaussian(g, 1.0, 0.5, 1.0);
    const double t = 0.6, dt = 5e-4;
    const std::vector<WaveFunction> series{evolve_qat_exact(ctx, psi0, t - dt),
                                           evolve_qat_exact(ctx, psi0, t),
                                           evolve_qat_exact(ctx, psi0, t + dt)};
    CHECK(on_shell_difference(h, hf, series) < 1e-5);
}

TEST_CASE("ground state of the free particle at t = 0") {
    const Grid g(-16, 16, 512);
    const QatContext ctx = make_context(preset("free"), 1.0);
    const double w = 1.7;
    const WaveFunction phi = eigenfunction_phi_n(ctx, HStarParams(w, 0.0), 0, 0.0, g);
    const WaveFunction ref = gaussian(g, 0, 0, std::sqrt(1 / (2 * w)));
    CHECK(std::abs(std::abs(inner(ref, phi)) - 1) < 1e-12);
    CHECK(l2_distance(phi, ref) < 1e-12);
}

TEST_CASE("integer branch eigenfunctions") {
    const Grid g(-16, 16, 512);
    const LsodeSpec spec = preset("damped_harmonic");
    const QatContext ctx = make_context(spec, 1.2);
    const HStarParams p(1.0, 0.2);
    const OperatorRep h = hstar_operator(ctx, p);
    for (double t : {0.0, 0.5, 1.0}) {
        std::vector<WaveFunction> phi;
        for (int n = 0; n <= 5; ++n) phi.push_back(eigenfunction_phi_n(ctx, p, n, t, g));
        for (int n = 0; n <= 2; ++n)
            CHECK(eigen_residual(h, hstar_eigenvalue(p, n, 1.0), phi[n]) < 1e-5);
        for (int m = 0; m <= 5; ++m)
            for (int n = 0; n <= 5; ++n)
                CHECK(std::abs(inner(phi[m], phi[n]) - (m == n ? 1.0 : 0.0)) < 1e-6);
        const auto rq = rayleigh_quotients(ctx, p, 5, t, g);
        for (int n = 0; n <= 5; ++n)
            CHECK(std::abs(rq[n] - hstar_eigenvalue(p, n, 1.0).real()) < 1e-5);
    }
    for (double t : {0.1, 0.5, 0.9}) {
        const double dt = 5e-4;
        for (int n : {0, 3}) {
            const std::vector<WaveFunction> series{eigenfunction_phi_n(ctx, p, n, t - dt, g),
                                                   eigenfunction_phi_n(ctx, p, n, t, g),
                                                   eigenfunction_phi_n(ctx, p, n, t + dt, g)};
            CHECK(schrodinger_residual(spec, series) < 1e-5);
        }
    }
    // the closed form is the exact evolution of its t = 0 value
    const WaveFunction phi2 = eigenfunction_phi_n(ctx, p, 2, 0.0, g);
    CHECK(l2_distance(eigenfunction_phi_n(ctx, p, 2, 0.9, g), evolve_qat_exact(ctx, phi2, 0.9)) <
          1e-7);
}

TEST_CASE("printed normalization") {
    const Grid g(-16, 16, 512);
    const QatContext ctx = make_context(preset("damped_harmonic"), 1.0);
    const HStarParams p(1.0, 0.2);
    for (int n : {0, 1, 4}) {
        const EigenSolution s{double(n), 1.0, 0.0, p};
        const WaveFunction raw = eigenfunction_phi(ctx, s, 0.4, g, PhiNormalization::AsPrinted);
        CHECK(std::abs(raw.norm() * raw.norm() / printed_norm_squared(p, 1, 1) - 1) < 1e-10);
    }
}

TEST_CASE("branch tracking keeps the phase continuous") {
    const Grid g(-16, 16, 512);
    const QatContext ctx = make_context(preset("damped_harmonic"), 1.6);
    const HStarParams p(1.0, 0.2);
    WaveFunction prev = eigenfunction_phi_n(ctx, p, 3, 0.0, g);
    for (int i = 1; i <= 30; ++i) {
        const WaveFunction cur = eigenfunction_phi_n(ctx, p, 3, 1.5 * i / 30, g);
        CHECK(l2_distance(cur, prev) < 0.5);
        prev = cur;
    }
}

TEST_CASE("regime dispatch") {
    const Grid g(-16, 16, 256);
    const QatContext ctx = make_context(preset("damped_harmonic"), 1.0);
    CHECK_THROWS_AS(eigenfunction_phi_n(ctx, HStarParams(0.3, 1.0), 0, 0.2, g), ComplexOmegaTilde);
    CHECK_THROWS_AS(continuous_branch_phi(ctx, HStarParams(1.0, 0.2), 0.5, 0.2, 1, g),
                    RealOmegaTilde);
    CHECK_NOTHROW(eigenfunction_phi_n(ctx, HStarParams(0.5, 1.0), 0, 0.2, g));
    CHECK_NOTHROW(continuous_branch_phi(ctx, HStarParams(0.5, 1.0), 0.5, 0.2, 1, g));
}

TEST_CASE("continuous branch") {
    const Grid g(-16, 16, 512);
    const LsodeSpec spec = preset("damped_harmonic");
    const QatContext ctx = make_context(spec, 1.0);
    const HStarParams p(0.3, 1.0);
    const double absO = std::abs(p.Omega_tilde());

    // lambda = 0: the parabolic cylinder factors are conjugate under x -> -x
    // and the remaining factors are even, so the moduli mirror each other
    for (double t : {0.0, 0.6}) {
        const WaveFunction a = continuous_branch_phi(ctx, p, 0.0, t, 1, g);
        const WaveFunction b = continuous_branch_phi(ctx, p, 0.0, t, -1, g);
        const double scale = a.psi.cwiseAbs().maxCoeff();
        double worst = 0;
        for (int j = 1; j < g.n; ++j)
            worst = std::max(worst, std::abs(std::abs(b.psi[j]) - std::abs(a.psi[g.n - j])));
        CHECK(worst < 1e-8 * scale);
    }
    const cplx z = 1.7 * std::exp(cplx(0, 0.25 * 3.14159265358979323846));
    CHECK(std::abs(parabolic_cylinder_D(-0.5, cplx(0, 1) * z) - std::conj(parabolic_cylinder_D(-0.5, -z))) <
          1e-13);

    const OperatorRep h = hstar_operator(ctx, p);
    for (double lambda : {-0.7, 0.4}) {
        for (int sign : {1, -1}) {
            const double t = 0.5, dt = 5e-4;
            const WaveFunction phi = continuous_branch_phi(ctx, p, lambda, t, sign, g);
            CHECK(tapered_eigen_residual(h, -absO * lambda, phi, 4, 7, 3) < 1e-4);
            const std::vector<WaveFunction> series{
                continuous_branch_phi(ctx, p, lambda, t - dt, sign, g), phi,
                continuous_branch_phi(ctx, p, lambda, t + dt, sign, g)};
            CHECK(tapered_schrodinger_residual(spec, series, 4, 7, 3) < 1e-4);
        }
    }
}

TEST_CASE("forced ground state solves the forced equation") {
    const Grid g(-16, 16, 1024);
    const LsodeSpec spec = preset("forced_damped_harmonic");
    const QatContext ctx = make_context(spec, 1.2);
    const HStarParams p(1.0, 0.2);
    for (double t : {0.3, 0.8}) {
        const double dt = 5e-4;
        const std::vector<WaveFunction> series{eigenfunction_phi_n(ctx, p, 0, t - dt, g),
                                               eigenfunction_phi_n(ctx, p, 0, t, g),
                                               eigenfunction_phi_n(ctx, p, 0, t + dt, g)};
        CHECK(schrodinger_residual(spec, series) < 1e-5);
        CHECK(std::abs(series[1].norm() - 1) < 1e-10);
    }
}
