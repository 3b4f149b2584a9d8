#include "qat/propagators.hpp"

#include <array>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "qat/errors.hpp"

namespace qat {

namespace {

CVec free_kernel(const Grid& g, const CVec& psi, double tau, double m, double hbar) {
    if (tau == 0.0) return psi;
    const Eigen::VectorXd k = g.wavenumbers();
    CVec c = fft(psi);
    for (int j = 0; j < g.n; ++j) c[j] *= std::exp(cplx(0, -hbar * k[j] * k[j] * tau / (2 * m)));
    return ifft(c);
}

// exp(i (a x^2 + b x + c)) for the outer phases of U(t).
void outer_phase(const QatContext& ctx, const QatPoint& q, CVec& psi, const Grid& g, double sign) {
    const double mh = ctx.mass() / ctx.hbar();
    const double a = 0.5 * mh * q.b.du2 / (q.W * q.b.u2);
    const double b = -2 * a * q.up + mh * q.dup / q.W;
    const double c = a * q.up * q.up + 0.5 * mh * q.Ap;
    for (int j = 0; j < g.n; ++j) {
        const double x = g.x(j);
        psi[j] *= std::exp(cplx(0, sign * ((a * x + b) * x + c)));
    }
}

void require(bool ok, const SupportCheck& sc, const char* where) {
    if (ok && sc.overflow)
        throw SupportOverflow(std::string(where) + ": edge mass " + std::to_string(sc.edge_mass) +
                              ", norm change " + std::to_string(sc.norm_change));
}

}  // namespace

WaveFunction evolve_qat_exact(const QatContext& ctx, const WaveFunction& psi0, double t,
                              bool check_support) {
    if (!ctx.normalized()) {
        WaveFunction start = psi0;
        start.time = 0.0;
        start.frame = Frame::Lsode;
        WaveFunction f = qat_forward(ctx, start, check_support);
        f = free_evolve(f, ctx.map_time(t) - f.time, ctx.mass(), ctx.hbar());
        return qat_inverse_at(ctx, f, t, check_support);
    }
    const QatPoint q = ctx.at(t);
    SupportCheck sc;
    WaveFunction out = dilate(psi0, q.b.u2, &sc);
    require(check_support, sc, "evolve_qat_exact");
    out = translate(out, q.up);
    out.psi = free_kernel(out.grid, out.psi, q.b.u1 * q.b.u2, ctx.mass(), ctx.hbar());
    outer_phase(ctx, q, out.psi, out.grid, 1.0);
    out.time = t;
    out.frame = Frame::Lsode;
    return out;
}

WaveFunction evolve_qat_exact_adjoint(const QatContext& ctx, const WaveFunction& psi_t, double t,
                                      bool check_support) {
    if (!ctx.normalized()) {
        WaveFunction start = psi_t;
        start.time = t;
        start.frame = Frame::Lsode;
        WaveFunction f = qat_forward(ctx, start, check_support);
        f = free_evolve(f, ctx.map_time(0.0) - f.time, ctx.mass(), ctx.hbar());
        return qat_inverse_at(ctx, f, 0.0, check_support);
    }
    const QatPoint q = ctx.at(t);
    WaveFunction out = psi_t;
    outer_phase(ctx, q, out.psi, out.grid, -1.0);
    out.psi = free_kernel(out.grid, out.psi, -q.b.u1 * q.b.u2, ctx.mass(), ctx.hbar());
    out = translate(out, -q.up);
    SupportCheck sc;
    out = dilate(out, 1.0 / q.b.u2, &sc);
    require(check_support, sc, "evolve_qat_exact_adjoint");
    out.time = 0.0;
    out.frame = Frame::Lsode;
    return out;
}

QatContext extend_window(const QatContext& ctx, double t_target) {
    if (ctx.window().contains(t_target)) return ctx;
    const double dir = t_target > 0 ? 1.0 : -1.0;
    for (double c = 0.25; c <= 64.0; c *= 2) {
        const QatContext s = ctx.shifted(1.0, 0.0, dir * c, 1.0);
        if (!s.window().contains(t_target)) continue;
        // Keep u2 away from zero so the dilation stays resolved on the grid.
        if (s.basis().raw(t_target).u2 >= 0.3) return s;
    }
    throw OutsideWindow("no lower-triangular shift keeps u2 positive up to t=" +
                        std::to_string(t_target));
}

// ---------------------------------------------------------------- CN

CMat crank_nicolson_columns(const LsodeSpec& spec, const Grid& g, CMat cols, double t0, double t,
                            double dt) {
    if (t == 0.0) return cols;
    if (dt == 0.0) throw InvalidArgument("cn step must be non-zero");
    const int n = g.n;
    const long steps = std::max(1L, static_cast<long>(std::ceil(std::abs(t / dt) - 1e-9)));
    const double h = t / static_cast<double>(steps);
    const double m = spec.mass, hb = spec.hbar, dx = g.dx();
    const double kbase = hb * hb / (2 * m) / (12 * dx * dx);
    const cplx idl(0, h / (2 * hb));

    std::vector<cplx> u0(n), u1(n), u2(n), l1(n), l2(n);
    std::vector<double> V(n);
    CMat rhs(n, cols.cols());
    for (long s = 0; s < steps; ++s) {
        const double tm = t0 + (s + 0.5) * h;
        const double ef = std::exp(spec.f(tm)), w2 = spec.w2(tm), lam = spec.lambda(tm);
        const double kap = kbase / ef;
        for (int j = 0; j < n; ++j) {
            const double x = g.x(j);
            V[j] = 30 * kap + (0.5 * m * w2 * x * x - m * lam * x) * ef;
        }
        const double o1 = -16 * kap, o2 = kap;

        // rhs = (1 - i dl H) psi
        for (Eigen::Index c = 0; c < cols.cols(); ++c) {
            for (int j = 0; j < n; ++j) {
                cplx hv = V[j] * cols(j, c);
                if (j >= 1) hv += o1 * cols(j - 1, c);
                if (j + 1 < n) hv += o1 * cols(j + 1, c);
                if (j >= 2) hv += o2 * cols(j - 2, c);
                if (j + 2 < n) hv += o2 * cols(j + 2, c);
                rhs(j, c) = cols(j, c) - idl * hv;
            }
        }

        // Banded LU of (1 + i dl H); no pivoting needed since the Hermitian
        // part is the identity.
        const cplx a1 = idl * o1, a2 = idl * o2;
        for (int i = 0; i < n; ++i) {
            cplx e1 = i >= 1 ? a1 : 0.0, d = 1.0 + idl * V[i];
            cplx s1 = i + 1 < n ? a1 : 0.0;
            const cplx s2 = i + 2 < n ? a2 : 0.0;
            l2[i] = l1[i] = 0;
            if (i >= 2) {
                const cplx mm = a2 / u0[i - 2];
                e1 -= mm * u1[i - 2];
                d -= mm * u2[i - 2];
                l2[i] = mm;
            }
            if (i >= 1) {
                const cplx mm = e1 / u0[i - 1];
                d -= mm * u1[i - 1];
                s1 -= mm * u2[i - 1];
                l1[i] = mm;
            }
            u0[i] = d;
            u1[i] = s1;
            u2[i] = s2;
        }
        for (Eigen::Index c = 0; c < cols.cols(); ++c) {
            auto y = rhs.col(c);
            for (int i = 0; i < n; ++i) {
                if (i >= 2) y[i] -= l2[i] * y[i - 2];
                if (i >= 1) y[i] -= l1[i] * y[i - 1];
            }
            for (int i = n - 1; i >= 0; --i) {
                cplx v = y[i];
                if (i + 1 < n) v -= u1[i] * cols(i + 1, c);
                if (i + 2 < n) v -= u2[i] * cols(i + 2, c);
                cols(i, c) = v / u0[i];
            }
        }
        if (!cols.allFinite()) throw SolverDivergence("non-finite amplitudes at t=" + std::to_string(tm));
    }
    return cols;
}

WaveFunction evolve_crank_nicolson(const LsodeSpec& spec, const WaveFunction& psi0, double t,
                                   double dt) {
    WaveFunction out = psi0;
    const double n0 = psi0.norm();
    CMat col = psi0.psi;
    out.psi = crank_nicolson_columns(spec, psi0.grid, col, psi0.time, t, t < 0 ? -std::abs(dt) : std::abs(dt)).col(0);
    out.time = psi0.time + t;
    const double drift = std::abs(out.norm() - n0);
    const long steps = std::max(1L, static_cast<long>(std::ceil(std::abs(t / dt) - 1e-9)));
    if (drift > 1e-10 * n0 * static_cast<double>(steps))
        throw SolverDivergence("norm drift " + std::to_string(drift));
    return out;
}

std::vector<WaveFunction> evolve_crank_nicolson_series(const LsodeSpec& spec,
                                                       const WaveFunction& psi0,
                                                       const std::vector<double>& times,
                                                       double dt) {
    std::vector<WaveFunction> out;
    WaveFunction cur = psi0;
    for (double t : times) {
        if (t < cur.time - 1e-15) throw InvalidArgument("times must be ascending");
        cur = evolve_crank_nicolson(spec, cur, t - cur.time, dt);
        cur.time = t;
        out.push_back(cur);
    }
    return out;
}

// ---------------------------------------------------------------- Magnus

CMat hamiltonian_matrix(const LsodeSpec& spec, const Grid& g, double t) {
    const double m = spec.mass, hb = spec.hbar;
    const double ef = std::exp(spec.f(t)), w2 = spec.w2(t), lam = spec.lambda(t);
    CMat h = -(hb * hb / (2 * m)) / ef * derivative_matrix(g, 2);
    for (int j = 0; j < g.n; ++j) {
        const double x = g.x(j);
        h(j, j) += (0.5 * m * w2 * x * x - m * lam * x) * ef;
    }
    return h;
}

namespace {

struct GaussRule {
    std::array<double, 16> x, w;  // on [-1, 1]
    GaussRule() {
        using G = boost::math::quadrature::gauss<double, 16>;
        const auto& a = G::abscissa();
        const auto& wt = G::weights();
        for (size_t i = 0; i < 8; ++i) {
            x[i] = -a[7 - i];
            w[i] = wt[7 - i];
            x[15 - i] = a[7 - i];
            w[15 - i] = wt[7 - i];
        }
    }
};

const GaussRule& rule() {
    static const GaussRule r;
    return r;
}

// Coefficients of H = sum_i c_i(t) M_i with M = {K, V, L}:
// K = -(hbar^2/2m) d^2, V = m x^2 / 2, L = m x.
std::array<double, 3> coeffs(const LsodeSpec& spec, double t) {
    const double ef = std::exp(spec.f(t));
    return {1.0 / ef, ef * spec.w2(t), -ef * spec.lambda(t)};
}

struct MagnusBasis {
    CMat K;
    Eigen::VectorXd v, l;  // diagonals of V and L
    explicit MagnusBasis(const LsodeSpec& spec, const Grid& g) {
        const double m = spec.mass, hb = spec.hbar;
        K = -(hb * hb / (2 * m)) * derivative_matrix(g, 2);
        v.resize(g.n);
        l.resize(g.n);
        for (int j = 0; j < g.n; ++j) {
            const double x = g.x(j);
            v[j] = 0.5 * m * x * x;
            l[j] = m * x;
        }
    }
    CMat full(int i) const {
        if (i == 0) return K;
        CMat d = CMat::Zero(K.rows(), K.cols());
        d.diagonal() = (i == 1 ? v : l).cast<cplx>();
        return d;
    }
};

// [A, diag(d)] without forming the diagonal matrix.
CMat comm_diag(const CMat& a, const Eigen::VectorXd& d) {
    return a * d.asDiagonal() - d.asDiagonal() * a;
}

CMat comm(const CMat& a, const CMat& b) { return a * b - b * a; }

}  // namespace

CMat magnus_term(const LsodeSpec& spec, const Grid& g, double t, int order) {
    if (order < 1 || order > 3) throw InvalidArgument("magnus order must be 1, 2 or 3");
    const int n = g.n;
    if (t == 0.0) return CMat::Zero(n, n);
    const auto& R = rule();
    const cplx mi(0, -1.0 / spec.hbar);  // -i / hbar

    // Nested Gauss-Legendre over 0 < t3 < t2 < t1 < t.
    std::array<double, 3> A{};
    std::array<std::array<double, 3>, 3> B{};
    std::array<std::array<std::array<double, 3>, 3>, 3> C{};
    std::array<bool, 3> used{false, false, false};
    for (int a = 0; a < 16; ++a) {
        const double t1 = 0.5 * t * (R.x[a] + 1), w1 = 0.5 * t * R.w[a];
        const auto c1 = coeffs(spec, t1);
        for (int i = 0; i < 3; ++i) {
            A[i] += w1 * c1[i];
            used[i] = used[i] || c1[i] != 0.0;
        }
        if (order < 2) continue;
        for (int b = 0; b < 16; ++b) {
            const double t2 = 0.5 * t1 * (R.x[b] + 1), w2 = 0.5 * t1 * R.w[b];
            const auto c2 = coeffs(spec, t2);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) B[i][j] += w1 * w2 * (c1[i] * c2[j] - c1[j] * c2[i]);
            if (order < 3) continue;
            for (int c = 0; c < 16; ++c) {
                const double t3 = 0.5 * t2 * (R.x[c] + 1), w3 = 0.5 * t2 * R.w[c];
                const auto c3 = coeffs(spec, t3);
                const double w = w1 * w2 * w3;
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j)
                        for (int k = 0; k < 3; ++k)
                            C[i][j][k] += w * (c1[i] * c2[j] * c3[k] + c3[i] * c2[j] * c1[k]);
            }
        }
    }

    const MagnusBasis M(spec, g);
    if (order == 1) {
        CMat out = A[0] * M.K;
        out.diagonal() += (A[1] * M.v + A[2] * M.l).cast<cplx>();
        return mi * out;
    }

    // Only [K, V] and [K, L] survive; V and L are both diagonal.
    std::array<CMat, 3> KD;  // KD[1] = [K, V], KD[2] = [K, L]
    for (int i = 1; i < 3; ++i)
        if (used[0] && used[i]) KD[i] = comm_diag(M.K, i == 1 ? M.v : M.l);

    if (order == 2) {
        CMat out = CMat::Zero(n, n);
        for (int i = 1; i < 3; ++i)
            if (KD[i].size()) out += B[0][i] * KD[i];
        return 0.5 * mi * mi * out;
    }

    // sum_{i,j,k} C_ijk [M_i, [M_j, M_k]] = sum_i sum_{k} (C_i0k - C_ik0) [M_i, [K, M_k]]
    CMat out = CMat::Zero(n, n);
    for (int k = 1; k < 3; ++k) {
        if (!KD[k].size()) continue;
        for (int i = 0; i < 3; ++i) {
            if (!used[i]) continue;
            const double w = C[i][0][k] - C[i][k][0];
            if (w == 0.0) continue;
            if (i == 0)
                out += w * comm(M.K, KD[k]);
            else
                out += w * comm_diag(KD[k], i == 1 ? M.v : M.l) * -1.0;
        }
    }
    return mi * mi * mi * out / 6.0;
}

CMat magnus_omega(const LsodeSpec& spec, const Grid& g, double t, int order) {
    if (order < 1 || order > 3) throw InvalidArgument("magnus order must be 1, 2 or 3");
    CMat out = magnus_term(spec, g, t, 1);
    for (int k = 2; k <= order; ++k) out += magnus_term(spec, g, t, k);
    return out;
}

CMat magnus_omega6_dho(double gamma, double omega, double t, const Grid& g, double m, double hbar,
                       Omega6Form form) {
    const double g2 = gamma * gamma, w2 = omega * omega;
    const double t2 = t * t, t4 = t2 * t2, t6 = t4 * t2;
    // Polynomials written with the omega/gamma ratios multiplied out so gamma = 0 is regular.
    const double c1 = 1 + g2 * t2 / 6 + (g2 * g2 + 2 * w2 * g2) * t4 / 120 +
                      (g2 * g2 * g2 + 16 * w2 * g2 * g2 + 32.0 / 3.0 * w2 * w2 * g2) * t6 / 5040;
    const double c2 = 1 + g2 * t2 / 12 + (g2 * g2 + 6 * w2 * g2) * t4 / 360;
    const double c3 = 1 + (g2 + 4.0 / 3.0 * w2) * t2 / 20 +
                      (g2 * g2 + 44.0 / 3.0 * w2 * g2 + 16.0 / 3.0 * w2 * w2) * t4 / 840;
    const double tp = form == Omega6Form::Corrected ? t2 : t;

    const CMat K = -(hbar * hbar / (2 * m)) * derivative_matrix(g, 2);
    const CMat D = derivative_matrix(g, 1);
    Eigen::VectorXd v(g.n), x = g.points();
    for (int j = 0; j < g.n; ++j) v[j] = 0.5 * m * w2 * x[j] * x[j];
    // -i hbar (x d + d x) / 2, the Hermitian form of -i hbar x d - i hbar / 2.
    const CMat XP = cplx(0, -0.5 * hbar) * (x.asDiagonal() * D + D * x.asDiagonal());

    CMat body = (c1 - 0.5 * gamma * t * c2) * K + (gamma * w2 * tp / 6 * c3) * XP;
    body.diagonal() += ((c1 + 0.5 * gamma * t * c2) * v).cast<cplx>();
    return cplx(0, -t / hbar) * body;
}

CMat matrix_exponential(const CMat& a) {
    if (!a.allFinite()) throw InvalidArgument("matrix_exponential needs finite entries");
    return a.exp();
}

// ---------------------------------------------------------------- EvolutionOperator

CMat EvolutionOperator::magnus_generator(const Grid& g, double t) const {
    if (magnus_order == 6) {
        const auto& d = ctx.spec().damped_ho;
        if (!d) throw InvalidArgument("sixth-order Magnus needs constant gamma, omega and no forcing");
        return magnus_omega6_dho(d->gamma, d->omega, t, g, ctx.mass(), ctx.hbar());
    }
    return magnus_omega(ctx.spec(), g, t, magnus_order);
}

WaveFunction EvolutionOperator::apply(const WaveFunction& psi0, double t) const {
    switch (mode) {
        case PropagatorMode::QatExact:
            return evolve_qat_exact(ctx, psi0, t);
        case PropagatorMode::CrankNicolson: {
            WaveFunction s = psi0;
            s.time = 0.0;
            return evolve_crank_nicolson(ctx.spec(), s, t, cn_dt);
        }
        case PropagatorMode::Magnus: {
            WaveFunction out = psi0;
            out.psi = matrix_exponential(magnus_generator(psi0.grid, t)) * psi0.psi;
            out.time = t;
            return out;
        }
    }
    throw InvalidArgument("unknown propagator mode");
}

WaveFunction EvolutionOperator::apply_adjoint(const WaveFunction& psi_t, double t) const {
    switch (mode) {
        case PropagatorMode::QatExact:
            return evolve_qat_exact_adjoint(ctx, psi_t, t);
        case PropagatorMode::CrankNicolson: {
            WaveFunction s = psi_t;
            s.time = t;
            WaveFunction out = evolve_crank_nicolson(ctx.spec(), s, -t, cn_dt);
            out.time = 0.0;
            return out;
        }
        case PropagatorMode::Magnus: {
            WaveFunction out = psi_t;
            out.psi = matrix_exponential(-magnus_generator(psi_t.grid, t)) * psi_t.psi;
            out.time = 0.0;
            return out;
        }
    }
    throw InvalidArgument("unknown propagator mode");
}

CMat EvolutionOperator::matrix(const Grid& g, double t) const {
    const CMat id = CMat::Identity(g.n, g.n);
    switch (mode) {
        case PropagatorMode::QatExact: {
            CMat u(g.n, g.n);
            for (int j = 0; j < g.n; ++j)
                u.col(j) = evolve_qat_exact(ctx, WaveFunction(g, id.col(j)), t, false).psi;
            return u;
        }
        case PropagatorMode::CrankNicolson:
            return crank_nicolson_columns(ctx.spec(), g, id, 0.0, t, cn_dt);
        case PropagatorMode::Magnus:
            return matrix_exponential(magnus_generator(g, t));
    }
    throw InvalidArgument("unknown propagator mode");
}

CMat EvolutionOperator::adjoint_matrix(const Grid& g, double t) const {
    const CMat id = CMat::Identity(g.n, g.n);
    switch (mode) {
        case PropagatorMode::QatExact: {
            CMat u(g.n, g.n);
            for (int j = 0; j < g.n; ++j)
                u.col(j) = evolve_qat_exact_adjoint(ctx, WaveFunction(g, id.col(j), t), t, false).psi;
            return u;
        }
        case PropagatorMode::CrankNicolson:
            return crank_nicolson_columns(ctx.spec(), g, id, t, -t, -std::abs(cn_dt));
        case PropagatorMode::Magnus:
            return matrix_exponential(-magnus_generator(g, t));
    }
    throw InvalidArgument("unknown propagator mode");
}

}  // namespace qat
