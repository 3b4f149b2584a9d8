#include "qat/spectra.hpp"

#include <algorithm>
#include <cmath>

#include "qat/errors.hpp"

namespace qat {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Shape {
    double u1, v, R;  // v = u2 - g~ u1 / 2, R^2 = v^2 + Omega~^2 u1^2
    double c;         // coefficient of (i m / 2 hbar) (x - up)^2
    double up, dup, W, Ap;
};

Shape shape_at(const QatContext& ctx, const HStarParams& p, double t) {
    const QatPoint q = ctx.at(t);
    const double om2 = std::norm(p.Omega_tilde()) * (p.real_branch() ? 1.0 : -1.0);
    Shape s;
    s.u1 = q.b.u1;
    s.v = q.b.u2 - 0.5 * p.gamma_tilde * q.b.u1;
    const double dv = q.b.du2 - 0.5 * p.gamma_tilde * q.b.du1;
    const double r2 = s.v * s.v + om2 * s.u1 * s.u1;
    if (!(r2 > 0))
        throw InvalidArgument("(u2 - g~u1/2)^2 + Omega~^2 u1^2 is not positive at t=" +
                              std::to_string(t));
    s.R = std::sqrt(r2);
    // Omega~^2 u1 / (v R^2) + v' / (v W) with the removable 1/v cancelled
    // through W = u1' v - u1 v'.
    s.c = (om2 * s.u1 * q.b.du1 + s.v * dv) / (r2 * q.W);
    s.up = q.up;
    s.dup = q.dup;
    s.W = q.W;
    s.Ap = q.Ap;
    return s;
}

cplx base_at(const Shape& s, cplx Om) { return (s.v - cplx(0, 1) * Om * s.u1) / s.R; }

// log of the base, with its phase followed continuously from t = 0.
cplx tracked_log_base(const QatContext& ctx, const HStarParams& p, double t) {
    const cplx Om = p.Omega_tilde();
    const cplx b0 = base_at(shape_at(ctx, p, 0.0), Om);
    if (t == 0.0) return std::log(b0);
    for (int steps = std::max(16, static_cast<int>(std::ceil(std::abs(t) * 64)));; steps *= 2) {
        double phase = std::arg(b0);
        cplx prev = b0;
        bool ok = true;
        for (int k = 1; k <= steps; ++k) {
            const cplx cur = base_at(shape_at(ctx, p, t * k / steps), Om);
            const double d = std::arg(cur / prev);
            if (std::abs(d) >= kPi / 2) {
                ok = false;
                break;
            }
            phase += d;
            prev = cur;
        }
        if (ok) return cplx(std::log(std::abs(prev)), phase);
        if (steps > (1 << 20)) throw AccuracyLoss("phase tracking did not settle");
    }
}

}  // namespace

HStarParams::HStarParams(double omega, double gamma) : omega_tilde(omega), gamma_tilde(gamma) {
    if (!(omega >= 0) || !(gamma >= 0))
        throw InvalidArgument("omega~ and gamma~ must be non-negative");
}

cplx HStarParams::Omega_tilde() const {
    const double s = omega_tilde_sq_minus();
    if (s == 0.0) return 1e-6;
    return s > 0 ? cplx(std::sqrt(s), 0) : cplx(0, std::sqrt(-s));
}

OperatorRep hstar_operator(const QatContext& ctx, const HStarParams& p) {
    if (ctx.spec().forced()) throw ForcedNotSupported("H* is built for Lambda = 0");
    const QuadraticOperators q = quadratic_operators(ctx);
    const double m = ctx.mass();
    return combine({{1.0 / (2 * m), q.P2},
                    {0.5 * m * p.omega_tilde * p.omega_tilde, q.X2},
                    {0.5 * p.gamma_tilde, q.XP}},
                   OpLabel::HStar, "H*");
}

cplx hstar_eigenvalue(const HStarParams& p, cplx nu, double hbar) {
    return hbar * p.Omega_tilde() * (nu + 0.5);
}

double printed_norm_squared(const HStarParams& p, double m, double hbar) {
    return std::sqrt(hbar / (2 * m * p.Omega_tilde().real()));
}

WaveFunction eigenfunction_phi(const QatContext& ctx, const EigenSolution& sol, double t,
                               const Grid& g, PhiNormalization norm) {
    const HStarParams& p = sol.params;
    const double m = ctx.mass(), hb = ctx.hbar();
    const cplx Om = p.Omega_tilde();
    const Shape s = shape_at(ctx, p, t);
    const cplx nu = sol.nu;
    const cplx I(0, 1);

    const cplx pref = 1.0 / std::sqrt(std::sqrt(2 * kPi) * gamma_fn(nu + 1.0) * s.R);
    const cplx power = std::exp((nu + 0.5) * tracked_log_base(ctx, p, t));
    const cplx alpha = std::sqrt(2 * m * Om / hb);
    const double mh = m / hb;

    CVec out(g.n);
    for (int j = 0; j < g.n; ++j) {
        const double x = g.x(j), y = x - s.up;
        const double phase = 0.5 * mh * s.c * y * y + 0.5 * mh * s.Ap + mh * x * s.dup / s.W;
        const cplx z = alpha * y / s.R;
        cplx d(0);
        if (sol.C1 != 0.0) d += sol.C1 * parabolic_cylinder_D(nu, z);
        if (sol.C2 != 0.0) d += sol.C2 * parabolic_cylinder_D(-1.0 - nu, I * z);
        out[j] = pref * std::exp(I * phase) * power * d;
    }
    if (norm == PhiNormalization::Unit) out *= std::pow(std::abs(alpha), 0.5);
    return WaveFunction(g, out, t, Frame::Lsode);
}

WaveFunction eigenfunction_phi_n(const QatContext& ctx, const HStarParams& p, int n, double t,
                                 const Grid& g, PhiNormalization norm) {
    if (!p.real_branch()) throw ComplexOmegaTilde("integer branch needs omega~ >= gamma~/2");
    if (n < 0) throw InvalidArgument("n must be non-negative");
    return eigenfunction_phi(ctx, EigenSolution{double(n), 1.0, 0.0, p}, t, g, norm);
}

WaveFunction continuous_branch_phi(const QatContext& ctx, const HStarParams& p, double lambda,
                                   double t, int sign, const Grid& g) {
    if (p.omega_tilde_sq_minus() > 0)
        throw RealOmegaTilde("continuous branch needs omega~ <= gamma~/2");
    if (sign == 0) throw InvalidArgument("sign must be +1 or -1");
    EigenSolution s{cplx(-0.5, lambda), sign > 0 ? 1.0 : 0.0, sign > 0 ? 0.0 : 1.0, p};
    return eigenfunction_phi(ctx, s, t, g, PhiNormalization::AsPrinted);
}

std::vector<double> rayleigh_quotients(const QatContext& ctx, const HStarParams& p, int n_max,
                                       double t, const Grid& g) {
    const OperatorRep h = hstar_operator(ctx, p);
    std::vector<double> out;
    for (int n = 0; n <= n_max; ++n) {
        const WaveFunction phi = eigenfunction_phi_n(ctx, p, n, t, g);
        const WaveFunction hp = h.apply(phi);
        out.push_back((inner(phi, hp) / inner(phi, phi)).real());
    }
    return out;
}

Eigen::VectorXd smooth_taper(const Grid& g, double flat, double edge) {
    if (!(edge > flat && flat >= 0)) throw InvalidArgument("taper needs 0 <= flat < edge");
    const double c = 0.5 * (g.x_min + g.x_max);
    auto f = [](double y) { return y > 0 ? std::exp(-1.0 / y) : 0.0; };
    Eigen::VectorXd w(g.n);
    for (int j = 0; j < g.n; ++j) {
        const double s = std::clamp((std::abs(g.x(j) - c) - flat) / (edge - flat), 0.0, 1.0);
        w[j] = f(1 - s) / (f(1 - s) + f(s));
    }
    return w;
}

namespace {

double masked_ratio(const CVec& diff, const CVec& ref, const Grid& g, double measure) {
    const double c = 0.5 * (g.x_min + g.x_max);
    double num = 0, den = 0;
    for (int j = 0; j < g.n; ++j)
        if (std::abs(g.x(j) - c) <= measure) {
            num = std::max(num, std::abs(diff[j]));
            den = std::max(den, std::abs(ref[j]));
        }
    return num / (den > 0 ? den : 1.0);
}

}  // namespace

double tapered_eigen_residual(const OperatorRep& op, cplx value, const WaveFunction& phi,
                              double flat, double edge, double measure) {
    const Eigen::VectorXd w = smooth_taper(phi.grid, flat, edge);
    const CVec p = phi.psi.cwiseProduct(w.cast<cplx>());
    const CVec hp = op.apply(phi.grid, p, phi.time);
    return masked_ratio(hp - value * p, p, phi.grid, measure);
}

double tapered_schrodinger_residual(const LsodeSpec& spec, const std::vector<WaveFunction>& series,
                                    double flat, double edge, double measure) {
    if (series.size() < 3) throw InsufficientSamples("need at least three time samples");
    const Grid& g = series[0].grid;
    const CVec w = smooth_taper(g, flat, edge).cast<cplx>();
    const double dt = series[1].time - series[0].time;
    double worst = 0;
    for (size_t i = 1; i + 1 < series.size(); ++i) {
        const CVec p = series[i].psi.cwiseProduct(w);
        const CVec h = apply_hamiltonian(spec, g, p, series[i].time);
        const CVec lhs =
            cplx(0, spec.hbar) * (series[i + 1].psi - series[i - 1].psi).cwiseProduct(w) / (2 * dt);
        worst = std::max(worst, masked_ratio(lhs - h, h, g, measure));
    }
    return worst;
}

}  // namespace qat
