#include "qat/qat_core.hpp"

#include <cmath>

#include "qat/errors.hpp"

namespace qat {

QatContext::QatContext(LsodeSpec spec, ClassicalBasis basis)
    : spec_(std::move(spec)), basis_(std::move(basis)), ps_(spec_, basis_) {
    spec_.validate();
    const Window& w = basis_.window();
    if (!(w.hi > w.lo)) throw OutsideWindow("empty validity window");
    if (spec_.forced()) {
        auto ps = ps_;
        auto b = basis_;
        auto sp = spec_;
        action_ = CumulativeIntegral(
            [ps, b, sp](double t) {
                const double up = ps.up(t), dup = ps.dup(t);
                return (up * up * sp.w2(t) - dup * dup) / b.at(t).wronskian();
            },
            w.lo, w.hi);
    }
}

bool QatContext::normalized() const {
    const auto& m = basis_.mix();
    return m[0] == 1 && m[1] == 0 && m[2] == 0 && m[3] == 1;
}

double QatContext::action(double t) const {
    basis_.at(t);
    return action_.empty() ? 0.0 : action_(t);
}

QatPoint QatContext::at(double t) const {
    QatPoint q;
    q.b = basis_.at(t);
    q.W = q.b.wronskian();
    if (spec_.forced()) {
        q.up = ps_.up(t);
        q.dup = ps_.dup(t);
        q.Ap = action_(t);
    }
    q.tau = q.b.u1 / q.b.u2;
    return q;
}

double QatContext::map_time(double t) const {
    const BasisPoint p = basis_.at(t);
    return p.u1 / p.u2;
}

double QatContext::inverse_time(double tau) const {
    const Window& w = basis_.window();
    double lo = w.lo, hi = w.hi;
    const double tlo = map_time(lo), thi = map_time(hi);
    if (tau < tlo || tau > thi)
        throw TimeNotInImage("tau=" + std::to_string(tau) + " outside [" + std::to_string(tlo) +
                             ", " + std::to_string(thi) + "]");
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        (map_time(mid) < tau ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

QatContext QatContext::shifted(double a, double b, double c, double d) const {
    return QatContext(spec_, basis_.shifted(a, b, c, d));
}

QatContext make_context(const LsodeSpec& spec, double t_max, double t_min) {
    return QatContext(spec, solve_basis(spec, t_max, t_min));
}

namespace {

// Multiply by exp(i (a y^2 + b y + c)) with y the grid coordinate.
void apply_phase(WaveFunction& psi, double a, double b, double c) {
    for (int j = 0; j < psi.grid.n; ++j) {
        const double y = psi.grid.x(j);
        psi.psi[j] *= std::exp(cplx(0, (a * y + b) * y + c));
    }
}

void check(const SupportCheck& sc, const char* where) {
    if (sc.overflow)
        throw SupportOverflow(std::string(where) + ": edge mass " + std::to_string(sc.edge_mass) +
                              ", norm change " + std::to_string(sc.norm_change));
}

}  // namespace

WaveFunction qat_forward(const QatContext& ctx, const WaveFunction& phi, bool check_support) {
    if (phi.frame != Frame::Lsode) throw InvalidArgument("qat_forward needs an Lsode-frame state");
    const double t = phi.time;
    const QatPoint q = ctx.at(t);
    const double mh = ctx.mass() / ctx.hbar();

    // y = x - u_p; phases written in y, with x = y + u_p in the linear term.
    WaveFunction g = translate(phi, -q.up);
    const double a = -0.5 * mh * q.b.du2 / (q.W * q.b.u2);
    const double lin = -mh * q.dup / q.W;
    apply_phase(g, a, lin, lin * q.up - 0.5 * mh * q.Ap);

    SupportCheck sc;
    WaveFunction out = dilate(g, 1.0 / q.b.u2, &sc);
    if (check_support) check(sc, "qat_forward");
    out.time = q.tau;
    out.frame = Frame::Free;
    return out;
}

WaveFunction qat_inverse(const QatContext& ctx, const WaveFunction& varphi, bool check_support) {
    return qat_inverse_at(ctx, varphi, ctx.inverse_time(varphi.time), check_support);
}

WaveFunction qat_inverse_at(const QatContext& ctx, const WaveFunction& varphi, double t,
                            bool check_support) {
    if (varphi.frame != Frame::Free) throw InvalidArgument("qat_inverse needs a free-frame state");
    const QatPoint q = ctx.at(t);
    const double mh = ctx.mass() / ctx.hbar();

    SupportCheck sc;
    WaveFunction g = dilate(varphi, q.b.u2, &sc);
    if (check_support) check(sc, "qat_inverse");
    const double a = -0.5 * mh * q.b.du2 / (q.W * q.b.u2);
    const double lin = -mh * q.dup / q.W;
    apply_phase(g, -a, -lin, -(lin * q.up - 0.5 * mh * q.Ap));
    WaveFunction out = translate(g, q.up);
    out.time = t;
    out.frame = Frame::Lsode;
    return out;
}

CVec apply_free_hamiltonian(const Grid& g, const CVec& psi, double m, double hbar) {
    return -(hbar * hbar / (2 * m)) * spectral_derivative(g, psi, 2);
}

CVec apply_hamiltonian(const LsodeSpec& spec, const Grid& g, const CVec& psi, double t) {
    const double m = spec.mass, hb = spec.hbar;
    const double ef = std::exp(spec.f(t)), w2 = spec.w2(t), lam = spec.lambda(t);
    CVec out = -(hb * hb / (2 * m)) / ef * spectral_derivative(g, psi, 2);
    for (int j = 0; j < g.n; ++j) {
        const double x = g.x(j);
        out[j] += (0.5 * m * w2 * x * x - m * lam * x) * ef * psi[j];
    }
    return out;
}

double schrodinger_residual(const LsodeSpec& spec, const std::vector<WaveFunction>& series) {
    if (series.size() < 3) throw InsufficientSamples("need at least three time samples");
    const double dt = series[1].time - series[0].time;
    if (!(dt != 0.0)) throw InsufficientSamples("samples share a time label");
    for (size_t i = 1; i < series.size(); ++i) {
        const double d = series[i].time - series[i - 1].time;
        if (std::abs(d - dt) > 1e-9 * std::max(1.0, std::abs(dt)) + 1e-13)
            throw InsufficientSamples("samples are not equally spaced");
        if (!(series[i].grid == series[0].grid)) throw GridMismatch("series changes grid");
    }
    const double hb = spec.hbar;
    double worst = 0;
    for (size_t i = 1; i + 1 < series.size(); ++i) {
        const WaveFunction& c = series[i];
        const CVec h = c.frame == Frame::Free
                           ? apply_free_hamiltonian(c.grid, c.psi, spec.mass, hb)
                           : apply_hamiltonian(spec, c.grid, c.psi, c.time);
        const CVec lhs = cplx(0, hb) * (series[i + 1].psi - series[i - 1].psi) / (2 * dt);
        const double scale = h.cwiseAbs().maxCoeff();
        const double r = (lhs - h).cwiseAbs().maxCoeff() / (scale > 0 ? scale : 1.0);
        worst = std::max(worst, r);
    }
    return worst;
}

}  // namespace qat
