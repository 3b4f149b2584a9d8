#include "qat/operators.hpp"

#include <algorithm>
#include <cmath>

#include "qat/errors.hpp"

namespace qat {

namespace {

constexpr int kOne = 0, kX = 1, kX2 = 2, kD = 3, kXD = 4, kD2 = 5, kDt = 6;
const cplx I(0, 1);

CVec apply_spatial(const Grid& g, const CVec& psi, const Coeffs& c) {
    CVec out = CVec::Zero(g.n);
    const bool need_d = c[kD] != 0.0 || c[kXD] != 0.0;
    const CVec d1 = need_d ? spectral_derivative(g, psi, 1) : CVec();
    const CVec d2 = c[kD2] != 0.0 ? spectral_derivative(g, psi, 2) : CVec();
    for (int j = 0; j < g.n; ++j) {
        const double x = g.x(j);
        cplx v = (c[kOne] + c[kX] * x + c[kX2] * x * x) * psi[j];
        if (need_d) v += (c[kD] + c[kXD] * x) * d1[j];
        if (c[kD2] != 0.0) v += c[kD2] * d2[j];
        out[j] = v;
    }
    return out;
}

std::shared_ptr<const QatContext> share(const QatContext& ctx) {
    return std::make_shared<const QatContext>(ctx);
}

OperatorRep make_op(OpLabel label, std::string name, std::function<Coeffs(double)> fn) {
    OperatorRep op;
    op.label = label;
    op.name = std::move(name);
    op.coeffs = std::move(fn);
    return op;
}

void require_unforced(const QatContext& ctx, const char* what) {
    if (ctx.spec().forced())
        throw ForcedNotSupported(std::string(what) + " is only available without forcing");
}

std::vector<bool> interior_rows(const Grid& g) {
    const double c = 0.5 * (g.x_min + g.x_max), half = 0.3 * g.length();
    std::vector<bool> keep(g.n);
    for (int j = 0; j < g.n; ++j) keep[j] = std::abs(g.x(j) - c) <= half;
    return keep;
}

}  // namespace

CVec OperatorRep::apply(const Grid& g, const CVec& psi, double t) const {
    const Coeffs c = coeffs(t);
    if (c[kDt] != 0.0) throw InvalidArgument(name + " has a time-derivative term; use apply_on_series");
    return apply_spatial(g, psi, c);
}

WaveFunction OperatorRep::apply(const WaveFunction& psi) const {
    WaveFunction out = psi;
    out.psi = apply(psi.grid, psi.psi, psi.time);
    return out;
}

CVec OperatorRep::apply_on_series(const std::vector<WaveFunction>& s, size_t i) const {
    if (i >= s.size()) throw InvalidArgument("series index out of range");
    const WaveFunction& cur = s[i];
    const Coeffs c = coeffs(cur.time);
    CVec out = apply_spatial(cur.grid, cur.psi, c);
    if (c[kDt] == 0.0) return out;
    if (s.size() < 3) throw InsufficientSamples("time derivative needs three samples");
    CVec dt;
    if (i == 0) {
        const double h = s[1].time - s[0].time;
        dt = (-3.0 * s[0].psi + 4.0 * s[1].psi - s[2].psi) / (2 * h);
    } else if (i + 1 == s.size()) {
        const double h = s[i].time - s[i - 1].time;
        dt = (3.0 * s[i].psi - 4.0 * s[i - 1].psi + s[i - 2].psi) / (2 * h);
    } else {
        dt = (s[i + 1].psi - s[i - 1].psi) / (s[i + 1].time - s[i - 1].time);
    }
    return out + c[kDt] * dt;
}

CMat OperatorRep::matrix(const Grid& g, double t) const {
    const Coeffs c = coeffs(t);
    if (c[kDt] != 0.0) throw InvalidArgument(name + " has a time-derivative term");
    CMat m = CMat::Zero(g.n, g.n);
    if (c[kD] != 0.0 || c[kXD] != 0.0) {
        const CMat d1 = derivative_matrix(g, 1);
        for (int j = 0; j < g.n; ++j) m.row(j) += (c[kD] + c[kXD] * g.x(j)) * d1.row(j);
    }
    if (c[kD2] != 0.0) m += c[kD2] * derivative_matrix(g, 2);
    for (int j = 0; j < g.n; ++j) {
        const double x = g.x(j);
        m(j, j) += c[kOne] + c[kX] * x + c[kX2] * x * x;
    }
    return m;
}

OperatorRep combine(const std::vector<std::pair<cplx, OperatorRep>>& terms, OpLabel label,
                    std::string name) {
    auto parts = terms;
    return make_op(label, std::move(name), [parts](double t) {
        Coeffs out{};
        for (const auto& [w, op] : parts) {
            const Coeffs c = op.coeffs(t);
            for (int k = 0; k < kMonoCount; ++k) out[k] += w * c[k];
        }
        return out;
    });
}

BasicOperators basic_operators(const QatContext& ctx) {
    auto c = share(ctx);
    BasicOperators ops;
    ops.X = make_op(OpLabel::X, "X", [c](double t) {
        const QatPoint q = c->at(t);
        const double m = c->mass(), hb = c->hbar();
        Coeffs k{};
        k[kOne] = -(q.b.du1 / q.W) * q.up + (q.b.u1 / q.W) * q.dup;
        k[kX] = q.b.du1 / q.W;
        k[kD] = I * hb * q.b.u1 / m;
        return k;
    });
    ops.P = make_op(OpLabel::P, "P", [c](double t) {
        const QatPoint q = c->at(t);
        const double m = c->mass(), hb = c->hbar();
        Coeffs k{};
        k[kOne] = m * (q.b.du2 / q.W) * q.up - m * (q.b.u2 / q.W) * q.dup;
        k[kX] = -m * q.b.du2 / q.W;
        k[kD] = -I * hb * q.b.u2;
        return k;
    });
    return ops;
}

QuadraticOperators quadratic_operators(const QatContext& ctx) {
    require_unforced(ctx, "quadratic operators");
    auto c = share(ctx);
    QuadraticOperators ops;
    ops.P2 = make_op(OpLabel::P2, "P2", [c](double t) {
        const QatPoint q = c->at(t);
        const double m = c->mass(), hb = c->hbar(), W = q.W, u2 = q.b.u2, v2 = q.b.du2;
        Coeffs k{};
        k[kD2] = -hb * hb * u2 * u2;
        k[kXD] = I * hb * 2.0 * m * u2 * v2 / W;
        k[kX2] = m * m * v2 * v2 / (W * W);
        k[kOne] = I * hb * m * u2 * v2 / W;
        return k;
    });
    ops.X2 = make_op(OpLabel::X2, "X2", [c](double t) {
        const QatPoint q = c->at(t);
        const double m = c->mass(), hb = c->hbar(), W = q.W, u1 = q.b.u1, v1 = q.b.du1;
        Coeffs k{};
        k[kX2] = v1 * v1 / (W * W);
        k[kXD] = I * hb * 2.0 * u1 * v1 / (m * W);
        k[kD2] = -hb * hb * u1 * u1 / (m * m);
        k[kOne] = I * hb * u1 * v1 / (m * W);
        return k;
    });
    ops.XP = make_op(OpLabel::XP, "XP", [c](double t) {
        const QatPoint q = c->at(t);
        const double m = c->mass(), hb = c->hbar(), W = q.W;
        const double u1 = q.b.u1, v1 = q.b.du1, u2 = q.b.u2, v2 = q.b.du2;
        const double s = v1 * u2 + u1 * v2;
        Coeffs k{};
        k[kD2] = hb * hb * u1 * u2 / m;
        k[kXD] = -I * hb * s / W;
        k[kX2] = -m * v1 * v2 / (W * W);
        k[kOne] = -I * hb * s / (2 * W);
        return k;
    });
    return ops;
}

QuadraticOperators first_order_on_shell(const QatContext& ctx) {
    require_unforced(ctx, "on-shell quadratic operators");
    auto c = share(ctx);
    QuadraticOperators ops;
    ops.P2 = make_op(OpLabel::P2, "P2'", [c](double t) {
        const QatPoint q = c->at(t);
        const double m = c->mass(), hb = c->hbar(), W = q.W, u2 = q.b.u2, v2 = q.b.du2;
        const double w2 = c->spec().w2(t);
        Coeffs k{};
        k[kDt] = I * hb * 2.0 * m * u2 * u2 / W;
        k[kXD] = I * hb * 2.0 * m * u2 * v2 / W;
        k[kX2] = m * m * (v2 * v2 - w2 * u2 * u2) / (W * W);
        k[kOne] = I * hb * m * u2 * v2 / W;
        return k;
    });
    ops.X2 = make_op(OpLabel::X2, "X2'", [c](double t) {
        const QatPoint q = c->at(t);
        const double m = c->mass(), hb = c->hbar(), W = q.W, u1 = q.b.u1, v1 = q.b.du1;
        const double w2 = c->spec().w2(t);
        Coeffs k{};
        k[kX2] = (v1 * v1 - w2 * u1 * u1) / (W * W);
        k[kXD] = I * hb * 2.0 * u1 * v1 / (m * W);
        k[kDt] = I * hb * 2.0 * u1 * u1 / (m * W);
        k[kOne] = I * hb * u1 * v1 / (m * W);
        return k;
    });
    ops.XP = make_op(OpLabel::XP, "XP'", [c](double t) {
        const QatPoint q = c->at(t);
        const double m = c->mass(), hb = c->hbar(), W = q.W;
        const double u1 = q.b.u1, v1 = q.b.du1, u2 = q.b.u2, v2 = q.b.du2;
        const double w2 = c->spec().w2(t);
        const double s = v1 * u2 + u1 * v2;
        Coeffs k{};
        k[kDt] = -I * hb * 2.0 * u1 * u2 / W;
        k[kXD] = -I * hb * s / W;
        k[kX2] = -m * (v1 * v2 - w2 * u1 * u2) / (W * W);
        k[kOne] = -I * hb * s / (2 * W);
        return k;
    });
    return ops;
}

OperatorRep hamiltonian_operator(const LsodeSpec& spec) {
    auto sp = std::make_shared<const LsodeSpec>(spec);
    return make_op(OpLabel::Custom, "H", [sp](double t) {
        const double m = sp->mass, hb = sp->hbar, ef = std::exp(sp->f(t));
        Coeffs k{};
        k[kD2] = -(hb * hb / (2 * m)) / ef;
        k[kX2] = 0.5 * m * sp->w2(t) * ef;
        k[kX] = -m * sp->lambda(t) * ef;
        return k;
    });
}

double on_shell_difference(const OperatorRep& second, const OperatorRep& first,
                           const std::vector<WaveFunction>& series) {
    if (series.size() < 3) throw InsufficientSamples("need at least three time samples");
    double worst = 0;
    for (size_t i = 1; i + 1 < series.size(); ++i) {
        const CVec a = second.apply_on_series(series, i);
        const CVec b = first.apply_on_series(series, i);
        const double scale = a.norm();
        worst = std::max(worst, (a - b).norm() / (scale > 0 ? scale : 1.0));
    }
    return worst;
}

double solution_preservation_residual(const LsodeSpec& spec, const OperatorRep& op,
                                      const std::vector<WaveFunction>& series) {
    if (series.size() < 3) throw InsufficientSamples("need at least three time samples");
    std::vector<WaveFunction> mapped;
    mapped.reserve(series.size());
    for (size_t i = 0; i < series.size(); ++i) {
        WaveFunction w = series[i];
        w.psi = op.apply_on_series(series, i);
        mapped.push_back(std::move(w));
    }
    return schrodinger_residual(spec, mapped);
}

CMat interior_test_basis(const Grid& g, int count) {
    if (count < 1 || count > g.n / 4) throw InvalidArgument("test basis size out of range");
    const double c = 0.5 * (g.x_min + g.x_max), half = 0.3 * g.length();
    const double ell = half / (std::sqrt(2.0 * count + 1) + 7.0);
    Eigen::MatrixXd h(g.n, count);
    for (int j = 0; j < g.n; ++j) {
        const double xi = (g.x(j) - c) / ell;
        double prev = 0, cur = std::pow(M_PI, -0.25) * std::exp(-0.5 * xi * xi);
        for (int k = 0; k < count; ++k) {
            h(j, k) = cur;
            const double next =
                std::sqrt(2.0 / (k + 1)) * xi * cur - std::sqrt(double(k) / (k + 1)) * prev;
            prev = cur;
            cur = next;
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(h);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(g.n, count);
    return q.cast<cplx>();
}

double windowed_difference(const CMat& a, const CMat& b, const Grid& g, const CMat& q,
                           bool relative) {
    const auto keep = interior_rows(g);
    CMat diff = (a - b) * q;
    CMat ref = relative ? CMat(b * q) : CMat();
    for (int j = 0; j < g.n; ++j)
        if (!keep[j]) {
            diff.row(j).setZero();
            if (relative) ref.row(j).setZero();
        }
    if (!relative) return diff.norm();
    const double s = ref.norm();
    return diff.norm() / (s > 0 ? s : 1.0);
}

std::vector<CommutatorEntry> commutator_table(const QatContext& ctx, double t, const Grid& g) {
    const BasicOperators b = basic_operators(ctx);
    const QuadraticOperators quad = quadratic_operators(ctx);
    const cplx ih = I * ctx.hbar();
    const CMat X = b.X.matrix(g, t), P = b.P.matrix(g, t);
    const CMat P2 = quad.P2.matrix(g, t), X2 = quad.X2.matrix(g, t), XP = quad.XP.matrix(g, t);
    const CMat id = CMat::Identity(g.n, g.n);
    const CMat zero = CMat::Zero(g.n, g.n);
    const CMat q = interior_test_basis(g, 16);

    struct Row {
        const char* name;
        const CMat* a;
        const CMat* b;
        CMat rhs;
        bool relative;
    };
    const std::vector<Row> rows = {
        {"[X,P]", &X, &P, ih * id, true},
        {"[X,P2]", &X, &P2, 2.0 * ih * P, true},
        {"[X,X2]", &X, &X2, zero, false},
        {"[X,XP]", &X, &XP, ih * X, true},
        {"[P,P2]", &P, &P2, zero, false},
        {"[P,X2]", &P, &X2, -2.0 * ih * X, true},
        {"[P,XP]", &P, &XP, -ih * P, true},
        {"[X2,P2]", &X2, &P2, 4.0 * ih * XP, true},
        {"[X2,XP]", &X2, &XP, 2.0 * ih * X2, true},
        {"[P2,XP]", &P2, &XP, -2.0 * ih * P2, true},
    };
    std::vector<CommutatorEntry> out;
    for (const Row& r : rows) {
        const CMat comm = (*r.a) * (*r.b) - (*r.b) * (*r.a);
        out.push_back({r.name, windowed_difference(comm, r.rhs, g, q, r.relative), r.relative});
    }
    return out;
}

Sl2Shift sl2_shift(const QatContext& ctx, double a, double b, double c, double d, const Grid& g) {
    Sl2Shift s{ctx.shifted(a, b, c, d), a, b, c, d};
    const double m = ctx.mass();
    const BasicOperators old_ops = basic_operators(ctx);
    const BasicOperators new_ops = basic_operators(s.context);
    const OperatorRep x_map = combine({{a, old_ops.X}, {-b / m, old_ops.P}}, OpLabel::X, "aX-bP/m");
    const OperatorRep p_map = combine({{-c * m, old_ops.X}, {d, old_ops.P}}, OpLabel::P, "-cmX+dP");

    const double lo = std::max(ctx.window().lo, s.context.window().lo);
    const double hi = std::min(ctx.window().hi, s.context.window().hi);
    if (!(hi > lo)) throw OutsideWindow("shifted and original windows do not overlap");
    const CMat q = interior_test_basis(g, 16);
    const CMat id = CMat::Identity(g.n, g.n);
    constexpr int samples = 7;
    for (int k = 0; k < samples; ++k) {
        const double t = lo + (hi - lo) * (k + 0.5) / samples;
        const CMat xn = new_ops.X.matrix(g, t), pn = new_ops.P.matrix(g, t);
        s.operator_map_error =
            std::max({s.operator_map_error, windowed_difference(xn, x_map.matrix(g, t), g, q, true),
                      windowed_difference(pn, p_map.matrix(g, t), g, q, true)});
        s.commutator_error = std::max(
            s.commutator_error,
            windowed_difference(xn * pn - pn * xn, I * ctx.hbar() * id, g, q, true));
    }
    return s;
}

WaveFunction boundary_map(const Sl2Shift& s, const WaveFunction& psi) {
    if (psi.time != 0.0) throw InvalidArgument("boundary map acts on states at t = 0");
    return qat_forward(s.context, psi);
}

WaveFunction boundary_map_printed(double c, double d, const WaveFunction& psi, double m,
                                  double hbar) {
    if (!(d > 0)) throw InvalidArgument("boundary map needs d > 0");
    WaveFunction out = dilate(psi, d);
    out.psi *= d;  // dilate carries d^{-1/2}; the literal form has d^{+1/2}
    return quadratic_phase(out, -c * m / (2 * hbar * d));
}

CMat de_evolve(const OperatorRep& op, const EvolutionOperator& U, double t, const Grid& g) {
    return U.adjoint_matrix(g, t) * op.matrix(g, t) * U.matrix(g, t);
}

HamiltonianDrift de_evolved_hamiltonian_fit(const QatContext& ctx, const Grid& g, double t_end,
                                            int samples) {
    require_unforced(ctx, "the Hamiltonian fit");
    if (samples < 4 || !(t_end > 0)) throw InvalidArgument("need at least 4 samples on (0, t_end]");
    const double m = ctx.mass(), hb = ctx.hbar();
    const OperatorRep h = hamiltonian_operator(ctx.spec());
    const EvolutionOperator U{ctx};
    const CMat q = interior_test_basis(g, 16);
    const auto keep = interior_rows(g);

    const CMat K = -(hb * hb / (2 * m)) * derivative_matrix(g, 2);
    CMat V = CMat::Zero(g.n, g.n), XP = cplx(0, -hb) * derivative_matrix(g, 1);
    for (int j = 0; j < g.n; ++j) {
        const double x = g.x(j);
        V(j, j) = 0.5 * m * x * x;
        XP.row(j) *= x;
        XP(j, j) += cplx(0, -0.5 * hb);
    }
    auto flat = [&](const CMat& a) {
        CMat aq = a * q;
        for (int j = 0; j < g.n; ++j)
            if (!keep[j]) aq.row(j).setZero();
        return Eigen::Map<const CVec>(aq.data(), aq.size()).eval();
    };
    CMat design(g.n * q.cols(), 4);
    design.col(0) = flat(K);
    design.col(1) = flat(V);
    design.col(2) = flat(XP);
    design.col(3) = flat(CMat::Identity(g.n, g.n));
    const auto solver = design.colPivHouseholderQr();

    HamiltonianDrift out;
    Eigen::MatrixXd vand(samples, 4);
    Eigen::MatrixXd coef(samples, 3);
    for (int s = 0; s < samples; ++s) {
        const double t = t_end * s / (samples - 1);
        const CVec rhs = flat(de_evolve(h, U, t, g));
        const CVec c = solver.solve(rhs);
        out.max_fit_residual =
            std::max(out.max_fit_residual, (design * c - rhs).norm() / std::max(rhs.norm(), 1e-300));
        for (int p = 0; p < 4; ++p) vand(s, p) = std::pow(t, p);
        coef(s, 0) = c[0].real();
        coef(s, 1) = c[1].real();
        coef(s, 2) = c[2].real();
    }
    const Eigen::MatrixXd poly = vand.colPivHouseholderQr().solve(coef);
    for (int p = 0; p < 4; ++p) {
        out.k[p] = poly(p, 0);
        out.v[p] = poly(p, 1);
        out.xp[p] = poly(p, 2);
    }
    return out;
}

}  // namespace qat
