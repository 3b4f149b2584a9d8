#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>

#include "qat/errors.hpp"
#include "qat/spectra.hpp"

namespace qatlab {

namespace {

namespace fs = std::filesystem;

std::string num(double v) {
    if (v == 0) v = 0.0;  // no negative zero in the output
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

class Csv {
public:
    explicit Csv(const std::string& header) { text_ = header + "\n"; }
    void row(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
        text_ += "\n";
    }
    const std::string& text() const { return text_; }

private:
    std::string text_;
};

void emit(const Csv& csv, const Options& opt, const std::string& file, bool default_stdout) {
    if (opt.out_dir.empty() && default_stdout) {
        if (!opt.quiet) std::cout << csv.text();
        return;
    }
    const fs::path dir = opt.out_dir.empty() ? fs::path(".") : fs::path(opt.out_dir);
    fs::create_directories(dir);
    std::ofstream out(dir / file, std::ios::binary);
    out << csv.text();
    if (!out) throw qat::InvalidArgument("cannot write " + (dir / file).string());
}

struct Check {
    std::string name;
    double value;
    double threshold;
    bool below;  // pass when value < threshold, otherwise when value > threshold
    bool pass() const { return below ? value < threshold : value > threshold; }
};

class Checks {
public:
    void add(std::string name, double value, double threshold, bool below = true) {
        list_.push_back({std::move(name), value, threshold, below});
    }
    bool all_pass() const {
        for (const auto& c : list_)
            if (!c.pass()) return false;
        return true;
    }
    void print(const Options& opt) const {
        if (opt.quiet) return;
        for (const auto& c : list_)
            std::printf("%s %-34s %.3e %s %.1e\n", c.pass() ? "PASS" : "FAIL", c.name.c_str(),
                        c.value, c.below ? "<" : ">", c.threshold);
    }
    Csv csv() const {
        Csv out("check,value,threshold,relation,pass");
        for (const auto& c : list_)
            out.row({c.name, num(c.value), num(c.threshold), c.below ? "lt" : "gt",
                     c.pass() ? "1" : "0"});
        return out;
    }

private:
    std::vector<Check> list_;
};

void note(const Options& opt, const std::string& msg) {
    if (!opt.quiet) std::fprintf(stderr, "%s\n", msg.c_str());
}

qat::LsodeSpec spec_from(const SystemArgs& sys) {
    qat::PresetParams p;
    p.gamma = sys.gamma;
    p.omega = sys.omega;
    return qat::make_preset(sys.preset, p);
}

double expectation(const qat::OperatorRep& op, const qat::WaveFunction& psi) {
    const qat::WaveFunction a = op.apply(psi);
    return (qat::inner(psi, a) / qat::inner(psi, psi)).real();
}

// Standard deviation of a Hermitian operator in the state psi.
double spread(const qat::OperatorRep& op, const qat::WaveFunction& psi) {
    const qat::WaveFunction a = op.apply(psi);
    const double nn = qat::inner(psi, psi).real();
    const double mean = qat::inner(psi, a).real() / nn;
    return std::sqrt(std::max(0.0, qat::inner(a, a).real() / nn - mean * mean));
}

// Everything a run needs after the config is validated.
struct Scenario {
    const ScenarioConfig& cfg;
    qat::LsodeSpec spec;
    qat::Grid grid;
    qat::QatContext ctx;
    double t_max;
    std::vector<double> times;
    qat::WaveFunction psi0;
    std::vector<qat::WaveFunction> states;

    qat::HStarParams hstar() const {
        const double w = cfg.omega_tilde.value_or(cfg.params.omega);
        const double g = cfg.gamma_tilde.value_or(spec.damped_ho ? cfg.params.gamma : 0.0);
        return qat::HStarParams(w, g);
    }

    // psi at the given ascending times. Crank-Nicolson states come from one
    // trajectory so that time differences do not see restarted step errors.
    std::vector<qat::WaveFunction> series(const std::vector<double>& ts) const {
        if (cfg.propagator == "crank_nicolson")
            return qat::evolve_crank_nicolson_series(spec, psi0, ts, cfg.cn_dt);
        std::vector<qat::WaveFunction> out;
        for (double t : ts) out.push_back(qat::evolve_qat_exact(ctx, psi0, t));
        return out;
    }

    std::vector<qat::WaveFunction> triplet(double t, double h) const {
        if (cfg.propagator == "crank_nicolson" && t - h < psi0.time) {
            auto out = series({t, t + h});
            out.insert(out.begin(), qat::evolve_crank_nicolson(spec, out[0], -h, -cfg.cn_dt));
            return out;
        }
        return series({t - h, t, t + h});
    }
};

qat::QatContext scenario_context(const qat::LsodeSpec& spec, double& t_max, const Options& opt) {
    qat::QatContext ctx = qat::make_context(spec, t_max + 0.5, -0.5);
    if (t_max + 1e-3 < ctx.window().hi) return ctx;
    try {
        qat::QatContext ext = qat::extend_window(ctx, t_max + 1e-3);
        const auto& mix = ext.basis().mix();
        note(opt, "note: u2 vanishes at t=" + num(ctx.window().hi) + "; using u2 + " +
                      num(mix[2]) + " u1");
        return ext;
    } catch (const qat::OutsideWindow&) {
        const double clipped = ctx.window().hi - 0.05;
        note(opt, "WindowClipped: t_max " + num(t_max) + " -> " + num(clipped));
        t_max = clipped;
        return ctx;
    }
}

qat::WaveFunction initial_state(const ScenarioConfig& cfg, const qat::QatContext& ctx,
                                const qat::Grid& g, const qat::HStarParams& hp) {
    const InitialState& s = cfg.initial;
    if (s.kind == "plane_wave") return qat::plane_wave(g, s.k);
    if (s.kind == "eigen") return qat::eigenfunction_phi_n(ctx, hp, s.n, 0.0, g);
    return qat::gaussian(g, s.x0, s.p0, s.sigma, cfg.params.hbar);
}

void out_report(const Scenario& sc, Checks& checks, const Options& opt) {
    const auto& cfg = sc.cfg;
    std::string header = "t,norm";
    const bool expect = cfg.wants("expectations"), resid = cfg.wants("residuals");
    if (expect) header += ",X,P,x,p";
    if (resid) header += ",residual";
    Csv csv(header);

    std::optional<qat::BasicOperators> ops;
    if (expect) ops = qat::basic_operators(sc.ctx);
    const double n0 = sc.psi0.norm();
    double drift = 0, worst_res = 0, x0 = 0, p0 = 0, dx = 0, dp = 0, sx = 1, sp = 1;
    for (size_t i = 0; i < sc.times.size(); ++i) {
        const qat::WaveFunction& s = sc.states[i];
        drift = std::max(drift, std::abs(s.norm() - n0));
        std::vector<std::string> row{num(sc.times[i]), num(s.norm())};
        if (expect) {
            const double X = expectation(ops->X, s), P = expectation(ops->P, s);
            qat::WaveFunction xs = s;
            for (int j = 0; j < s.grid.n; ++j) xs.psi[j] *= s.grid.x(j);
            qat::WaveFunction ps = s;
            ps.psi = qat::cplx(0, -cfg.params.hbar) * qat::spectral_derivative(s.grid, s.psi, 1);
            const double nn = qat::inner(s, s).real();
            row.push_back(num(X));
            row.push_back(num(P));
            row.push_back(num(qat::inner(s, xs).real() / nn));
            row.push_back(num(qat::inner(s, ps).real() / nn));
            if (i == 0) {
                x0 = X, p0 = P;
                sx = std::max(std::abs(X), spread(ops->X, s));
                sp = std::max(std::abs(P), spread(ops->P, s));
            }
            dx = std::max(dx, std::abs(X - x0) / sx);
            dp = std::max(dp, std::abs(P - p0) / sp);
        }
        if (resid) {
            const double r = qat::schrodinger_residual(sc.spec, sc.triplet(sc.times[i], 5e-4));
            worst_res = std::max(worst_res, r);
            row.push_back(num(r));
        }
        csv.row(row);
    }
    checks.add("norm drift", drift, cfg.tolerance);
    if (expect) {
        checks.add("<X> variation", dx, cfg.tolerance);
        checks.add("<P> variation", dp, cfg.tolerance);
    }
    if (resid) checks.add("Schrodinger residual", worst_res, cfg.tolerance);
    emit(csv, opt, "report.csv", false);
}

void out_dump(const Scenario& sc, const Options& opt) {
    const fs::path dir = opt.out_dir.empty() ? fs::path(".") : fs::path(opt.out_dir);
    fs::create_directories(dir);
    for (size_t i = 0; i < sc.states.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "psi_t%03zu.csv", i);
        qat::write_csv((dir / name).string(), sc.states[i]);
    }
}

void out_algebra(const Scenario& sc, Checks& checks, const Options& opt) {
    Csv csv("t,commutator,error,relative,pass");
    double worst = 0;
    for (double t : {0.0, 0.5 * sc.t_max, sc.t_max}) {
        for (const auto& e : qat::commutator_table(sc.ctx, t, sc.grid)) {
            worst = std::max(worst, e.error);
            csv.row({num(t), e.name, num(e.error), e.relative ? "1" : "0", e.error < 1e-6 ? "1" : "0"});
        }
    }
    checks.add("commutator table", worst, 1e-6);
    emit(csv, opt, "algebra.csv", false);
}

void out_spectrum(const Scenario& sc, Checks& checks, const Options& opt) {
    const qat::HStarParams hp = sc.hstar();
    Csv csv("t,n,rayleigh,expected,abs_error");
    double worst = 0;
    for (double t : {0.0, sc.t_max}) {
        const auto rq = qat::rayleigh_quotients(sc.ctx, hp, sc.cfg.n_max, t, sc.grid);
        for (int n = 0; n <= sc.cfg.n_max; ++n) {
            const double want = qat::hstar_eigenvalue(hp, n, sc.cfg.params.hbar).real();
            worst = std::max(worst, std::abs(rq[n] - want));
            csv.row({num(t), std::to_string(n), num(rq[n]), num(want), num(std::abs(rq[n] - want))});
        }
    }
    checks.add("Rayleigh quotients", worst, sc.cfg.tolerance);
    emit(csv, opt, "spectrum.csv", false);
}

void out_free_image(const Scenario& sc, Checks& checks, const Options& opt) {
    Csv csv("t,tau,forward_residual,inverse_residual");
    const double h = 5e-4;
    const double m = sc.cfg.params.mass, hb = sc.cfg.params.hbar;
    const qat::WaveFunction free0 = qat::qat_forward(sc.ctx, sc.psi0);
    double wf = 0, wi = 0;
    for (int k = 1; k <= 5; ++k) {
        const double t = sc.t_max * k / 5.0 - (k == 5 ? 2 * h : 0.0);
        const double tau = sc.ctx.map_time(t);
        std::vector<qat::WaveFunction> fwd, inv;
        std::vector<double> ts;
        for (int s = -1; s <= 1; ++s) ts.push_back(sc.ctx.inverse_time(tau + s * h));
        for (const auto& st : sc.series(ts)) fwd.push_back(qat::qat_forward(sc.ctx, st));
        for (int s = -1; s <= 1; ++s) {
            const double ts = t + s * h;
            inv.push_back(qat::qat_inverse_at(
                sc.ctx, qat::free_evolve(free0, sc.ctx.map_time(ts) - free0.time, m, hb), ts));
        }
        const double rf = qat::schrodinger_residual(sc.spec, fwd);
        const double ri = qat::schrodinger_residual(sc.spec, inv);
        wf = std::max(wf, rf);
        wi = std::max(wi, ri);
        csv.row({num(t), num(tau), num(rf), num(ri)});
    }
    checks.add("free image residual", wf, sc.cfg.tolerance);
    checks.add("inverse image residual", wi, sc.cfg.tolerance);
    emit(csv, opt, "free_image.csv", false);
}

void out_compare(const Scenario& sc, Checks& checks, const Options& opt) {
    Csv csv("t,d_qat_cn,d_qat_m6,d_cn_m6");
    const auto cn = qat::evolve_crank_nicolson_series(sc.spec, sc.psi0, sc.times, sc.cfg.cn_dt);
    const bool m6 = sc.spec.damped_ho && sc.grid.n <= 512;
    double worst = 0;
    for (size_t i = 0; i < sc.times.size(); ++i) {
        const double t = sc.times[i];
        const qat::WaveFunction a = qat::evolve_qat_exact(sc.ctx, sc.psi0, t);
        const double d_ac = qat::l2_distance(a, cn[i]);
        worst = std::max(worst, d_ac);
        double d_am = NAN, d_cm = NAN;
        if (m6) {
            const auto& d = *sc.spec.damped_ho;
            qat::WaveFunction mg = sc.psi0;
            mg.psi = qat::matrix_exponential(qat::magnus_omega6_dho(d.gamma, d.omega, t, sc.grid,
                                                                    sc.spec.mass, sc.spec.hbar)) *
                     sc.psi0.psi;
            mg.time = t;
            d_am = qat::l2_distance(a, mg);
            d_cm = qat::l2_distance(cn[i], mg);
        }
        csv.row({num(t), num(d_ac), num(d_am), num(d_cm)});
    }
    checks.add("QAT vs Crank-Nicolson", worst, sc.cfg.tolerance);
    emit(csv, opt, "compare.csv", false);
}

void out_hamiltonian_control(const Scenario& sc, Checks& checks) {
    const double t = 0.5 * sc.t_max, h = 5e-4;
    const auto tri = sc.triplet(t, h);
    const auto ops = qat::basic_operators(sc.ctx);
    checks.add("X preserves solutions", qat::solution_preservation_residual(sc.spec, ops.X, tri),
               sc.cfg.tolerance);
    checks.add("P preserves solutions", qat::solution_preservation_residual(sc.spec, ops.P, tri),
               sc.cfg.tolerance);
    checks.add("H fails to preserve solutions",
               qat::solution_preservation_residual(sc.spec, qat::hamiltonian_operator(sc.spec), tri),
               1e-2, false);
}

void out_de_evolution(const Scenario& sc, Checks& checks, const Options& opt) {
    const qat::EvolutionOperator U{sc.ctx};
    const auto ops = qat::basic_operators(sc.ctx);
    const qat::CMat q = qat::interior_test_basis(sc.grid, 16);
    const double t = sc.t_max;
    Csv csv("quantity,value,expected,error");
    for (const auto* op : {&ops.X, &ops.P}) {
        const double e = qat::windowed_difference(qat::de_evolve(*op, U, t, sc.grid),
                                                  op->matrix(sc.grid, 0.0), sc.grid, q, true);
        checks.add("de-evolved " + op->name, e, 1e-6);
        csv.row({"U^+" + op->name + "U", num(e), num(0.0), num(e)});
    }
    if (!sc.spec.forced() && sc.spec.damped_ho) {
        const auto& d = *sc.spec.damped_ho;
        const auto fit = qat::de_evolved_hamiltonian_fit(sc.ctx, sc.grid);
        const double ek = std::abs(fit.k[1] + d.gamma) / std::max(d.gamma, 1e-300);
        csv.row({"K slope", num(fit.k[1]), num(-d.gamma), num(ek)});
        checks.add("H drift K slope", ek, 0.05);
        if (d.omega > 0) {
            const double want = d.gamma * d.omega * d.omega;
            const double ev = std::abs(fit.v[1] - want) / want;
            csv.row({"V slope", num(fit.v[1]), num(want), num(ev)});
            checks.add("H drift V slope", ev, 0.05);
        }
    }
    emit(csv, opt, "de_evolution.csv", false);
}

void out_sl2(const Scenario& sc, Checks& checks, const Options& opt) {
    std::mt19937_64 rng(sc.cfg.seed);
    std::uniform_real_distribution<double> ua(0.5, 1.5), ub(-0.5, 0.5);
    Csv csv("a,b,c,d,map_error,commutator_error");
    double wm = 0, wc = 0;
    for (int i = 0; i < 20; ++i) {
        const double a = ua(rng), b = ub(rng), c = ub(rng), d = (1 + b * c) / a;
        const auto s = qat::sl2_shift(sc.ctx, a, b, c, d, sc.grid);
        wm = std::max(wm, s.operator_map_error);
        wc = std::max(wc, s.commutator_error);
        csv.row({num(a), num(b), num(c), num(d), num(s.operator_map_error), num(s.commutator_error)});
    }
    checks.add("SL(2) operator map", wm, 1e-8);
    checks.add("SL(2) [X,P] = i hbar", wc, 1e-6);
    emit(csv, opt, "sl2.csv", false);
}

}  // namespace

int run_scenario(const ScenarioConfig& cfg, const Options& opt) {
    const qat::LsodeSpec spec = build_spec(cfg);
    double t_max = cfg.t_max;
    qat::QatContext ctx = scenario_context(spec, t_max, opt);
    Scenario sc{cfg, spec, qat::Grid(cfg.x_min, cfg.x_max, cfg.n), ctx, t_max, {}, {}, {}};
    for (int i = 0; i < cfg.samples; ++i) sc.times.push_back(t_max * i / (cfg.samples - 1));
    sc.psi0 = initial_state(cfg, ctx, sc.grid, sc.hstar());
    if (cfg.propagator == "crank_nicolson")
        sc.states = qat::evolve_crank_nicolson_series(spec, sc.psi0, sc.times, cfg.cn_dt);
    else
        for (double t : sc.times) sc.states.push_back(qat::evolve_qat_exact(ctx, sc.psi0, t));

    Checks checks;
    out_report(sc, checks, opt);
    if (cfg.wants("wavefunction_dump")) out_dump(sc, opt);
    if (cfg.wants("algebra_table")) out_algebra(sc, checks, opt);
    if (cfg.wants("spectrum")) out_spectrum(sc, checks, opt);
    if (cfg.wants("free_image")) out_free_image(sc, checks, opt);
    if (cfg.wants("propagator_compare")) out_compare(sc, checks, opt);
    if (cfg.wants("hamiltonian_control")) out_hamiltonian_control(sc, checks);
    if (cfg.wants("de_evolution")) out_de_evolution(sc, checks, opt);
    if (cfg.wants("sl2_shift")) out_sl2(sc, checks, opt);
    emit(checks.csv(), opt, "checks.csv", false);
    checks.print(opt);
    return checks.all_pass() ? kPass : kCheckFailed;
}

int verify_algebra(const SystemArgs& sys, double t, double tolerance, const Options& opt) {
    const qat::LsodeSpec spec = spec_from(sys);
    const qat::QatContext ctx = qat::make_context(spec, std::max(t, 0.0) + 1.0, -0.5);
    const qat::Grid g(sys.x_min, sys.x_max, sys.n);
    Csv csv("commutator,error,relative,pass");
    bool ok = true;
    for (const auto& e : qat::commutator_table(ctx, t, g)) {
        ok = ok && e.error < tolerance;
        csv.row({e.name, num(e.error), e.relative ? "1" : "0", e.error < tolerance ? "1" : "0"});
    }
    emit(csv, opt, "algebra.csv", true);
    return ok ? kPass : kCheckFailed;
}

int compare_propagators(const SystemArgs& sys, const std::vector<double>& times, double cn_dt,
                        const Options& opt) {
    const qat::LsodeSpec spec = spec_from(sys);
    double t_max = 0;
    for (double t : times) {
        if (t < 0) throw qat::InvalidArgument("times must be non-negative");
        t_max = std::max(t_max, t);
    }
    qat::QatContext ctx = scenario_context(spec, t_max, opt);
    const qat::Grid g(sys.x_min, sys.x_max, sys.n);
    const qat::WaveFunction psi0 = qat::gaussian(g, 1.0, 0.5, 1.0, spec.hbar);
    std::vector<double> sorted = times;
    std::sort(sorted.begin(), sorted.end());
    const auto cn = qat::evolve_crank_nicolson_series(spec, psi0, sorted, cn_dt);
    Csv csv("t,d_qat_cn,d_qat_m6,d_cn_m6");
    for (size_t i = 0; i < sorted.size(); ++i) {
        const double t = std::min(sorted[i], t_max);
        const qat::WaveFunction a = qat::evolve_qat_exact(ctx, psi0, t);
        double d_am = NAN, d_cm = NAN;
        if (spec.damped_ho) {
            qat::WaveFunction mg = psi0;
            mg.psi = qat::matrix_exponential(qat::magnus_omega6_dho(
                         spec.damped_ho->gamma, spec.damped_ho->omega, t, g, spec.mass, spec.hbar)) *
                     psi0.psi;
            mg.time = t;
            d_am = qat::l2_distance(a, mg);
            d_cm = qat::l2_distance(cn[i], mg);
        }
        csv.row({num(t), num(qat::l2_distance(a, cn[i])), num(d_am), num(d_cm)});
    }
    emit(csv, opt, "compare.csv", true);
    return kPass;
}

int spectrum(const SystemArgs& sys, double omega_tilde, double gamma_tilde, double t, int n_max,
             double tolerance, const Options& opt) {
    const qat::LsodeSpec spec = spec_from(sys);
    const qat::QatContext ctx = qat::make_context(spec, std::max(t, 0.0) + 1.0, -0.5);
    const qat::Grid g(sys.x_min, sys.x_max, sys.n);
    const qat::HStarParams hp(omega_tilde, gamma_tilde);
    const auto rq = qat::rayleigh_quotients(ctx, hp, n_max, t, g);
    Csv csv("n,rayleigh,expected,abs_error");
    bool ok = true;
    for (int n = 0; n <= n_max; ++n) {
        const double want = qat::hstar_eigenvalue(hp, n, spec.hbar).real();
        ok = ok && std::abs(rq[n] - want) < tolerance;
        csv.row({std::to_string(n), num(rq[n]), num(want), num(std::abs(rq[n] - want))});
    }
    emit(csv, opt, "spectrum.csv", true);
    return ok ? kPass : kCheckFailed;
}

int dump_basis(const SystemArgs& sys, double t_max, int samples, const Options& opt) {
    if (samples < 2) throw qat::InvalidArgument("samples must be at least 2");
    const qat::LsodeSpec spec = spec_from(sys);
    const qat::QatContext ctx = qat::make_context(spec, t_max + 0.5, -0.5);
    Csv csv("t,u1,u2,up,du1,du2,dup,W,tau");
    for (int i = 0; i < samples; ++i) {
        const double t = t_max * i / (samples - 1);
        if (!ctx.window().contains(t)) {
            note(opt, "WindowClipped: stopping at t=" + num(ctx.window().hi));
            break;
        }
        const qat::QatPoint q = ctx.at(t);
        csv.row({num(t), num(q.b.u1), num(q.b.u2), num(q.up), num(q.b.du1), num(q.b.du2),
                 num(q.dup), num(q.W), num(q.tau)});
    }
    emit(csv, opt, "basis.csv", true);
    return kPass;
}

}  // namespace qatlab
