#include "qat/classical.hpp"

#include <algorithm>
#include <cmath>

#include <boost/numeric/odeint.hpp>

#include "qat/errors.hpp"

namespace qat {

namespace {

constexpr double kSampleStep = 1e-3;
// Panels coincide with the sample knots so each one sees a smooth integrand.
constexpr double kPanelStep = kSampleStep;

double checked(double v, const char* what, double t) {
    if (!std::isfinite(v))
        throw NonFiniteCoefficient(std::string(what) + " at t=" + std::to_string(t));
    return v;
}

struct Hermite {
    double h00, h10, h01, h11;
    explicit Hermite(double s) {
        const double s2 = s * s, s3 = s2 * s;
        h00 = 2 * s3 - 3 * s2 + 1;
        h10 = s3 - 2 * s2 + s;
        h01 = -2 * s3 + 3 * s2;
        h11 = s3 - s2;
    }
    double operator()(double y0, double d0, double y1, double d1, double h) const {
        return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    }
};

// Samples on t_k = k h, k in [kmin, kmax], holding value, first and second
// derivative of u1, u2, up.
class SampledSource final : public detail::BasisSource {
public:
    SampledSource(int kmin, int kmax, double h) : kmin_(kmin), kmax_(kmax), h_(h) {
        const auto n = static_cast<size_t>(kmax - kmin + 1);
        for (auto& c : data_) c.assign(n, {0.0, 0.0, 0.0});
    }

    void set(int k, int comp, double u, double du, double ddu) {
        data_[comp][static_cast<size_t>(k - kmin_)] = {u, du, ddu};
    }

    BasisPoint eval(double t) const override {
        double x = t / h_;
        int k = static_cast<int>(std::floor(x));
        k = std::clamp(k, kmin_, kmax_ - 1);
        const Hermite hm(x - k);
        const auto i = static_cast<size_t>(k - kmin_);
        double v[3], d[3];
        for (int c = 0; c < 3; ++c) {
            const auto& a = data_[c][i];
            const auto& b = data_[c][i + 1];
            v[c] = hm(a[0], a[1], b[0], b[1], h_);
            d[c] = hm(a[1], a[2], b[1], b[2], h_);
        }
        BasisPoint p;
        p.u1 = v[0]; p.du1 = d[0];
        p.u2 = v[1]; p.du2 = d[1];
        p.up = v[2]; p.dup = d[2];
        return p;
    }

    double t_min() const override { return kmin_ * h_; }
    double t_max() const override { return kmax_ * h_; }

private:
    int kmin_, kmax_;
    double h_;
    std::array<std::vector<std::array<double, 3>>, 3> data_;
};

class DampedHoSource final : public detail::BasisSource {
public:
    DampedHoSource(double gamma, double omega, double lo, double hi)
        : g_(gamma), w_(omega), lo_(lo), hi_(hi) {
        om2_ = omega * omega - 0.25 * gamma * gamma;
    }

    BasisPoint eval(double t) const override {
        const double e = std::exp(-0.5 * g_ * t);
        double s, c, ds, dc;  // sin-like, cos-like and their t-derivatives
        if (om2_ > 0) {
            const double W = std::sqrt(om2_);
            s = std::sin(W * t) / W;
            c = std::cos(W * t);
            ds = c;
            dc = -W * W * s;
        } else if (om2_ < 0) {
            const double K = std::sqrt(-om2_);
            s = std::sinh(K * t) / K;
            c = std::cosh(K * t);
            ds = c;
            dc = K * K * s;
        } else {
            s = t;
            c = 1.0;
            ds = 1.0;
            dc = 0.0;
        }
        BasisPoint p;
        p.u1 = e * s;
        p.u2 = e * (c + 0.5 * g_ * s);
        p.du1 = -0.5 * g_ * p.u1 + e * ds;
        p.du2 = -0.5 * g_ * p.u2 + e * (dc + 0.5 * g_ * ds);
        p.up = p.dup = 0.0;
        return p;
    }

    double t_min() const override { return lo_; }
    double t_max() const override { return hi_; }

private:
    double g_, w_, lo_, hi_, om2_;
};

}  // namespace

double LsodeSpec::f(double t) const { return friction_f ? checked(friction_f(t), "f", t) : 0.0; }

double LsodeSpec::fdot(double t) const {
    if (friction_rate) return checked(friction_rate(t), "f'", t);
    if (!friction_f) return 0.0;
    const double h = 1e-6 * std::max(1.0, std::abs(t));
    return checked((friction_f(t + h) - friction_f(t - h)) / (2 * h), "f'", t);
}

double LsodeSpec::w2(double t) const { return omega_sq ? checked(omega_sq(t), "omega^2", t) : 0.0; }

double LsodeSpec::lambda(double t) const {
    return forcing_lambda ? checked(forcing_lambda(t), "Lambda", t) : 0.0;
}

void LsodeSpec::validate() const {
    if (!(mass > 0)) throw InvalidArgument("mass must be positive");
    if (!(hbar > 0)) throw InvalidArgument("hbar must be positive");
    if (std::abs(f(0.0)) > 1e-14) throw InvalidArgument("friction f must vanish at t=0");
}

LsodeSpec make_preset(std::string_view name, const PresetParams& p) {
    LsodeSpec s;
    s.mass = p.mass;
    s.hbar = p.hbar;
    s.label = std::string(name);
    const double g = p.gamma, w = p.omega;
    auto friction = [&] {
        s.friction_f = [g](double t) { return g * t; };
        s.friction_rate = [g](double) { return g; };
    };
    auto spring = [&] { s.omega_sq = [w](double) { return w * w; }; };
    if (name == "free") {
    } else if (name == "damped_particle") {
        friction();
    } else if (name == "harmonic") {
        spring();
    } else if (name == "damped_harmonic") {
        friction();
        spring();
    } else if (name == "forced_damped_harmonic") {
        friction();
        spring();
        const double a = p.force_amplitude, nu = p.force_frequency;
        s.forcing_lambda = [a, nu](double t) { return a * std::cos(nu * t); };
    } else {
        throw InvalidArgument("unknown preset '" + std::string(name) + "'");
    }
    if (!s.forced())
        s.damped_ho = LsodeSpec::DampedHo{s.friction_f ? g : 0.0, s.omega_sq ? w : 0.0};
    return s;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"free", "damped_particle", "harmonic",
                                                "damped_harmonic", "forced_damped_harmonic"};
    return names;
}

ClassicalBasis::ClassicalBasis(std::shared_ptr<const detail::BasisSource> src,
                               std::array<double, 4> mix)
    : src_(std::move(src)), mix_(mix) {
    compute_window();
}

double ClassicalBasis::range_min() const { return src_->t_min(); }
double ClassicalBasis::range_max() const { return src_->t_max(); }

BasisPoint ClassicalBasis::raw(double t) const {
    BasisPoint p = src_->eval(t);
    const auto [a, b, c, d] = mix_;
    if (a == 1 && b == 0 && c == 0 && d == 1) return p;
    BasisPoint q = p;
    q.u1 = a * p.u1 + b * p.u2;
    q.du1 = a * p.du1 + b * p.du2;
    q.u2 = c * p.u1 + d * p.u2;
    q.du2 = c * p.du1 + d * p.du2;
    return q;
}

BasisPoint ClassicalBasis::at(double t) const {
    if (!window_.contains(t))
        throw OutsideWindow("t=" + std::to_string(t) + " not in [" + std::to_string(window_.lo) +
                            ", " + std::to_string(window_.hi) + "]");
    return raw(t);
}

ClassicalBasis ClassicalBasis::shifted(double a, double b, double c, double d) const {
    if (std::abs(a * d - b * c - 1.0) > 1e-12) throw NotUnimodular("ad - bc != 1");
    if (!(c * mix_[1] + d * mix_[3] > 0))
        throw InvalidArgument("shifted u2 must be positive at t=0");
    const auto [a0, b0, c0, d0] = mix_;
    return ClassicalBasis(src_, {a * a0 + b * c0, a * b0 + b * d0, c * a0 + d * c0, c * b0 + d * d0});
}

void ClassicalBasis::compute_window() {
    auto u2 = [this](double t) { return raw(t).u2; };
    auto scan = [&](double end, double& edge, bool& clipped, double& zero) {
        const double dir = end > 0 ? 1.0 : -1.0;
        const double len = std::abs(end);
        const int steps = std::max(1, static_cast<int>(std::ceil(len / kSampleStep)));
        double prev = 0.0;
        for (int k = 1; k <= steps; ++k) {
            const double t = dir * std::min(len, k * kSampleStep);
            if (u2(t) <= 0.0) {
                double inside = prev, outside = t;
                while (std::abs(outside - inside) > 1e-10) {
                    const double mid = 0.5 * (inside + outside);
                    (u2(mid) > 0.0 ? inside : outside) = mid;
                }
                edge = inside;
                clipped = true;
                zero = 0.5 * (inside + outside);
                return;
            }
            prev = t;
        }
        edge = end;
        clipped = false;
    };
    window_ = Window{};
    scan(src_->t_max(), window_.hi, window_.clipped_hi, window_.zero_hi);
    if (src_->t_min() < 0)
        scan(src_->t_min(), window_.lo, window_.clipped_lo, window_.zero_lo);
}

ClassicalBasis solve_basis(const LsodeSpec& spec, double t_max, double t_min) {
    namespace ode = boost::numeric::odeint;
    spec.validate();
    if (!(t_min <= 0 && t_max > 0)) throw InvalidArgument("need t_min <= 0 < t_max");

    const int kmax = static_cast<int>(std::ceil(t_max / kSampleStep - 1e-9));
    const int kmin = -static_cast<int>(std::ceil(-t_min / kSampleStep - 1e-9));
    auto src = std::make_shared<SampledSource>(std::min(kmin, -1), kmax, kSampleStep);

    using State = std::array<double, 6>;  // u1, u1', u2, u2', up, up'
    auto accel = [&spec](double t, double u, double du, bool forced) {
        double a = -spec.fdot(t) * du - spec.w2(t) * u;
        if (forced) a += spec.lambda(t);
        return a;
    };
    auto store = [&](int k, const State& s) {
        const double t = k * kSampleStep;
        for (int c = 0; c < 3; ++c)
            src->set(k, c, s[2 * c], s[2 * c + 1], accel(t, s[2 * c], s[2 * c + 1], c == 2));
    };

    // Integrate in s = dir * t so both halves run forward.
    auto run = [&](int kend, double dir) {
        // y holds (u, du/ds) with du/ds = dir * du/dt; d2u/ds2 = d2u/dt2.
        auto rhs = [&](const State& y, State& dy, double s) {
            const double t = dir * s;
            for (int c = 0; c < 3; ++c) {
                dy[2 * c] = y[2 * c + 1];
                dy[2 * c + 1] = accel(t, y[2 * c], dir * y[2 * c + 1], c == 2);
            }
        };
        State y{0.0, dir * 1.0, 1.0, 0.0, 0.0, 0.0};
        std::vector<double> times;
        for (int k = 0; k <= std::abs(kend); ++k) times.push_back(k * kSampleStep);
        auto stepper = ode::make_dense_output(1e-12, 1e-10, ode::runge_kutta_dopri5<State>());
        auto observe = [&](const State& s, double tt) {
            const int k = static_cast<int>(std::lround(tt / kSampleStep)) * (dir > 0 ? 1 : -1);
            State out = s;
            for (int c = 0; c < 3; ++c) out[2 * c + 1] = dir * s[2 * c + 1];
            store(k, out);
        };
        try {
            ode::integrate_times(stepper, rhs, y, times.begin(), times.end(), 1e-4, observe,
                                 ode::max_step_checker(1000000));
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw IntegrationFailure(e.what());
        }
    };
    run(kmax, 1.0);
    run(std::min(kmin, -1), -1.0);
    return ClassicalBasis(src);
}

ClassicalBasis analytic_basis_damped_ho(double gamma, double omega, double t_min, double t_max) {
    if (gamma < 0 || omega < 0) throw InvalidArgument("gamma and omega must be non-negative");
    return ClassicalBasis(std::make_shared<DampedHoSource>(gamma, omega, t_min, t_max));
}

ParticularSolution::ParticularSolution(const LsodeSpec& spec, const ClassicalBasis& basis)
    : forced_(spec.forced()), basis_(basis) {
    if (!forced_) return;
    const auto& w = basis_.window();
    auto lam = spec.forcing_lambda;
    k1_ = CumulativeIntegral(
        [b = basis, lam](double t) {
            const BasisPoint p = b.at(t);
            return p.u2 * lam(t) / p.wronskian();
        },
        w.lo, w.hi, kPanelStep);
    k2_ = CumulativeIntegral(
        [b = basis, lam](double t) {
            const BasisPoint p = b.at(t);
            return -p.u1 * lam(t) / p.wronskian();
        },
        w.lo, w.hi, kPanelStep);
}

double ParticularSolution::K1(double t) const {
    basis_.at(t);
    return forced_ ? k1_(t) : 0.0;
}

double ParticularSolution::K2(double t) const {
    basis_.at(t);
    return forced_ ? k2_(t) : 0.0;
}

double ParticularSolution::up(double t) const {
    if (!forced_) return 0.0;
    const BasisPoint p = basis_.at(t);
    return k1_(t) * p.u1 + k2_(t) * p.u2;
}

double ParticularSolution::dup(double t) const {
    if (!forced_) return 0.0;
    const BasisPoint p = basis_.at(t);
    return k1_(t) * p.du1 + k2_(t) * p.du2;
}

ParticularSolution particular_solution(const LsodeSpec& spec, const ClassicalBasis& basis) {
    return ParticularSolution(spec, basis);
}

namespace {
template <class U, class DU>
double ode_residual(const LsodeSpec& spec, U u, DU du, double t0, double t1, bool forced) {
    const double h = 1e-5;
    const int n = std::max(2, static_cast<int>(std::ceil((t1 - t0) / 1e-2)));
    double worst = 0;
    for (int k = 0; k <= n; ++k) {
        const double t = std::clamp(t0 + (t1 - t0) * k / n, t0 + h, t1 - h);
        const double ddu = (du(t + h) - du(t - h)) / (2 * h);
        double r = ddu + spec.fdot(t) * du(t) + spec.w2(t) * u(t);
        if (forced) r -= spec.lambda(t);
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}
}  // namespace

double homogeneous_residual(const LsodeSpec& spec, const ClassicalBasis& basis, double a, double b,
                            double t0, double t1) {
    auto u = [&](double t) { const auto p = basis.at(t); return a * p.u1 + b * p.u2; };
    auto du = [&](double t) { const auto p = basis.at(t); return a * p.du1 + b * p.du2; };
    return ode_residual(spec, u, du, t0, t1, false);
}

double particular_residual(const LsodeSpec& spec, const ParticularSolution& ps, double t0,
                           double t1) {
    auto u = [&](double t) { return ps.up(t); };
    auto du = [&](double t) { return ps.dup(t); };
    return ode_residual(spec, u, du, t0, t1, true);
}

}  // namespace qat
