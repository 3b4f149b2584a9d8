#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "qat/errors.hpp"
#include "qat/propagators.hpp"

using namespace qat;

namespace {

constexpr double kPi = 3.14159265358979323846;

LsodeSpec preset(const char* name, double gamma = 0.2, double omega = 1.0) {
    PresetParams p;
    p.gamma = gamma;
    p.omega = omega;
    return make_preset(name, p);
}

WaveFunction damped_plane_wave(const Grid& g, double k, double gamma, double t) {
    WaveFunction w = plane_wave(g, k);
    const double ph = -k * k * (1 - std::exp(-gamma * t)) / (2 * gamma);
    w.psi *= std::exp(cplx(0, ph));
    w.time = t;
    return w;
}

}  // namespace

TEST_CASE("time map") {
    const QatContext dp = make_context(preset("damped_particle", 1.0), 2.0);
    CHECK(dp.map_time(0.0) == 0.0);
    CHECK(std::abs(dp.map_time(1.0) - 0.6321205588285577) < 1e-9);
    CHECK(std::abs(dp.inverse_time(0.6321205588285577) - 1.0) < 1e-9);

    const QatContext ho = make_context(preset("damped_harmonic"), 1.5);
    const BasisPoint b = ho.basis().at(1.0);
    CHECK(std::abs(ho.map_time(1.0) - b.u1 / b.u2) < 1e-14);
    double prev = -1e300;
    for (int i = 0; i <= 100; ++i) {
        const double tau = ho.map_time(ho.window().hi * i / 100.0);
        CHECK(tau > prev);
        prev = tau;
    }
    CHECK_THROWS_AS(ho.map_time(5.0), OutsideWindow);
    CHECK_THROWS_AS(dp.inverse_time(5.0), TimeNotInImage);
}

TEST_CASE("forward map is the identity at t = 0") {
    const Grid g(-16, 16, 512);
    qat_test::Gen gen(31);
    for (const char* name : {"damped_harmonic", "forced_damped_harmonic", "damped_particle"}) {
        const QatContext ctx = make_context(preset(name), 1.0);
        const WaveFunction s = gen.state(g);
        const WaveFunction f = qat_forward(ctx, s);
        CHECK(f.frame == Frame::Free);
        CHECK(f.time == 0.0);
        CHECK(l2_distance(WaveFunction(g, f.psi), s) < 1e-12);
    }
}

TEST_CASE("damped particle only relabels time") {
    const Grid g(-16, 16, 512);
    const QatContext ctx = make_context(preset("damped_particle"), 2.0);
    qat_test::Gen gen(32);
    WaveFunction s = gen.state(g);
    for (double t : {0.5, 1.7}) {
        s.time = t;
        const WaveFunction f = qat_forward(ctx, s);
        CHECK((f.psi - s.psi).norm() < 1e-12);
        CHECK(std::abs(f.time - (1 - std::exp(-0.2 * t)) / 0.2) < 1e-9);
    }
}

TEST_CASE("forward map is unitary and inverts exactly") {
    // wide box: dilated tails must not reach the edge
    const Grid g(-24, 24, 1024);
    const QatContext ctx = make_context(preset("forced_damped_harmonic"), 1.6, -0.5);
    qat_test::Gen gen(33);
    for (int trial = 0; trial < 6; ++trial) {
        WaveFunction s = gen.state(g);
        s.time = gen.uniform(-0.3, 0.8);
        const WaveFunction f = qat_forward(ctx, s);
        CHECK(std::abs(f.norm() - 1) < 1e-8);
        const WaveFunction back = qat_inverse(ctx, f);
        CHECK(std::abs(back.time - s.time) < 1e-10);
        CHECK(l2_distance(back, s) < 1e-7);
    }
}

TEST_CASE("residual oracle on the damped particle plane wave") {
    const Grid g(-16, 16, 512);
    const LsodeSpec spec = preset("damped_particle");
    const double k = 2 * kPi * 6 / g.length();
    const double t = 0.8, h = 1e-3;
    const std::vector<WaveFunction> series{damped_plane_wave(g, k, 0.2, t - h),
                                           damped_plane_wave(g, k, 0.2, t),
                                           damped_plane_wave(g, k, 0.2, t + h)};
    CHECK(schrodinger_residual(spec, series) < 1e-5);

    qat_test::Gen gen(34);
    std::vector<WaveFunction> junk;
    for (int i = 0; i < 3; ++i) {
        junk.push_back(gen.state(g));
        junk.back().time = i * h;
    }
    CHECK(schrodinger_residual(spec, junk) > 0.1);
    CHECK_THROWS_AS(schrodinger_residual(spec, {junk[0], junk[1]}), InsufficientSamples);
}

TEST_CASE("solutions are carried to free solutions and back") {
    const Grid g(-16, 16, 1024);
    const LsodeSpec spec = preset("damped_harmonic");
    const QatContext ctx = make_context(spec, 1.0, -0.5);
    const WaveFunction psi0 = gaussian(g, 1.0, 0.5, 1.0);
    const double h = 5e-4;
    // equal steps in tau so the free-frame difference quotient is centred
    const double tau = ctx.map_time(0.5);
    const auto cn = evolve_crank_nicolson_series(
        spec, psi0,
        {ctx.inverse_time(tau - h), ctx.inverse_time(tau), ctx.inverse_time(tau + h)}, 1e-4);
    std::vector<WaveFunction> images;
    for (const auto& s : cn) images.push_back(qat_forward(ctx, s));
    CHECK(schrodinger_residual(spec, images) < 1e-5);

    WaveFunction free0 = qat_forward(ctx, psi0);
    std::vector<WaveFunction> lsode;
    for (double t : {0.7 - h, 0.7, 0.7 + h})
        lsode.push_back(qat_inverse_at(ctx, free_evolve(free0, ctx.map_time(t), 1, 1), t));
    CHECK(schrodinger_residual(spec, lsode) < 1e-5);
}

TEST_CASE("forward map refuses states outside the window") {
    const Grid g(-16, 16, 512);
    const QatContext ctx = make_context(preset("damped_harmonic"), 3.0);
    WaveFunction s = gaussian(g, 0, 0, 1);
    s.time = 2.5;
    CHECK_THROWS_AS(qat_forward(ctx, s), OutsideWindow);
    WaveFunction f = gaussian(g, 0, 0, 1);
    CHECK_THROWS_AS(qat_inverse(ctx, f), InvalidArgument);
}

TEST_CASE("dilation past the box is reported") {
    const Grid g(-8, 8, 256);
    const QatContext ctx = make_context(preset("damped_harmonic"), 2.0);
    WaveFunction s = gaussian(g, 0, 0, 1.5);
    s.time = ctx.window().hi;
    CHECK_THROWS_AS(qat_forward(ctx, s), SupportOverflow);
    CHECK_NOTHROW(qat_forward(ctx, s, false));
}
