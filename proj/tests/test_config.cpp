#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "config.hpp"
#include "qat/errors.hpp"

using namespace qatlab;

namespace {

const char* kBase = R"([system]
preset = damped_harmonic
gamma = 0.3

[grid]
x_min = -10
x_max = 10
n = 256

[time]
t_max = 1.5
samples = 16
propagator = crank_nicolson

[initial_state]
kind = gaussian
x0 = 1.5   ; offset
p0 = -0.5

[outputs]
list = expectations, residuals
seed = 99
)";

void expect_error(const std::string& text, int line, int col, const std::string& fragment) {
    try {
        parse_config(text, "t.cfg");
        FAIL("no error for:\n" << text);
    } catch (const ConfigParse& e) {
        CHECK(e.line == line);
        CHECK(e.col == col);
        CHECK(std::string(e.what()).find(fragment) != std::string::npos);
        CHECK(std::string(e.what()).rfind("ConfigParse: t.cfg:", 0) == 0);
    }
}

}  // namespace

TEST_CASE("a complete config") {
    const ScenarioConfig c = parse_config(kBase);
    CHECK(c.preset == "damped_harmonic");
    CHECK(c.params.gamma == 0.3);
    CHECK(c.params.omega == 1.0);
    CHECK(c.n == 256);
    CHECK(c.x_min == -10);
    CHECK(c.t_max == 1.5);
    CHECK(c.samples == 16);
    CHECK(c.propagator == "crank_nicolson");
    CHECK(c.initial.x0 == 1.5);
    CHECK(c.initial.p0 == -0.5);
    CHECK(c.seed == 99);
    CHECK(c.wants("residuals"));
    CHECK_FALSE(c.wants("spectrum"));
    const qat::LsodeSpec s = build_spec(c);
    CHECK(s.damped_ho.has_value());
    CHECK(s.f(2.0) == doctest::Approx(0.6));
}

TEST_CASE("validation errors carry positions") {
    std::string t = kBase;
    t.replace(t.find("n = 256"), 7, "n = 100");
    expect_error(t, 8, 5, "n must be a power of two");

    expect_error("[grid]\nn = 64\n[bogus]\n", 3, 2, "unknown section");
    expect_error("[grid]\n  width = 3\n", 2, 3, "unknown key 'width'");
    expect_error("[grid]\nn = 64\nn = 128\n", 3, 1, "duplicate key");
    expect_error("n = 64\n", 1, 1, "outside of any section");
    expect_error("[grid\n", 1, 1, "unterminated");
    expect_error("[grid]\nx_min = abc\n", 2, 9, "expected a number");
    expect_error("[grid]\nn =\n", 2, 4, "missing value");
    expect_error("[system]\npreset = damped_harmonic\n[outputs]\nlist = expectations, plots\n", 4, 8,
                 "unknown output 'plots'");
    expect_error("[system]\npreset = nope\n", 2, 10, "unknown preset");
    expect_error("[system]\nf = poly 1 0.2\n", 2, 5, "f must vanish");
    expect_error("[system]\nomega_sq = wobble 1\n", 2, 12, "unknown coefficient kind");
    expect_error("[grid]\nn = 64\n", 1, 1, "needs a preset");
    expect_error("[system]\npreset = free\nf = poly 0 1\n", 2, 10, "either a preset");
    expect_error("[system]\npreset = free\n[time]\npropagator = leapfrog\n", 4, 14, "propagator");
}

TEST_CASE("coefficient expressions") {
    CHECK(parse_coefficient("const 2.5")(7.0) == 2.5);
    CHECK(parse_coefficient("poly 1 0 3")(2.0) == doctest::Approx(13.0));
    CHECK(parse_coefficient("cos 2 3")(0.5) == doctest::Approx(2 * std::cos(1.5)));
    CHECK(parse_coefficient("sin 2 3")(0.5) == doctest::Approx(2 * std::sin(1.5)));
    CHECK(parse_coefficient("exp 2 -1")(1.0) == doctest::Approx(2 * std::exp(-1.0)));
    CHECK(parse_coefficient("linear_exp 2 0.5")(1.0) == doctest::Approx(2 * (1 - std::exp(-0.5))));
    const qat::TimeFn pw = parse_coefficient("pwpoly 1 : 0 1 : 1 2");
    CHECK(pw(0.5) == doctest::Approx(0.5));
    CHECK(pw(2.0) == doctest::Approx(1 + 2 * 2.0));
    CHECK_THROWS(parse_coefficient("poly"));
    CHECK_THROWS(parse_coefficient("cos 1"));
    CHECK_THROWS(parse_coefficient("pwpoly 2 1 : 0 : 1"));
}

TEST_CASE("raw coefficients build a spec") {
    const ScenarioConfig c =
        parse_config("[system]\nf = poly 0 0.2\nomega_sq = const 1\nlambda = cos 1 2\n[units]\nm = 2\n");
    const qat::LsodeSpec s = build_spec(c);
    CHECK(s.mass == 2.0);
    CHECK(s.forced());
    CHECK(s.fdot(0.3) == doctest::Approx(0.2).epsilon(1e-8));
    CHECK(s.lambda(0.25) == doctest::Approx(std::cos(0.5)));
}

TEST_CASE("shipped scenarios parse") {
    const std::filesystem::path dir = QAT_SCENARIO_DIR;
    int count = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.path().extension() != ".cfg") continue;
        INFO(e.path().string());
        const ScenarioConfig c = load_config(e.path().string());
        CHECK_NOTHROW(build_spec(c));
        CHECK_FALSE(c.outputs.empty());
        ++count;
    }
    CHECK(count >= 10);
    CHECK_THROWS_AS(load_config((dir / "missing.cfg").string()), ConfigParse);
}
