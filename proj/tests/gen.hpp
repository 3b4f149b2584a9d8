#pragma once

// Seeded case generators for the property tests.

#include <cmath>
#include <cstdint>
#include <array>
#include <random>

#include "qat/wavegrid.hpp"

namespace qat_test {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng_);
    }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    // A few Gaussians with random centres, momenta and widths, kept inside the
    // middle half of the box.
    qat::WaveFunction state(const qat::Grid& g, int bumps = 3) {
        const double c = 0.5 * (g.x_min + g.x_max), half = 0.25 * g.length();
        qat::CVec sum = qat::CVec::Zero(g.n);
        for (int i = 0; i < bumps; ++i) {
            const double x0 = c + uniform(-0.4, 0.4) * half;
            const qat::WaveFunction b =
                qat::gaussian(g, x0, uniform(-1.5, 1.5), uniform(0.6, 1.4));
            sum += qat::cplx(uniform(-1, 1), uniform(-1, 1)) * b.psi;
        }
        return qat::WaveFunction(g, sum).normalized();
    }

    // (a, b, c, d) with ad - bc = 1.
    std::array<double, 4> unimodular() {
        const double a = uniform(0.5, 1.5), b = uniform(-0.5, 0.5), c = uniform(-0.5, 0.5);
        return {a, b, c, (1 + b * c) / a};
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace qat_test
