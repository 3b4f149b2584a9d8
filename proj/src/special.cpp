#include "qat/special.hpp"

#include <array>
#include <cmath>
#include <string>

#include "qat/errors.hpp"

namespace qat {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSeriesRadius = 5.0;
constexpr double kAsymRadius = 8.0;
constexpr double kBandTol = 1e-8;

bool as_nonneg_int(cplx nu, int& n) {
    if (nu.imag() != 0.0 || nu.real() < -0.5) return false;
    const double r = std::round(nu.real());
    if (std::abs(nu.real() - r) > 1e-14 * std::max(1.0, r)) return false;
    n = static_cast<int>(r);
    return true;
}

// D_n(z) and D_{n+1}(z) from the Hermite recurrence.
DValue hermite_d(int n, cplx z) {
    const cplx e = std::exp(-z * z / 4.0);
    // He_k(z) = 2^{-k/2} H_k(z/sqrt 2), so D_k = e^{-z^2/4} He_k(z).
    cplx prev(0), cur(1);
    for (int k = 0; k < n; ++k) {
        const cplx next = z * cur - double(k) * prev;
        prev = cur;
        cur = next;
    }
    // D_n' = (z/2) D_n - D_{n+1}; He_{n+1} = z He_n - n He_{n-1}.
    const cplx he_next = z * cur - double(n) * prev;
    return {e * cur, e * (0.5 * z * cur - he_next)};
}

cplx d_series(cplx nu, cplx z) {
    const cplx w = z * z / 2.0;
    const cplx pre = std::pow(cplx(2.0), nu / 2.0) * std::exp(-z * z / 4.0);
    const cplx t1 = std::sqrt(kPi) * rgamma((1.0 - nu) / 2.0) * kummer_m(-nu / 2.0, 0.5, w);
    const cplx t2 =
        std::sqrt(2 * kPi) * z * rgamma(-nu / 2.0) * kummer_m((1.0 - nu) / 2.0, 1.5, w);
    return pre * (t1 - t2);
}

DValue series_pair(cplx nu, cplx z) {
    return {d_series(nu, z), 0.5 * z * d_series(nu, z) - d_series(nu + 1.0, z)};
}

// sum_k c_k(mu) z^{-2k} with c_k = (-1)^k (-mu)_{2k} / (k! 2^k) written as a ratio.
cplx asym_sum(cplx mu, cplx z, bool alternate) {
    const cplx iz2 = 1.0 / (z * z);
    cplx term(1), sum(1);
    double best = 1.0;
    for (int k = 0; k < 200; ++k) {
        cplx ratio;
        if (alternate)
            ratio = -(mu - 2.0 * k) * (mu - 2.0 * k - 1.0) / (2.0 * (k + 1)) * iz2;
        else
            ratio = (mu + 2.0 * k + 1.0) * (mu + 2.0 * k + 2.0) / (2.0 * (k + 1)) * iz2;
        const cplx next = term * ratio;
        if (std::abs(next) > best) break;  // optimal truncation
        term = next;
        best = std::abs(term);
        sum += term;
        if (best < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

cplx d_asymptotic(cplx nu, cplx z) {
    cplx v = std::exp(-z * z / 4.0 + nu * std::log(z)) * asym_sum(nu, z, true);
    const double arg = std::arg(z);
    if (std::abs(arg) > kPi / 2) {
        const cplx rot = std::exp(cplx(0, arg > 0 ? kPi : -kPi) * nu);
        v -= std::sqrt(2 * kPi) * rgamma(-nu) * rot *
             std::exp(z * z / 4.0 - (nu + 1.0) * std::log(z)) * asym_sum(nu, z, false);
    }
    return v;
}

DValue asym_pair(cplx nu, cplx z) {
    const cplx d = d_asymptotic(nu, z);
    return {d, 0.5 * z * d - d_asymptotic(nu + 1.0, z)};
}

// Taylor integration of y'' = (z^2/4 - nu - 1/2) y from z0 to z1 along the segment.
DValue continue_ode(cplx nu, cplx z0, DValue y, cplx z1) {
    const cplx a = nu + 0.5;
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(z1 - z0) / 0.25)));
    const cplx h = (z1 - z0) / double(steps);
    constexpr int K = 40;
    std::array<cplx, K + 1> c{};
    cplx z = z0;
    for (int s = 0; s < steps; ++s) {
        const cplx q0 = z * z / 4.0 - a, q1 = z / 2.0, q2 = 0.25;
        c[0] = y.d;
        c[1] = y.dz;
        for (int k = 0; k + 2 <= K; ++k) {
            cplx r = q0 * c[k];
            if (k >= 1) r += q1 * c[k - 1];
            if (k >= 2) r += q2 * c[k - 2];
            c[k + 2] = r / double((k + 2) * (k + 1));
        }
        cplx val(0), der(0), hp(1);
        for (int k = 0; k <= K; ++k) {
            val += c[k] * hp;
            if (k + 1 <= K) der += double(k + 1) * c[k + 1] * hp;
            hp *= h;
        }
        y = {val, der};
        z += h;
    }
    return y;
}

double pair_gap(const DValue& a, const DValue& b) {
    const double scale = std::abs(b.d) + std::abs(b.dz);
    return (std::abs(a.d - b.d) + std::abs(a.dz - b.dz)) / (scale > 0 ? scale : 1.0);
}

DValue general_pair(cplx nu, cplx z) {
    const double r = std::abs(z);
    if (r <= kSeriesRadius) return series_pair(nu, z);
    if (r > kAsymRadius) return asym_pair(nu, z);
    const cplx dir = z / r;
    const cplx z_in = dir * kSeriesRadius, z_out = dir * kAsymRadius;
    if (std::abs(std::arg(z)) >= kPi / 4) {
        const DValue start = series_pair(nu, z_in);
        const DValue far = continue_ode(nu, z_in, start, z_out);
        const double gap = pair_gap(far, asym_pair(nu, z_out));
        if (gap > kBandTol)
            throw AccuracyLoss("D_nu band mismatch " + std::to_string(gap) + " at |z|=8");
        return continue_ode(nu, z_in, start, z);
    }
    const DValue start = asym_pair(nu, z_out);
    const DValue near = continue_ode(nu, z_out, start, z_in);
    const double gap = pair_gap(near, series_pair(nu, z_in));
    if (gap > kBandTol)
        throw AccuracyLoss("D_nu band mismatch " + std::to_string(gap) + " at |z|=5");
    return continue_ode(nu, z_out, start, z);
}

}  // namespace

cplx gamma_fn(cplx z) {
    if (z.real() < 0.5) return kPi / (std::sin(kPi * z) * gamma_fn(1.0 - z));
    static const double g = 7.0;
    static const double coef[9] = {0.99999999999980993,  676.5203681218851,
                                   -1259.1392167224028,  771.32342877765313,
                                   -176.61502916214059,  12.507343278686905,
                                   -0.13857109526572012, 9.9843695780195716e-6,
                                   1.5056327351493116e-7};
    z -= 1.0;
    cplx x = coef[0];
    for (int i = 1; i < 9; ++i) x += coef[i] / (z + double(i));
    const cplx t = z + g + 0.5;
    return std::sqrt(2 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

cplx rgamma(cplx z) {
    if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::round(z.real())) return 0.0;
    if (z.real() < 0.5) return std::sin(kPi * z) / kPi * gamma_fn(1.0 - z);
    return 1.0 / gamma_fn(z);
}

cplx kummer_m(cplx a, cplx b, cplx w) {
    cplx term(1), sum(1);
    for (int k = 0; k < 2000; ++k) {
        term *= (a + double(k)) / ((b + double(k)) * double(k + 1)) * w;
        sum += term;
        if (term == 0.0) break;
        if (k > std::abs(w) && std::abs(term) < 1e-14 * std::abs(sum)) return sum;
    }
    if (term != 0.0) throw AccuracyLoss("Kummer series did not converge");
    return sum;
}

DValue parabolic_cylinder_D_with_derivative(cplx nu, cplx z) {
    if (!(std::abs(z) <= 30.0)) throw InvalidArgument("parabolic_cylinder_D needs |z| <= 30");
    int n = 0;
    if (as_nonneg_int(nu, n)) return hermite_d(n, z);
    return general_pair(nu, z);
}

cplx parabolic_cylinder_D(cplx nu, cplx z) {
    return parabolic_cylinder_D_with_derivative(nu, z).d;
}

}  // namespace qat
