#pragma once

#include <complex>

namespace qat {

using cplx = std::complex<double>;

// Lanczos (g = 7) with reflection for Re z < 1/2.
cplx gamma_fn(cplx z);
// 1/Gamma(z); exactly zero at the poles.
cplx rgamma(cplx z);

// Confluent hypergeometric 1F1(a; b; w) by its power series.
cplx kummer_m(cplx a, cplx b, cplx w);

// Weber parabolic cylinder function D_nu(z) for |z| <= 30.
// Integer nu >= 0: Hermite reduction. Otherwise the Kummer representation
// for |z| <= 5, the asymptotic expansion for |z| > 8 (with the connection
// term past arg z = +-pi/2), and Taylor integration of the Weber equation
// along the ray in between. AccuracyLoss when the continued value and the
// series at the far end of the band disagree by more than 1e-8.
cplx parabolic_cylinder_D(cplx nu, cplx z);

// Value and z-derivative together.
struct DValue {
    cplx d, dz;
};
DValue parabolic_cylinder_D_with_derivative(cplx nu, cplx z);

}  // namespace qat
