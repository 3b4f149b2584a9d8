#include "qat/cumulative.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qat/errors.hpp"

namespace qat {

CumulativeIntegral::CumulativeIntegral(std::function<double(double)> g, double lo, double hi,
                                       double h, double tol)
    : g_(std::move(g)), h_(h), tol_(tol) {
    const long nneg = static_cast<long>(std::floor(-lo / h + 1e-12));
    const long npos = static_cast<long>(std::floor(hi / h + 1e-12));
    zero_ = nneg;
    table_.assign(static_cast<size_t>(nneg + npos + 1), 0.0);
    for (long i = 1; i <= npos; ++i)
        table_[zero_ + i] = table_[zero_ + i - 1] + panel((i - 1) * h_, i * h_);
    for (long i = 1; i <= nneg; ++i)
        table_[zero_ - i] = table_[zero_ - i + 1] + panel(-(i - 1) * h_, -i * h_);
}

double CumulativeIntegral::panel(double a, double b) const {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    double err = 0, l1 = 0;
    const double v = GK::integrate(g_, a, b, 6, tol_, &err, &l1);
    if (err > tol_ * std::max(1.0, l1))
        throw QuadratureFailure("panel [" + std::to_string(a) + ", " + std::to_string(b) +
                                "] error " + std::to_string(err));
    return v;
}

double CumulativeIntegral::operator()(double t) const {
    if (table_.empty()) return 0.0;
    const double x = t / h_;
    long i = static_cast<long>(t >= 0 ? std::floor(x + 1e-12) : std::ceil(x - 1e-12));
    i = std::clamp(i, -zero_, static_cast<long>(table_.size()) - 1 - zero_);
    const double ti = i * h_;
    const double base = table_[static_cast<size_t>(i + zero_)];
    if (t == ti) return base;
    return base + panel(ti, t);
}

}  // namespace qat
