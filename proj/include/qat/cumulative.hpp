#pragma once

#include <functional>
#include <vector>

namespace qat {

// G(t) = int_0^t g, tabulated on panels of width h over [lo, hi] (lo <= 0 <= hi).
// Each panel and each partial panel goes through adaptive Gauss-Kronrod to
// relative tolerance tol; QuadratureFailure if a panel misses it.
class CumulativeIntegral {
public:
    CumulativeIntegral() = default;
    CumulativeIntegral(std::function<double(double)> g, double lo, double hi, double h = 1e-3,
                       double tol = 1e-10);

    double operator()(double t) const;
    bool empty() const { return table_.empty(); }

private:
    double panel(double a, double b) const;

    std::function<double(double)> g_;
    double h_ = 0, tol_ = 0;
    long zero_ = 0;
    std::vector<double> table_;
};

}  // namespace qat
