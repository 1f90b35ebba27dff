#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "nonloc/common.hpp"

namespace nonloc {

struct QuadConfig {
    double eps_pv = 1e-3;
    double R_trunc = 64.0;
    int radial_nodes = 16;
    int angular_nodes = 64;
    // kInf stands for the threshold where the indicator is identically 1.
    std::vector<double> t_set{0.5, 1.0, 2.0, kInf};
    // Tail beyond R_trunc is continued on doubling shells until the analytic
    // remainder drops below tail_tol or max_tail_shells is reached.
    int max_tail_shells = 400;
    double tail_tol = 1e-12;
    bool bound_only_tail = false;

    void validate() const;
};

struct Estimate {
    double value = 0.0;
    double err = 0.0;
};

// Integral of f over the shell r0 < |y| < r1 in polar coordinates. The value
// uses Gauss-Legendre on both halves of [r0, r1]; the error estimate compares it
// with the single-interval rule and (n = 2) with a rule on half the angles.
template <class F>
Estimate integrate_shell(int n, double r0, double r1, int m, int A, F&& f)
{
    const GaussRule& g = gauss_legendre(m);
    auto radial = [&](double a, double b, int nang) {
        double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        double s = 0.0;
        for (int i = 0; i < m; ++i) {
            double r = mid + half * g.x[i];
            double ang = 0.0;
            if (n == 1) {
                ang = f(Vec{r, 0.0}) + f(Vec{-r, 0.0});
            } else {
                double dth = 2.0 * std::numbers::pi / nang;
                for (int j = 0; j < nang; ++j) {
                    double th = (j + 0.5) * dth;
                    ang += f(Vec{r * std::cos(th), r * std::sin(th)});
                }
                ang *= dth * r;
            }
            s += g.w[i] * ang;
        }
        return s * half;
    };
    double mid = 0.5 * (r0 + r1);
    double fine = radial(r0, mid, A) + radial(mid, r1, A);
    double coarse = radial(r0, r1, A);
    double err = std::abs(fine - coarse);
    if (n == 2 && A >= 8)
        err += std::abs(coarse - radial(r0, r1, A / 2));
    return {fine, err};
}

// Shell edges covering [a, b]: powers of two inside the range, plus a, b and
// any extra breakpoints that fall strictly inside.
std::vector<double> dyadic_breaks(double a, double b, const std::vector<double>& extra = {});

}  // namespace nonloc
