#include "nonloc/quadrature.hpp"

namespace nonloc {

void QuadConfig::validate() const
{
    if (!(eps_pv > 0.0 && eps_pv < 0.5))
        throw InvalidArgument("quad.eps_pv must lie in (0, 1/2)");
    if (!(R_trunc > 0.5))
        throw InvalidArgument("quad.R_trunc must exceed 1/2");
    if (radial_nodes < 4 || angular_nodes < 4)
        throw InvalidArgument("quad node counts must be at least 4");
    for (double t : t_set)
        if (!(t >= 0.5))
            throw InvalidArgument("quad.t_set entries must be >= 1/2");
    if (max_tail_shells < 0)
        throw InvalidArgument("quad.max_tail_shells must be nonnegative");
}

std::vector<double> dyadic_breaks(double a, double b, const std::vector<double>& extra)
{
    if (!(a > 0.0 && b > a))
        throw InvalidArgument("dyadic_breaks needs 0 < a < b");
    std::vector<double> e{a, b};
    int k = static_cast<int>(std::ceil(std::log2(a)));
    for (double p = std::ldexp(1.0, k); p < b; p *= 2.0)
        if (p > a)
            e.push_back(p);
    for (double x : extra)
        if (x > a && x < b)
            e.push_back(x);
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    return e;
}

}  // namespace nonloc
