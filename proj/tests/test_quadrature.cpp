#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gen.hpp"
#include "nonloc/quadrature.hpp"

using namespace nonloc;

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2m-1 exactly")
{
    for (int m : {4, 8, 16}) {
        const GaussRule& g = gauss_legendre(m);
        REQUIRE(g.x.size() == static_cast<std::size_t>(m));
        for (int d = 0; d <= 2 * m - 1; ++d) {
            double s = 0.0;
            for (int i = 0; i < m; ++i)
                s += g.w[i] * std::pow(g.x[i], d);
            double exact = d % 2 == 1 ? 0.0 : 2.0 / (d + 1);
            CHECK(s == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
        }
    }
}

TEST_CASE("dyadic breaks")
{
    auto e = dyadic_breaks(0.3, 5.0, {0.75, 7.0});
    std::vector<double> want{0.3, 0.5, 0.75, 1.0, 2.0, 4.0, 5.0};
    CHECK(e == want);
    CHECK(dyadic_breaks(1.0, 2.0) == std::vector<double>{1.0, 2.0});
    CHECK_THROWS_AS(dyadic_breaks(0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(dyadic_breaks(2.0, 1.0), InvalidArgument);
}

TEST_CASE("shell integrals of radial monomials")
{
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        int n = rng.integer(1, 2);
        double k = rng.uniform(-2.5, 2.0);
        double r0 = rng.uniform(0.1, 1.0), r1 = r0 * rng.uniform(1.1, 2.0);
        auto f = [&](const Vec& y) { return std::pow(norm(y, n), k); };
        Estimate est = integrate_shell(n, r0, r1, 16, 64, f);
        // omega_n times the integral of r^{k+n-1}.
        double p = k + n;
        double exact = omega(n) * (std::pow(r1, p) - std::pow(r0, p)) / p;
        CHECK(est.value == doctest::Approx(exact).epsilon(1e-12));
        CHECK(est.err <= 1e-10 * std::abs(exact));
        CHECK(std::abs(est.value - exact) <= est.err + 1e-13 * std::abs(exact));
    }
}

TEST_CASE("shell integral of an odd function vanishes")
{
    auto f = [](const Vec& y) { return y[0] * std::exp(-y[0] * y[0] - y[1] * y[1]); };
    for (int n = 1; n <= 2; ++n)
        CHECK(std::abs(integrate_shell(n, 0.2, 3.0, 16, 64, f).value) < 1e-14);
}

TEST_CASE("error estimate flags an unresolved integrand")
{
    // A jump at |y| = 0.77 spoils the high-order rule; the estimate has to notice.
    auto f = [](const Vec& y) { return std::abs(y[0]) < 0.77 ? 1.0 : 0.0; };
    Estimate est = integrate_shell(1, 0.5, 1.0, 8, 8, f);
    CHECK(std::abs(est.value - 2.0 * 0.27) > 1e-6);
    CHECK(est.err > 1e-6);
}

TEST_CASE("quadrature config validation")
{
    QuadConfig c;
    CHECK_NOTHROW(c.validate());
    c.eps_pv = 0.5;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = {};
    c.R_trunc = 0.4;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = {};
    c.radial_nodes = 3;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = {};
    c.t_set = {0.25};
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
}
