#include <cmath>

#include "doctest.h"
#include "gen.hpp"
#include "nonloc/nonlocal_eval.hpp"

using namespace nonloc;

namespace {

BoundedFunction slab(double lo, double hi)
{
    return BoundedFunction::from_closed_form(
        1, 4.0, 1.0 / 64.0, [=](const Vec& x) { return (x[0] >= lo && x[0] <= hi) ? 1.0 : 0.0; },
        Exterior::indicator_slab(lo, hi), 1.0);
}

}  // namespace

TEST_CASE("indicator slab against its closed form")
{
    KernelSpec K = make_power_kernel(1, 1.5, 1.0, 1.0, Profile::isotropic(1.0));
    OperatorValue v = linear_op(slab(1.0, 2.0), Vec{0.0, 0.0}, Vec{0.0, 0.0}, 0.5, K);
    // (2 - s) * integral_1^2 y^{-1-s} dy = (1 - 2^{-1.5}) / 3.
    double exact = (1.0 - std::pow(2.0, -1.5)) / 3.0;
    CHECK(std::abs(v.value - 0.2154823) < 1e-4);
    CHECK(std::abs(v.value - exact) <= v.err_est + 1e-14);
    CHECK(v.lower() <= exact);
    CHECK(v.upper() >= exact);

    // Slab straddling the box edge: the exterior carries the part beyond L.
    Rng rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        double lo = rng.uniform(0.6, 3.5), hi = lo + rng.uniform(0.5, 10.0);
        double s = rng.uniform(1.1, 1.9);
        KernelSpec Ks = make_power_kernel(1, s, 1.0, 1.0, Profile::isotropic(1.0));
        OperatorValue w = linear_op(slab(lo, hi), Vec{0.0, 0.0}, Vec{0.0, 0.0}, 1.0, Ks);
        double ex = (2.0 - s) * (std::pow(lo, -s) - std::pow(hi, -s)) / s;
        CHECK(std::abs(w.value - ex) <= w.err_est + 1e-12);
    }
}

TEST_CASE("operators of constants vanish")
{
    auto u = BoundedFunction::from_closed_form(
        2, 1.0, 1.0 / 16.0, [](const Vec&) { return 3.0; }, Exterior::constant(3.0), 3.0);
    KernelSpec K = make_power_kernel(2, 1.4, 1.0, 2.0, Profile::two_valued(2.0, 1.0));
    CHECK(std::abs(linear_op(u, Vec{0.1, 0.2}, Vec{0.0, 0.0}, 1.0, K).value) < 1e-13);
    CHECK(std::abs(pucci(u, Vec{0.1, 0.2}, Vec{0.0, 0.0}, 1.0, 2.0, 1.4, 1).value) < 1e-13);
}

TEST_CASE("refined quadrature agrees within the error estimate")
{
    Rng rng(31);
    QuadConfig fine;
    fine.radial_nodes *= 10;
    fine.angular_nodes *= 10;
    int agree = 0, total = 0;
    for (int trial = 0; trial < 24; ++trial) {
        int n = trial < 16 ? 1 : 2;
        auto u = random_bump(rng, n);
        Vec x = rng.point(n, 0.5);
        KernelSpec K = random_kernel(rng, n, rng.uniform(1.1, 1.9), 1.0, 2.0);
        double t = QuadConfig{}.t_set[rng.integer(0, 3)];
        Vec g = gradient(u, x);
        OperatorValue a = linear_op(u, x, g, t, K);
        OperatorValue b = linear_op(u, x, g, t, K, fine);
        ++total;
        if (std::abs(a.value - b.value) <= a.err_est)
            ++agree;
    }
    CHECK(agree >= total * 95 / 100);
}

TEST_CASE("duality of the extremal integrands")
{
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        double d1 = rng.uniform(-2, 2), g = rng.uniform(-2, 2), r = rng.uniform(0.01, 3.0);
        double lo = rng.uniform(0.5, 1.0), hi = lo * rng.uniform(1.0, 3.0);
        double plus = pucci_integrand(extremal_mu_from(-d1, -g, r), lo, hi, 1);
        double minus = pucci_integrand(extremal_mu_from(d1, g, r), lo, hi, -1);
        CHECK(std::abs(plus + minus) <= 1e-12);
        CHECK(pucci_integrand(extremal_mu_from(d1, g, r), lo, hi, 1) >= minus);
    }
}

TEST_CASE("duality of the assembled extremal operators")
{
    Rng rng(13);
    for (int trial = 0; trial < 6; ++trial) {
        int n = trial < 4 ? 1 : 2;
        auto u = random_bump(rng, n);
        ScalarField f = [u](const Vec& y) { return -u(y); };
        auto v = BoundedFunction::from_closed_form(n, u.half_width(), u.spacing(), f,
                                                   Exterior::callable(f, u.sup_bound()), u.sup_bound());
        Vec x = rng.point(n, 0.5);
        Vec g = gradient(u, x);
        double s = rng.uniform(1.1, 1.9);
        OperatorValue p = pucci(v, x, scale(g, -1.0), 1.0, 2.0, s, 1);
        OperatorValue m = pucci(u, x, g, 1.0, 2.0, s, -1);
        CHECK(std::abs(p.value + m.value) <= 1e-12 * (1.0 + std::abs(m.value)));
    }
}

TEST_CASE("linear operators lie between the extremal ones")
{
    Rng rng(14);
    for (int trial = 0; trial < 10; ++trial) {
        int n = trial < 6 ? 1 : 2;
        auto u = random_bump(rng, n);
        Vec x = rng.point(n, 0.5);
        Vec g = gradient(u, x);
        double s = rng.uniform(1.1, 1.9);
        KernelSpec K = random_kernel(rng, n, s, 1.0, 2.0);
        OperatorValue hi = pucci(u, x, g, 1.0, 2.0, s, 1);
        OperatorValue lo = pucci(u, x, g, 1.0, 2.0, s, -1);
        for (double t : QuadConfig{}.t_set) {
            OperatorValue l = linear_op(u, x, g, t, K);
            CHECK(l.lower() <= hi.upper());
            CHECK(lo.lower() <= l.upper());
        }
        CHECK(pucci_t_gap(u, x, g, 1.0, 2.0, s, 1) >= -hi.err_est);
    }
}

TEST_CASE("inf-sup over a single kernel reduces to the linear operator")
{
    Rng rng(15);
    auto u = random_bump(rng, 1);
    Vec x{0.1, 0.0};
    Vec g = gradient(u, x);
    KernelSpec K = random_kernel(rng, 1, 1.6, 1.0, 2.0);
    InfSupValue v = infsup_op(u, x, g, {{K}}, {1.0}, 1);
    CHECK(v.op.value == doctest::Approx(linear_op(u, x, g, 1.0, K).value).epsilon(1e-14));
    CHECK(v.t_index == 0);

    // A larger kernel wins the sup over alpha where the integrand is positive.
    KernelSpec A = make_power_kernel(1, 1.6, 1.0, 2.0, Profile::isotropic(1.0));
    KernelSpec B = make_power_kernel(1, 1.6, 1.0, 2.0, Profile::isotropic(2.0));
    InfSupValue w = infsup_op(u, x, g, {{A}, {B}}, {1.0}, 1);
    double va = linear_op(u, x, g, 1.0, A).value, vb = linear_op(u, x, g, 1.0, B).value;
    CHECK(w.op.value == doctest::Approx(std::max(va, vb)).epsilon(1e-14));
    CHECK_THROWS_AS(infsup_op(u, x, g, {}, {1.0}, 1), InvalidArgument);
}

TEST_CASE("operator at a kink is rejected")
{
    auto u = BoundedFunction::from_closed_form(
        1, 2.0, 1.0 / 32.0, [](const Vec& x) { return std::abs(x[0]); },
        Exterior::constant(2.0), 2.0);
    KernelSpec K = make_power_kernel(1, 1.5, 1.0, 1.0, Profile::isotropic(1.0));
    CHECK_THROWS_AS(linear_op(u, Vec{0.0, 0.0}, Vec{0.0, 0.0}, 1.0, K), NumericalFailure);
}

TEST_CASE("viscosity check on a constant")
{
    auto u = BoundedFunction::from_grid(1, 1.0, 1.0 / 32.0, std::vector<double>(65, 1.0), Exterior::constant(1.0));
    OperatorSpec op = PucciSpec{1.0, 2.0, 1.5, 1};
    ScalarField below = [](const Vec&) { return -1.0; };
    ViscosityReport sub = viscosity_check(u, Region{{0.0, 0.0}, 0.5}, below, Inequality::sub, op);
    CHECK(sub.tested > 0);
    CHECK(sub.failed == 0);
    ViscosityReport super = viscosity_check(u, Region{{0.0, 0.0}, 0.5}, below, Inequality::super, op);
    CHECK(super.failed == super.tested);
    CHECK(super.worst_margin == doctest::Approx(-1.0).epsilon(1e-9));
    // Enough slack turns the failures into passes.
    CHECK(viscosity_check(u, Region{{0.0, 0.0}, 0.5}, below, Inequality::super, op, {}, 1.5).failed == 0);
}
