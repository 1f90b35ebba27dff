#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gen.hpp"
#include "nonloc/kernel.hpp"

using namespace nonloc;

TEST_CASE("power kernel values")
{
    KernelSpec K = make_power_kernel(1, 1.5, 1.0, 1.0, Profile::isotropic(1.0));
    CHECK(K(Vec{2.0, 0.0}) == doctest::Approx(0.5 / std::pow(2.0, 2.5)).epsilon(1e-15));
    CHECK(K(Vec{-2.0, 0.0}) == doctest::Approx(0.5 / std::pow(2.0, 2.5)).epsilon(1e-15));
    CHECK(K.mass() == 2.0);
    CHECK(K.symmetric());
    CHECK_THROWS_AS(K(Vec{0.0, 0.0}), InvalidArgument);
}

TEST_CASE("kernel construction rejects bad parameters")
{
    CHECK_THROWS_AS(make_power_kernel(1, 2.5, 1.0, 1.0, Profile::isotropic(1.0)), InvalidArgument);
    CHECK_THROWS_AS(make_power_kernel(1, 1.0, 1.0, 1.0, Profile::isotropic(1.0)), InvalidArgument);
    CHECK_THROWS_AS(make_power_kernel(3, 1.5, 1.0, 1.0, Profile::isotropic(1.0)), InvalidArgument);
    CHECK_THROWS_AS(make_power_kernel(1, 1.5, 2.0, 1.0, Profile::isotropic(1.5)), InvalidArgument);
    CHECK_THROWS_AS(make_power_kernel(1, 1.5, 1.0, 2.0, Profile::isotropic(3.0)), InvalidArgument);
    CHECK_THROWS_AS(make_power_kernel(1, 1.5, 1.0, 2.0, Profile::two_valued(1.0, 2.5)), InvalidArgument);
}

TEST_CASE("two-valued profile moments")
{
    KernelSpec K = make_power_kernel(2, 1.5, 1.0, 3.0, Profile::two_valued(3.0, 1.0));
    CHECK(K.mass() == doctest::Approx(std::numbers::pi * 4.0));
    CHECK(K.first_moment()[0] == doctest::Approx(0.0));
    CHECK(K.first_moment()[1] == doctest::Approx(4.0));
    CHECK_FALSE(K.symmetric());
    CHECK(K.coefficient({0.0, 1.0}) == 3.0);
    CHECK(K.coefficient({0.0, -1.0}) == 1.0);
}

TEST_CASE("table profile matches the equivalent two-valued one in 1D")
{
    KernelSpec A = make_power_kernel(1, 1.3, 0.5, 2.0, Profile::table({2.0, 0.5}));
    CHECK(A.mass() == doctest::Approx(2.5));
    CHECK(A.first_moment()[0] == doctest::Approx(1.5));
    CHECK(A(Vec{1.0, 0.0}) == doctest::Approx(0.7 * 2.0));
    CHECK(A(Vec{-1.0, 0.0}) == doctest::Approx(0.7 * 0.5));
}

TEST_CASE("power kernels are invariant under rescaling")
{
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        int n = rng.integer(1, 2);
        double s = rng.uniform(1.05, 1.95);
        KernelSpec K = make_power_kernel(n, s, 1.0, 2.0, Profile::two_valued(rng.uniform(1.0, 2.0), rng.uniform(1.0, 2.0)));
        KernelSpec R = rescale_kernel(K, rng.uniform(0.1, 10.0));
        Vec y = rng.point(n, 5.0);
        if (norm(y, n) < 1e-3)
            continue;
        CHECK(R(y) == doctest::Approx(K(y)).epsilon(1e-12));
    }
    KernelSpec K = make_power_kernel(1, 1.5, 1.0, 1.0, Profile::isotropic(1.0));
    CHECK_THROWS_AS(rescale_kernel(K, 0.0), InvalidArgument);
}

TEST_CASE("truncated second moment: closed form against quadrature")
{
    // 1D, a = 1: 2 (2 - s) (1 / (2 - s) + 1 / s) = 2 + 2 (2 - s) / s.
    KernelSpec K = make_power_kernel(1, 1.5, 1.0, 1.0, Profile::isotropic(1.0));
    CHECK(truncated_second_moment(K) == doctest::Approx(2.0 + 2.0 * 0.5 / 1.5).epsilon(1e-14));
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        int n = rng.integer(1, 2);
        // r_min^{2-s} must stay below the tolerance while K(r_min) stays finite.
        double s = rng.uniform(1.1, 1.8);
        KernelSpec Q = make_power_kernel(n, s, 1.0, 2.0, Profile::two_valued(rng.uniform(1.0, 2.0), rng.uniform(1.0, 2.0)));
        CHECK(truncated_second_moment_quadrature(Q, 1e-70) == doctest::Approx(truncated_second_moment(Q)).epsilon(1e-8));
    }
}

TEST_CASE("translation smoothness of radial kernels stays below the display")
{
    for (int n = 1; n <= 2; ++n)
        for (double s : {1.2, 1.5, 1.9}) {
            KernelSpec K = make_power_kernel(n, s, 1.0, 1.0, Profile::isotropic(1.0));
            std::vector<Vec> hs{{0.01, 0.0}, {0.05, 0.0}, {0.2, 0.0}};
            SmoothnessReport r = translation_smoothness_bound(K, 1.0, hs);
            CHECK(r.converged);
            CHECK(r.bound > 0.0);
            CHECK(r.bound <= radial_smoothness_display(K, 1.0) + r.err);
        }
}

TEST_CASE("two-valued kernels: translation quotient stays bounded as h shrinks")
{
    KernelSpec K = make_power_kernel(2, 1.5, 1.0, 2.0, Profile::two_valued(2.0, 1.0));
    std::vector<Vec> hs{{0.0, 0.2}, {0.0, 0.02}, {0.0, 0.002}};
    SmoothnessReport r = translation_smoothness_bound(K, 1.0, hs);
    CHECK(r.in_L01);
    CHECK(r.growth < 2.0);
    CHECK_THROWS_AS(translation_smoothness_bound(K, 1.0, {{0.0, 0.6}}), InvalidArgument);
}

TEST_CASE("radial display value")
{
    // (2 - s) Lambda (n + s) 2^{n+s+1} omega_n / (s + 1) rho^{-1-s} at n = 2, s = 1.5, rho = 1:
    // 0.5 * 3.5 * 2^{4.5} * 2 pi / 2.5.
    KernelSpec K = make_power_kernel(2, 1.5, 1.0, 1.0, Profile::isotropic(1.0));
    CHECK(radial_smoothness_display(K, 1.0) == doctest::Approx(99.5205778147474).epsilon(1e-12));
}
