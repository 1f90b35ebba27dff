#include <cmath>

#include "doctest.h"
#include "gen.hpp"
#include "nonloc/envelope_abp.hpp"

using namespace nonloc;

namespace {

BoundedFunction spike(int n, double h)
{
    const int N = static_cast<int>(std::lround(4.0 / h)) + 1;
    std::vector<double> v(n == 1 ? N : N * N, 0.0);
    v[n == 1 ? N / 2 : (N / 2) * N + N / 2] = 1.0;
    return BoundedFunction::from_grid(n, 2.0, h, std::move(v), Exterior::constant(0.0));
}

// Random data: arbitrary inside B_{1/2}, nonpositive elsewhere.
BoundedFunction hull_data(Rng& rng, int n, double h)
{
    auto proto = spike(n, h);
    std::vector<double> v(proto.node_count());
    for (std::size_t k = 0; k < v.size(); ++k) {
        double r = norm(proto.node(k), n);
        v[k] = r <= 0.5 ? rng.uniform(-1.0, 1.0) : -rng.uniform(0.0, 1.0);
    }
    return proto.with_values(std::move(v));
}

// Upper concave hull of {(x_i, v_i)} at x by brute force over segments (1D) or
// triangles (2D), which is the value of the plane LP at x.
double hull_oracle(const BoundedFunction& u, const Vec& x)
{
    const int n = u.dim();
    std::vector<Vec> P;
    std::vector<double> V;
    for (std::size_t k = 0; k < u.node_count(); ++k)
        if (norm(u.node(k), n) <= 2.0 + 1e-12) {
            P.push_back(u.node(k));
            V.push_back(std::max(0.0, u.values()[k]));
        }
    double best = 0.0;
    const std::size_t m = P.size();
    if (n == 1) {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                double a = P[i][0], b = P[j][0];
                if (a > x[0] + 1e-12 || b < x[0] - 1e-12)
                    continue;
                double val = b - a < 1e-12 ? std::max(V[i], V[j]) : V[i] + (V[j] - V[i]) * (x[0] - a) / (b - a);
                best = std::max(best, val);
            }
        return best;
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            for (std::size_t k = j + 1; k < m; ++k) {
                Vec a = P[i], b = P[j], c = P[k];
                double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
                if (std::abs(det) < 1e-12)
                    continue;
                double l1 = ((x[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (x[1] - a[1])) / det;
                double l2 = ((b[0] - a[0]) * (x[1] - a[1]) - (x[0] - a[0]) * (b[1] - a[1])) / det;
                double l0 = 1.0 - l1 - l2;
                if (l0 < -1e-12 || l1 < -1e-12 || l2 < -1e-12)
                    continue;
                best = std::max(best, l0 * V[i] + l1 * V[j] + l2 * V[k]);
            }
    return best;
}

}  // namespace

TEST_CASE("envelope of the 1D spike")
{
    auto u = spike(1, 1.0 / 64.0);
    EnvelopeResult env = concave_envelope(u);
    for (std::size_t k = 0; k < u.node_count(); ++k) {
        double x = u.node(k)[0];
        double want = std::abs(x) <= 2.0 ? 1.0 - std::abs(x) / 2.0 : 0.0;
        CHECK(env.gamma[k] == doctest::Approx(want).epsilon(1e-14).scale(1.0));
    }
    CHECK(env.contact_count() == 1);
    std::size_t mid = u.index(u.nodes_per_axis() / 2);
    CHECK(env.contact[mid]);
    auto sd = superdifferential(env, mid);
    CHECK(sd[0][0] == doctest::Approx(-0.5));
    CHECK(sd[1][0] == doctest::Approx(0.5));
    CHECK(ma_measure(env, mid, 1.0) == doctest::Approx(2.0 * std::log1p(0.5)).epsilon(1e-13));
}

TEST_CASE("nonpositive data has a zero envelope")
{
    for (int n = 1; n <= 2; ++n) {
        auto u = spike(n, 0.25).with_values(std::vector<double>(spike(n, 0.25).node_count(), -1.0));
        EnvelopeResult env = concave_envelope(u);
        CHECK(env.contact_count() == 0);
        for (double g : env.gamma)
            CHECK(g == 0.0);
        CubeCover c = cube_decomposition(env, [](const Vec&) { return 1.0; }, 1.5);
        CHECK(c.cubes.empty());
    }
}

TEST_CASE("envelope preconditions")
{
    auto small = BoundedFunction::from_grid(1, 1.0, 0.25, std::vector<double>(9, 0.0), Exterior::constant(0.0));
    CHECK_THROWS_AS(concave_envelope(small), InvalidArgument);
    auto u = spike(1, 0.25);
    std::vector<double> v = u.values();
    v[0 + 1] = 0.5;  // x = -1.75
    CHECK_THROWS_AS(concave_envelope(u.with_values(v)), InvalidArgument);
}

TEST_CASE("envelope matches the hull oracle at random nodes")
{
    Rng rng(44);
    for (int n = 1; n <= 2; ++n) {
        double h = n == 1 ? 1.0 / 64.0 : 0.25;
        for (int trial = 0; trial < 3; ++trial) {
            auto u = hull_data(rng, n, h);
            EnvelopeResult env = concave_envelope(u);
            for (int s = 0; s < (n == 1 ? 20 : 6); ++s) {
                std::size_t k;
                do {
                    k = static_cast<std::size_t>(rng.integer(0, static_cast<int>(u.node_count()) - 1));
                } while (!env.in_b2[k]);
                CHECK(std::abs(env.gamma[k] - hull_oracle(u, u.node(k))) <= 1e-8);
            }
        }
    }
}

TEST_CASE("envelope dominates the data and its supergradients are global")
{
    Rng rng(45);
    for (int n = 1; n <= 2; ++n) {
        double h = n == 1 ? 1.0 / 64.0 : 1.0 / 8.0;
        auto u = hull_data(rng, n, h);
        EnvelopeResult env = concave_envelope(u);
        std::vector<std::size_t> b2;
        for (std::size_t k = 0; k < u.node_count(); ++k)
            if (env.in_b2[k]) {
                b2.push_back(k);
                CHECK(env.gamma[k] >= std::max(0.0, u.values()[k]) - 1e-12);
            } else {
                CHECK(env.gamma[k] == 0.0);
            }
        for (int s = 0; s < 40; ++s) {
            std::size_t x = b2[rng.integer(0, static_cast<int>(b2.size()) - 1)];
            double worst = -kInf;
            for (std::size_t y : b2) {
                double plane = env.gamma[x] + dot(env.supergrad[x], sub(u.node(y), u.node(x)), n);
                worst = std::max(worst, env.gamma[y] - plane);
            }
            CHECK(worst <= 1e-9);
        }
        for (std::size_t k = 0; k < u.node_count(); ++k)
            if (env.contact[k]) {
                CHECK(norm(u.node(k), n) < 1.0);
                CHECK(env.gamma[k] - u.values()[k] <= env.tol_contact);
            }
    }
}

TEST_CASE("g_eta values")
{
    CHECK(g_eta(Vec{0.0, 0.0}, 1.0, 2) == 1.0);
    CHECK(g_eta(Vec{1.0, 0.0}, 1.0, 2) == doctest::Approx(0.5));
    CHECK(g_eta(Vec{1.0, 0.0}, 0.5, 1) == doctest::Approx(1.0 / 1.5));
    double prev = kInf;
    for (double z = 0.0; z < 5.0; z += 0.25) {
        double v = g_eta(Vec{z, 0.0}, 0.3, 2);
        CHECK(v < prev);
        prev = v;
    }
    CHECK_THROWS_AS(g_eta(Vec{0.0, 0.0}, 0.0, 1), InvalidArgument);
}

TEST_CASE("ring radii")
{
    RingFamily R = ring_family(1, Vec{0.0, 0.0}, 1.5, 6);
    CHECK(R.rho0 == 1.0 / 16.0);
    CHECK(R.radii[0] == 1.0 / 64.0);
    for (std::size_t k = 0; k + 1 < R.radii.size(); ++k)
        CHECK(R.radii[k + 1] / R.radii[k] == 0.5);
    CHECK(ring_family(2, Vec{0.0, 0.0}, 1.99, 2).radii[0] < 1e-30);
    CHECK_THROWS_AS(ring_family(1, Vec{0.0, 0.0}, 2.0, 2), InvalidArgument);
}

TEST_CASE("ring check on a concave paraboloid")
{
    // u = 1 - 4|x|^2 on B_{1/2}: increments below the tangent are 4|y|^2, so with
    // M above 4 no ring point reaches M r_k^2.
    const double h = 1.0 / 2048.0;
    auto u = BoundedFunction::from_closed_form(
        1, 2.0, h, [](const Vec& x) { return std::abs(x[0]) <= 0.5 ? 1.0 - 4.0 * x[0] * x[0] : 0.0; },
        Exterior::constant(0.0), 1.0);
    EnvelopeResult env = concave_envelope(u);
    std::size_t mid = u.index(u.nodes_per_axis() / 2);
    REQUIRE(env.contact[mid]);
    RingCheck r = ring_measure_check(env, mid, 5.0, 1.0, 1.5, 1.0, 3);
    CHECK(r.k_found == 0);
    CHECK(r.fractions[0] == 0.0);
    // Fractions do not increase with M.
    RingCheck lo = ring_measure_check(env, mid, 1.0, 1.0, 1.5, 1.0, 3);
    for (std::size_t k = 0; k < r.fractions.size(); ++k)
        if (!std::isnan(r.fractions[k]))
            CHECK(r.fractions[k] <= lo.fractions[k]);
    CHECK_THROWS_AS(ring_measure_check(env, 0, 5.0, 1.0, 1.5), InvalidArgument);
}

TEST_CASE("cube cover of the 1D spike")
{
    auto u = spike(1, 1.0 / 256.0);
    EnvelopeResult env = concave_envelope(u);
    ScalarField f = [](const Vec&) { return 1.0; };
    CubeCover c = calibrate_cover(env, f, 1.5);
    CHECK_FALSE(c.max_depth_hit);
    CHECK(c.a);
    CHECK(c.b);
    CHECK(c.c);
    CHECK(c.d);
    CHECK(c.e_all);
    CHECK(c.f_all);
    CHECK(std::isfinite(c.C));
    CHECK(c.gamma_measured > 0.0);
    for (const Cube& q : c.cubes)
        CHECK(q.depth < 12);

    AlexandroffResult a = alexandroff_aggregate(c, env, f);
    CHECK(a.lhs > 0.0);
    CHECK(a.rhs > 0.0);
    CHECK(a.sup_u_plus == 1.0);

    // Doubling u doubles sup u+ and does not shrink the gradient image.
    std::vector<double> v2 = u.values();
    for (double& x : v2)
        x *= 2.0;
    EnvelopeResult env2 = concave_envelope(u.with_values(v2));
    AlexandroffResult a2 = alexandroff_aggregate(calibrate_cover(env2, f, 1.5), env2, f, a.eta);
    CHECK(a2.sup_u_plus == 2.0);
    CHECK(a2.lhs >= a.lhs);
}

TEST_CASE("dyadic covering lemma on masks")
{
    CHECK(dyadic_cz_check({0, 0, 0, 0}, {0, 0, 0, 0}, 1, 2, 0.5) == CzOutcome::holds);
    CHECK(dyadic_cz_check({1, 1, 1, 1}, {1, 1, 1, 1}, 1, 2, 0.5) == CzOutcome::hypotheses_unmet);
    CHECK_THROWS_AS(dyadic_cz_check({1, 0}, {0, 0}, 1, 1, 0.5), InvalidArgument);
    CHECK_THROWS_AS(dyadic_cz_check({1, 0}, {1, 0, 0}, 1, 1, 0.5), InvalidArgument);

    // Whenever the hypotheses hold the conclusion must hold too.
    Rng rng(46);
    int checked = 0;
    for (int trial = 0; trial < 400; ++trial) {
        int n = rng.integer(1, 2), level = n == 1 ? 6 : 4;
        std::size_t cells = n == 1 ? (1u << level) : (1u << (2 * level));
        double pa = rng.uniform(0.0, 0.3), pb = rng.uniform(0.3, 1.0), delta = rng.uniform(0.1, 0.9);
        std::vector<char> A(cells), B(cells);
        for (std::size_t k = 0; k < cells; ++k) {
            B[k] = rng.uniform(0, 1) < pb;
            A[k] = B[k] && rng.uniform(0, 1) < pa;
        }
        CzOutcome o = dyadic_cz_check(A, B, n, level, delta);
        CHECK(o != CzOutcome::violated);
        checked += o == CzOutcome::holds;
    }
    CHECK(checked > 0);
}
