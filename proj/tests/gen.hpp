#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "nonloc/common.hpp"
#include "nonloc/funcspace.hpp"
#include "nonloc/kernel.hpp"

// Small seeded generator for property tests.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
    int integer(int lo, int hi) { return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
    bool coin() { return (eng_() & 1u) != 0; }

    // Uniform in the cube [-r, r]^n.
    nonloc::Vec point(int n, double r)
    {
        nonloc::Vec x{uniform(-r, r), 0.0};
        if (n == 2)
            x[1] = uniform(-r, r);
        return x;
    }

private:
    double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    std::mt19937_64 eng_;
};

// Sum of two Gaussians with random centres, widths and signs; smooth everywhere
// (the exterior is the same closed form).
inline nonloc::BoundedFunction random_bump(Rng& rng, int n, double L = 2.0, double h = 1.0 / 32.0)
{
    using namespace nonloc;
    struct G {
        Vec c;
        double w, a;
    };
    std::vector<G> gs;
    double sup = 0.0;
    for (int i = 0; i < 2; ++i) {
        G g{rng.point(n, 0.5), rng.uniform(0.3, 0.8), rng.uniform(-1.0, 1.0)};
        sup += std::abs(g.a);
        gs.push_back(g);
    }
    ScalarField f = [gs, n](const Vec& x) {
        double v = 0.0;
        for (const G& g : gs) {
            Vec d = sub(x, g.c);
            v += g.a * std::exp(-dot(d, d, n) / (g.w * g.w));
        }
        return v;
    };
    return BoundedFunction::from_closed_form(n, L, h, f, Exterior::callable(f, sup), sup);
}

// Power kernel with a random two-valued profile inside [lambda_lo, lambda_hi].
inline nonloc::KernelSpec random_kernel(Rng& rng, int n, double sigma, double lambda_lo, double lambda_hi)
{
    using namespace nonloc;
    return make_power_kernel(n, sigma, lambda_lo, lambda_hi,
                             Profile::two_valued(rng.uniform(lambda_lo, lambda_hi), rng.uniform(lambda_lo, lambda_hi)));
}
