#include "nonloc/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace nonloc {

double f_p(const Vec& x, int n, double p, double plateau)
{
    if (!(p > 0.0) || !(plateau > 0.0))
        throw InvalidArgument("f_p needs p > 0 and a positive plateau radius");
    double r = norm(x, n);
    return r <= plateau ? std::pow(plateau, -p) : std::pow(r, -p);
}

double delta0(double r, double p, int n)
{
    check_dim(n);
    if (!(r > 0.0))
        throw InvalidArgument("delta0 needs r > 0");
    double w = omega(n);
    double A = 1.0 + r * r;
    return p * (p + 2.0) / (2.0 * std::pow(A, p / 2.0 + 2.0)) * (w / n) + w / std::pow(A, p / 2.0 + 1.0) -
           (p / 2.0 + 1.0) * w;
}

double delta0_limit(double p, int n) { return omega(n) * p * (p + 2.0 - n) / (2.0 * n); }

PsiParams build_psi(int n, double p, double delta)
{
    check_dim(n);
    if (!(p > n))
        throw InvalidArgument("Psi needs p > n");
    // For n = 1 the interval (0, 1 - 1/n) is empty; (0, 1/2) is used instead.
    double dmax = n == 1 ? 0.5 : 1.0 - 1.0 / n;
    if (!(delta > 0.0 && delta < dmax))
        throw InvalidArgument("delta outside the admissible interval");
    PsiParams P;
    P.n = n;
    P.p = p;
    P.delta = delta;
    double outer = std::pow(static_cast<double>(n), -p / 2.0);
    P.b = -0.5 * p * std::pow(delta, -p - 2.0);
    P.a = std::pow(delta, -p) - outer - P.b * delta * delta;
    // The unscaled profile is radially decreasing, so its minimum on Q_1 is at a corner.
    double corner = 0.5 * std::sqrt(static_cast<double>(n));
    double at_corner = corner >= delta ? std::pow(corner, -p) - outer : P.a + P.b * corner * corner;
    P.c = 2.01 / at_corner;
    return P;
}

double special_psi(const Vec& x, const PsiParams& P)
{
    double r = norm(x, P.n);
    double sn = std::sqrt(static_cast<double>(P.n));
    if (r >= sn)
        return 0.0;
    if (r >= P.delta)
        return P.c * (std::pow(r, -P.p) - std::pow(sn, -P.p));
    return P.c * (P.a + P.b * r * r);
}

Vec special_psi_gradient(const Vec& x, const PsiParams& P)
{
    double r = norm(x, P.n);
    double sn = std::sqrt(static_cast<double>(P.n));
    if (r >= sn)
        return {0.0, 0.0};
    if (r >= P.delta)
        return scale(x, -P.c * P.p * std::pow(r, -P.p - 2.0));
    return scale(x, 2.0 * P.c * P.b);
}

double bump(const Vec& x, int n, double c)
{
    if (!(c > 0.0))
        throw InvalidArgument("bump height must be positive");
    double r2 = dot(x, x, n);
    return r2 >= 1.0 ? 0.0 : c * (1.0 - r2);
}

BoundedFunction barrier_function(int n, double p, double plateau, double L, double h)
{
    auto f = [n, p, plateau](const Vec& x) { return f_p(x, n, p, plateau); };
    return BoundedFunction::from_closed_form(n, L, h, f, Exterior::power_decay(1.0, p), std::pow(plateau, -p));
}

namespace {

std::vector<Vec> directions(int n, int count)
{
    if (n == 1)
        return {{1.0, 0.0}, {-1.0, 0.0}};
    std::vector<Vec> d;
    for (int k = 0; k < count; ++k) {
        double th = 2.0 * std::numbers::pi * k / count;
        d.push_back({std::cos(th), std::sin(th)});
    }
    return d;
}

}  // namespace

SubsolutionMargin verify_subsolution(int n, double p, double sigma, double lambda_lo, double lambda_hi,
                                     const QuadConfig& cfg)
{
    check_dim(n);
    double h = n == 1 ? 1.0 / 256.0 : 1.0 / 32.0;
    BoundedFunction f = barrier_function(n, p, 0.5, 8.0, h);
    std::vector<Vec> pts;
    for (double r : {1.0, 1.25, 1.5, 2.0, 4.0})
        for (const Vec& d : directions(n, 8))
            pts.push_back(scale(d, r));
    std::vector<OperatorValue> vals(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec& x = pts[i];
        Vec g = scale(x, -p * std::pow(norm(x, n), -p - 2.0));
        vals[i] = pucci(f, x, g, lambda_lo, lambda_hi, sigma, -1, cfg);
    }
    SubsolutionMargin m;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double lo = vals[i].lower();
        if (lo < m.margin) {
            m.margin = lo;
            m.worst_x = pts[i];
            m.worst_value = vals[i].value;
            m.worst_err = vals[i].err_est;
        }
    }
    return m;
}

ScanResult scan_barrier(int n, double lambda_lo, double lambda_hi, const QuadConfig& cfg, int p_max,
                        std::vector<double> sigmas, double delta)
{
    check_dim(n);
    std::sort(sigmas.begin(), sigmas.end());
    ScanResult res;
    for (int p = n + 1; p <= p_max; ++p) {
        std::vector<double> margins(sigmas.size());
        parallel_for(sigmas.size(), [&](std::size_t i) {
            margins[i] = verify_subsolution(n, p, sigmas[i], lambda_lo, lambda_hi, cfg).margin;
        });
        for (std::size_t i = 0; i < sigmas.size(); ++i)
            res.rows.push_back({static_cast<double>(p), sigmas[i], margins[i]});
        // Smallest sampled sigma with every larger sample passing.
        int first = -1;
        for (int i = static_cast<int>(sigmas.size()) - 1; i >= 0 && margins[i] >= 0.0; --i)
            first = i;
        if (first < 0)
            continue;
        BarrierParams& b = res.params;
        b.n = n;
        b.p = p;
        b.sigma_star = sigmas[first];
        b.margin = *std::min_element(margins.begin() + first, margins.end());
        b.r = 0.1;
        while (delta0(b.r, p, n) <= 0.0 && b.r > 1e-8)
            b.r *= 0.5;
        b.delta0 = delta0(b.r, p, n);
        PsiParams P = build_psi(n, p, delta);
        b.delta = delta;
        b.c_psi = P.c;
        b.quad_a = P.a;
        b.quad_b = P.b;
        b.rho0 = 1.0 / (16.0 * std::sqrt(static_cast<double>(n)));
        res.found = true;
        break;
    }
    return res;
}

BoundedFunction psi_function(const PsiParams& P, double L, double h)
{
    if (L < std::sqrt(static_cast<double>(P.n)))
        throw InvalidArgument("box must contain the support of Psi");
    auto f = [P](const Vec& x) { return special_psi(x, P); };
    return BoundedFunction::from_closed_form(P.n, L, h, f, Exterior::constant(0.0), P.c * P.a);
}

DefectResult psi_defect(double sigma, const PsiParams& P, double lambda_lo, double lambda_hi, const QuadConfig& cfg,
                        double h)
{
    const int n = P.n;
    const double hf = n == 1 ? 1.0 / 512.0 : 1.0 / 64.0;
    BoundedFunction Psi = psi_function(P, 2.0, hf);
    const double sn = std::sqrt(static_cast<double>(n));

    auto eval = [&](const Vec& x) -> std::optional<OperatorValue> {
        Openings o = measure_openings(Psi, x, cfg);
        if (!std::isfinite(o.above) || !std::isfinite(o.below))
            return std::nullopt;
        return pucci(Psi, x, special_psi_gradient(x, P), lambda_lo, lambda_hi, sigma, -1, cfg, o);
    };

    // Defect on B_{1/4}.
    DefectResult res;
    const double Lg = 0.25;
    int N = static_cast<int>(std::lround(2.0 * Lg / h)) + 1;
    std::size_t count = n == 1 ? N : static_cast<std::size_t>(N) * N;
    std::vector<double> vals(count, 0.0);
    std::vector<int> bad(count, 0);
    parallel_for(count, [&](std::size_t k) {
        int i = static_cast<int>(k % N), j = static_cast<int>(k / N);
        Vec x{-Lg + i * h, n == 2 ? -Lg + j * h : 0.0};
        if (norm(x, n) > Lg + 1e-12)
            return;
        auto v = eval(x);
        if (!v) {
            bad[k] = 1;
            return;
        }
        vals[k] = std::max(0.0, -v->lower());
    });
    if (std::any_of(bad.begin(), bad.end(), [](int b) { return b != 0; }))
        throw NumericalFailure("Psi not touchable inside B_{1/4}");
    for (double v : vals)
        res.sup = std::max(res.sup, v);
    res.psi = BoundedFunction::from_grid(n, Lg, h, vals, Exterior::constant(0.0));

    // Outside B_{1/4} the minimal operator should be nonnegative up to err.
    std::vector<Vec> pts;
    double step = n == 1 ? h : 4.0 * h;
    for (double r = Lg + step; r <= sn + 0.5; r += step) {
        if (std::abs(r - sn) < 4.0 * hf)
            continue;  // the profile has a convex corner at |x| = sqrt(n)
        for (const Vec& d : directions(n, 8))
            pts.push_back(scale(d, r));
    }
    std::vector<double> up(pts.size(), kInf);
    parallel_for(pts.size(), [&](std::size_t i) {
        auto v = eval(pts[i]);
        if (v)
            up[i] = v->upper();
    });
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!std::isfinite(up[i]))
            continue;
        ++res.outside_tested;
        if (up[i] < res.outside_min) {
            res.outside_min = up[i];
            res.outside_worst = pts[i];
        }
    }
    return res;
}

}  // namespace nonloc
