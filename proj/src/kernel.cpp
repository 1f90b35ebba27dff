#include "nonloc/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nonloc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a)
{
    a = std::fmod(a, kTwoPi);
    return a < 0.0 ? a + kTwoPi : a;
}

double raw_coefficient(const Profile& p, int n, const Vec& theta)
{
    switch (p.kind) {
    case ProfileKind::isotropic:
        return p.data[0];
    case ProfileKind::two_valued:
        return theta[n - 1] > 0.0 ? p.data[0] : p.data[1];
    case ProfileKind::table: {
        if (n == 1)
            return theta[0] > 0.0 ? p.data[0] : p.data[1];
        auto m = static_cast<int>(p.data.size());
        double phi = wrap_angle(std::atan2(theta[1], theta[0]));
        int k = std::min(m - 1, static_cast<int>(phi * m / kTwoPi));
        return p.data[k];
    }
    case ProfileKind::callable:
        return p.fn(theta);
    }
    return 0.0;
}

// Directions used to validate callable profiles and their symmetry.
std::vector<Vec> sample_directions(int n)
{
    if (n == 1)
        return {Vec{1.0, 0.0}, Vec{-1.0, 0.0}};
    std::vector<Vec> d;
    const int m = 1440;
    for (int k = 0; k < m; ++k) {
        double a = (k + 0.37) * kTwoPi / m;
        d.push_back({std::cos(a), std::sin(a)});
    }
    return d;
}

}  // namespace

double KernelSpec::coefficient(const Vec& theta) const { return raw_coefficient(profile_, n_, theta); }

double KernelSpec::operator()(const Vec& y) const
{
    double r = norm(y, n_);
    if (!(r > 0.0))
        throw InvalidArgument("kernel evaluated at the origin");
    if (scale_ == 1.0)
        return (2.0 - sigma_) * coefficient(nonloc::scale(y, 1.0 / r)) / std::pow(r, n_ + sigma_);
    double rs = r / scale_;
    return std::pow(scale_, -n_ - sigma_) * (2.0 - sigma_) * coefficient(nonloc::scale(y, 1.0 / r)) /
           std::pow(rs, n_ + sigma_);
}

std::vector<double> KernelSpec::angular_breaks() const
{
    if (n_ != 2)
        return {};
    std::vector<double> b;
    if (profile_.kind == ProfileKind::two_valued && profile_.data[0] != profile_.data[1]) {
        b = {0.0, std::numbers::pi};
    } else if (profile_.kind == ProfileKind::table) {
        auto m = profile_.data.size();
        for (std::size_t k = 0; k < m; ++k)
            if (profile_.data[k] != profile_.data[(k + m - 1) % m])
                b.push_back(kTwoPi * static_cast<double>(k) / static_cast<double>(m));
    }
    return b;
}

KernelSpec make_power_kernel(int n, double sigma, double lambda_lo, double lambda_hi, Profile profile)
{
    check_dim(n);
    if (!(sigma > 1.0 && sigma < 2.0))
        throw InvalidArgument("sigma must lie in (1, 2)");
    if (!(lambda_lo > 0.0 && lambda_lo <= lambda_hi))
        throw InvalidArgument("need 0 < lambda <= Lambda");
    switch (profile.kind) {
    case ProfileKind::isotropic:
        if (profile.data.size() != 1)
            throw InvalidArgument("isotropic profile takes one value");
        break;
    case ProfileKind::two_valued:
        if (profile.data.size() != 2)
            throw InvalidArgument("two_valued profile takes two values");
        break;
    case ProfileKind::table:
        if (n == 1 && profile.data.size() != 2)
            throw InvalidArgument("1D table profile takes two values (a(+1), a(-1))");
        if (profile.data.empty())
            throw InvalidArgument("empty profile table");
        break;
    case ProfileKind::callable:
        if (!profile.fn)
            throw InvalidArgument("callable profile without a function");
        break;
    }
    auto check = [&](double a) {
        if (!(a >= lambda_lo && a <= lambda_hi))
            throw InvalidArgument("profile value " + std::to_string(a) + " outside [lambda, Lambda]");
    };
    for (double a : profile.data)
        if (profile.kind != ProfileKind::callable)
            check(a);

    KernelSpec K;
    K.n_ = n;
    K.sigma_ = sigma;
    K.lo_ = lambda_lo;
    K.hi_ = lambda_hi;
    K.profile_ = std::move(profile);

    const Profile& p = K.profile_;
    bool sym = true;
    for (const Vec& th : sample_directions(n)) {
        double a = raw_coefficient(p, n, th);
        if (p.kind == ProfileKind::callable)
            check(a);
        if (a != raw_coefficient(p, n, scale(th, -1.0)))
            sym = false;
    }
    if (p.kind == ProfileKind::table && n == 2) {
        auto m = p.data.size();
        if (m % 2 == 1)
            sym = std::all_of(p.data.begin(), p.data.end(), [&](double a) { return a == p.data[0]; });
        else
            for (std::size_t k = 0; k < m / 2; ++k)
                sym = sym && p.data[k] == p.data[k + m / 2];
    }
    K.symmetric_ = sym;

    // Sphere integrals of a and theta a.
    if (n == 1) {
        double ap = raw_coefficient(p, 1, {1.0, 0.0}), am = raw_coefficient(p, 1, {-1.0, 0.0});
        K.mass_ = ap + am;
        K.moment_ = {ap - am, 0.0};
    } else if (p.kind == ProfileKind::isotropic) {
        K.mass_ = kTwoPi * p.data[0];
        K.moment_ = {0.0, 0.0};
    } else if (p.kind == ProfileKind::two_valued) {
        K.mass_ = std::numbers::pi * (p.data[0] + p.data[1]);
        K.moment_ = {0.0, 2.0 * (p.data[0] - p.data[1])};
    } else if (p.kind == ProfileKind::table) {
        auto m = static_cast<double>(p.data.size());
        double mass = 0.0, mx = 0.0, my = 0.0;
        for (std::size_t k = 0; k < p.data.size(); ++k) {
            double a0 = kTwoPi * k / m, a1 = kTwoPi * (k + 1) / m;
            mass += p.data[k] * (a1 - a0);
            mx += p.data[k] * (std::sin(a1) - std::sin(a0));
            my += p.data[k] * (std::cos(a0) - std::cos(a1));
        }
        K.mass_ = mass;
        K.moment_ = {mx, my};
    } else {
        const int m = 1 << 14;
        double mass = 0.0, mx = 0.0, my = 0.0;
        for (int k = 0; k < m; ++k) {
            double a = (k + 0.5) * kTwoPi / m;
            Vec th{std::cos(a), std::sin(a)};
            double c = p.fn(th);
            mass += c;
            mx += c * th[0];
            my += c * th[1];
        }
        K.mass_ = mass * kTwoPi / m;
        K.moment_ = {mx * kTwoPi / m, my * kTwoPi / m};
    }
    return K;
}

KernelSpec rescale_kernel(const KernelSpec& K, double t)
{
    if (!(t > 0.0))
        throw InvalidArgument("rescale factor must be positive");
    KernelSpec out = K;
    out.scale_ = K.scale_ * t;
    return out;
}

double truncated_second_moment(const KernelSpec& K)
{
    double s = K.sigma();
    // (2-s) * mass * (int_0^1 r^{1-s} dr + int_1^inf r^{-1-s} dr); the scale drops out.
    return (2.0 - s) * K.mass() * (1.0 / (2.0 - s) + 1.0 / s);
}

double truncated_second_moment_quadrature(const KernelSpec& K, double r_min, double r_max, int nodes)
{
    auto f = [&](const Vec& y) {
        double r = norm(y, K.n());
        return std::min(r * r, 1.0) * K(y);
    };
    auto edges = dyadic_breaks(r_min, r_max, {1.0});
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        total += integrate_shell(K.n(), edges[i], edges[i + 1], nodes, 64, f).value;
    return total;
}

double radial_smoothness_display(const KernelSpec& K, double rho1)
{
    int n = K.n();
    double s = K.sigma();
    return (2.0 - s) * K.lambda_hi() * (n + s) * std::pow(2.0, n + s + 1.0) * (omega(n) / (s + 1.0)) *
           std::pow(rho1, -1.0 - s);
}

namespace {

// Integral over the circle of radius r of g, split at the given angles; each arc
// gets a Gauss rule. Returns value and the difference to a half-size rule.
template <class G>
Estimate circle_integral(double r, std::vector<double> breaks, int nodes, G&& g)
{
    for (int k = 0; k < 8; ++k)
        breaks.push_back(kTwoPi * k / 8.0);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    const GaussRule& fine = gauss_legendre(nodes);
    const GaussRule& coarse = gauss_legendre(std::max(2, nodes / 2));
    Estimate e;
    double alt = 0.0;
    for (std::size_t i = 0; i < breaks.size(); ++i) {
        double a = breaks[i];
        double b = i + 1 < breaks.size() ? breaks[i + 1] : breaks[0] + kTwoPi;
        double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (std::size_t j = 0; j < fine.x.size(); ++j) {
            double th = mid + half * fine.x[j];
            e.value += fine.w[j] * half * g(Vec{r * std::cos(th), r * std::sin(th)});
        }
        for (std::size_t j = 0; j < coarse.x.size(); ++j) {
            double th = mid + half * coarse.x[j];
            alt += coarse.w[j] * half * g(Vec{r * std::cos(th), r * std::sin(th)});
        }
    }
    e.value *= r;
    e.err = std::abs(e.value - alt * r);
    return e;
}

}  // namespace

SmoothnessReport translation_smoothness_bound(const KernelSpec& K, double rho1, const std::vector<Vec>& h_samples,
                                              const QuadConfig& cfg)
{
    if (!(rho1 > 0.0))
        throw InvalidArgument("rho1 must be positive");
    if (h_samples.empty())
        throw InvalidArgument("no h samples");
    const int n = K.n();
    const double s = K.sigma();
    const double r_far = rho1 * std::ldexp(1.0, 60);
    SmoothnessReport rep;
    double best_h = -1.0, worst_h = kInf;
    double q_small = 0.0, q_large = 0.0;

    for (const Vec& h : h_samples) {
        double hn = norm(h, n);
        if (!(hn > 0.0) || hn >= 0.5 * rho1)
            throw InvalidArgument("h samples must satisfy 0 < |h| < rho1/2");
        auto f = [&](const Vec& y) { return std::abs(K(y) - K(sub(y, h))) / hn; };
        auto edges = dyadic_breaks(rho1, r_far);
        Estimate tot;
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            double r0 = edges[i], r1 = edges[i + 1];
            if (n == 1) {
                Estimate e = integrate_shell(1, r0, r1, cfg.radial_nodes, 4, f);
                tot.value += e.value;
                tot.err += e.err;
                continue;
            }
            // n = 2: radial Gauss rule, angular arcs split where either K(y) or K(y-h) jumps.
            const GaussRule& g = gauss_legendre(cfg.radial_nodes);
            auto radial = [&](double a, double b, bool with_err) {
                Estimate acc;
                double half = 0.5 * (b - a), mid = 0.5 * (a + b);
                for (int k = 0; k < cfg.radial_nodes; ++k) {
                    double r = mid + half * g.x[k];
                    std::vector<double> br;
                    for (double phi : K.angular_breaks()) {
                        br.push_back(phi);
                        Vec e{std::cos(phi), std::sin(phi)};
                        double he = dot(h, e, 2);
                        double sdist = -he + std::sqrt(he * he - dot(h, h, 2) + r * r);
                        Vec y = add(h, scale(e, sdist));
                        br.push_back(wrap_angle(std::atan2(y[1], y[0])));
                    }
                    // |K(y) - K(y - h)| has a kink where |y| = |y - h|.
                    double th = std::atan2(h[1], h[0]), off = std::acos(std::min(1.0, 0.5 * hn / r));
                    br.push_back(wrap_angle(th + off));
                    br.push_back(wrap_angle(th - off));
                    Estimate c = circle_integral(r, br, 16, f);
                    acc.value += g.w[k] * half * c.value;
                    if (with_err)
                        acc.err += g.w[k] * half * c.err;
                }
                return acc;
            };
            double mid = 0.5 * (r0 + r1);
            Estimate a = radial(r0, mid, true), b = radial(mid, r1, true);
            Estimate whole = radial(r0, r1, false);
            double v = a.value + b.value;
            tot.value += v;
            tot.err += a.err + b.err + std::abs(v - whole.value);
        }
        // Remainder beyond r_far: both K(y) and K(y-h) are below (2-s) Lambda (|y|/2)^{-n-s}.
        tot.err += 2.0 * (2.0 - s) * K.lambda_hi() * std::pow(2.0, n + s) * omega(n) * std::pow(r_far, -s) / s / hn;
        rep.quotient.push_back(tot.value);
        if (tot.value > rep.bound) {
            rep.bound = tot.value;
            rep.err = tot.err;
        }
        if (tot.err > 1e-6 * std::max(1.0, tot.value))
            rep.converged = false;
        if (hn > best_h) {
            best_h = hn;
            q_large = tot.value;
        }
        if (hn < worst_h) {
            worst_h = hn;
            q_small = tot.value;
        }
    }
    rep.growth = q_large > 0.0 ? q_small / q_large : 1.0;
    // A |h|^{-1} law would raise the quotient by the full ratio of the |h| range.
    double span = best_h / worst_h;
    rep.in_L01 = span <= 1.0 + 1e-12 ? true : rep.growth < std::sqrt(span);
    return rep;
}

}  // namespace nonloc
