#include "nonloc/probes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nonloc {

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw InvalidArgument("least squares needs two or more paired samples");
    const double m = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    double mx = sx / m, my = sy / m, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0))
        throw InvalidArgument("least squares needs distinct abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.points = x.size();
    return f;
}

std::pair<std::size_t, std::size_t> middle_window(std::size_t count)
{
    if (count <= 2)
        return {0, count};
    std::size_t drop = static_cast<std::size_t>(std::floor(0.2 * static_cast<double>(count)));
    if (count - 2 * drop < 2)
        drop = (count - 2) / 2;
    return {drop, count - drop};
}

namespace {

// Node indices of u's grid inside the closed ball B_r(x).
std::vector<std::size_t> nodes_in_ball(const BoundedFunction& u, const Vec& x, double r)
{
    std::vector<std::size_t> out;
    const int n = u.dim();
    const double tol = 1e-12 * std::max(1.0, r);
    for (std::size_t k = 0; k < u.node_count(); ++k)
        if (norm(sub(u.node(k), x), n) <= r + tol)
            out.push_back(k);
    return out;
}

void require_ball_in_box(const BoundedFunction& u, const Vec& x, double r)
{
    for (int k = 0; k < u.dim(); ++k)
        if (std::abs(x[k]) + r > u.half_width() + 1e-12)
            throw InvalidArgument("probe ball leaves the grid box");
}

}  // namespace

double DecayFit::curve(double tv, double constant) const { return constant * scale * std::pow(tv, -eps_star); }

DecayFit levelset_decay(const BoundedFunction& u, const Vec& x, double r, double c0, double sigma,
                        const std::vector<double>& t_grid)
{
    if (!(r > 0.0) || c0 < 0.0)
        throw InvalidArgument("level-set probe needs r > 0 and c0 >= 0");
    if (t_grid.size() < 2)
        throw InvalidArgument("level-set probe needs two or more t values");
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        if (!(t_grid[i] > 0.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1])))
            throw InvalidArgument("t grid must be positive and increasing");
    require_ball_in_box(u, x, r);
    const int n = u.dim();
    const double cell = std::pow(u.spacing(), n);
    std::vector<double> vals;
    for (std::size_t k : nodes_in_ball(u, x, r))
        vals.push_back(u.values()[k]);
    std::sort(vals.begin(), vals.end());

    DecayFit fit;
    fit.x = x;
    fit.r = r;
    fit.c0 = c0;
    fit.sigma = sigma;
    fit.t = t_grid;
    for (double t : t_grid) {
        auto above = vals.end() - std::upper_bound(vals.begin(), vals.end(), t);
        fit.measure.push_back(static_cast<double>(above) * cell);
    }
    for (std::size_t i = 1; i < fit.measure.size(); ++i)
        if (fit.measure[i] > fit.measure[i - 1])
            fit.nonincreasing = false;

    auto [lo, hi] = middle_window(t_grid.size());
    fit.window_lo = lo;
    fit.window_hi = hi;
    std::vector<double> lx, ly;
    for (std::size_t i = lo; i < hi; ++i)
        if (fit.measure[i] > 0.0) {
            lx.push_back(std::log(t_grid[i]));
            ly.push_back(std::log(fit.measure[i]));
        }
    std::vector<double> distinct(ly);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2) {
        fit.step = true;
        return fit;
    }
    LineFit lf = least_squares(lx, ly);
    fit.eps_star = -lf.slope;
    double base = u.evaluate(x) + c0 * std::pow(r, sigma);
    fit.scale = std::pow(r, n) * (base > 0.0 ? std::pow(base, fit.eps_star) : 1.0);
    fit.C = std::exp(lf.intercept) / fit.scale;
    for (std::size_t i = lo; i < hi; ++i)
        fit.C_envelope = std::max(fit.C_envelope, fit.measure[i] / fit.curve(t_grid[i], 1.0));
    auto dominated = [&](std::size_t i) { return fit.measure[i] <= fit.curve(t_grid[i], fit.C_envelope) * (1.0 + 1e-12); };
    fit.dominates = fit.eps_star > 0.0;
    for (std::size_t i = lo; i < hi; ++i)
        fit.dominates = fit.dominates && dominated(i);
    fit.dominates_all = fit.dominates;
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        fit.dominates_all = fit.dominates_all && dominated(i);
    return fit;
}

HarnackReport harnack_ratio(const BoundedFunction& u, double C0, double sigma)
{
    if (C0 < 0.0)
        throw InvalidArgument("C0 must be nonnegative");
    require_ball_in_box(u, {0.0, 0.0}, 0.5);
    HarnackReport rep;
    rep.sigma = sigma;
    rep.C0 = C0;
    rep.sup = -kInf;
    rep.inf = kInf;
    for (std::size_t k : nodes_in_ball(u, {0.0, 0.0}, 0.5)) {
        rep.sup = std::max(rep.sup, u.values()[k]);
        rep.inf = std::min(rep.inf, u.values()[k]);
    }
    if (rep.inf + C0 <= 0.0)
        throw InvalidArgument("Harnack ratio needs inf + C0 > 0");
    rep.ratio = rep.sup / (rep.inf + C0);
    return rep;
}

HolderReport oscillation_cascade(const BoundedFunction& u, int N, int k_max, const Vec& center)
{
    if (N < 1 || k_max < 1)
        throw InvalidArgument("cascade needs N >= 1 and k_max >= 1");
    const int n = u.dim();
    require_ball_in_box(u, center, 1.0);
    HolderReport rep;
    rep.N = N;
    rep.center = center;
    const int K = k_max + 1;
    rep.radius.resize(K);
    rep.m.assign(K, kInf);
    rep.M.assign(K, -kInf);
    for (int k = 0; k < K; ++k)
        rep.radius[k] = std::ldexp(1.0, -k * N);
    if (!u.closed_form() && 2.0 * rep.radius.back() / u.spacing() < 8.0)
        throw InvalidArgument("grid does not resolve the smallest ball of the cascade");

    // Smallest ball first; each larger ball inherits the extrema of the ones it contains.
    for (int k = K - 1; k >= 0; --k) {
        const double r = rep.radius[k];
        double lo = kInf, hi = -kInf;
        auto take = [&](double v) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        };
        if (u.closed_form()) {
            const int S = 64;
            for (int i = -S; i <= S; ++i)
                for (int j = (n == 2 ? -S : 0); j <= (n == 2 ? S : 0); ++j) {
                    Vec d{r * i / S, r * j / S};
                    if (norm(d, n) <= r)
                        take(u.evaluate(add(center, d)));
                }
        } else {
            for (std::size_t idx : nodes_in_ball(u, center, r))
                take(u.values()[idx]);
        }
        if (k + 1 < K) {
            lo = std::min(lo, rep.m[k + 1]);
            hi = std::max(hi, rep.M[k + 1]);
        }
        rep.m[k] = lo;
        rep.M[k] = hi;
    }
    for (int k = 0; k < K; ++k) {
        rep.osc.push_back(rep.M[k] - rep.m[k]);
        if (k > 0 && (rep.m[k] < rep.m[k - 1] || rep.M[k] > rep.M[k - 1]))
            rep.monotone = false;
    }
    if (!(rep.osc[0] > 0.0)) {
        rep.alpha = kInf;
        return rep;
    }
    auto [lo, hi] = middle_window(static_cast<std::size_t>(K));
    std::vector<double> xs, ys;
    for (std::size_t k = lo; k < hi; ++k)
        if (rep.osc[k] > 0.0) {
            xs.push_back(static_cast<double>(k) * N);
            ys.push_back(std::log2(rep.osc[k]));
        }
    if (xs.size() < 2) {
        rep.alpha = 1.0;
        rep.capped = true;
        return rep;
    }
    rep.alpha = -least_squares(xs, ys).slope;
    if (rep.alpha >= 1.0 - 1e-9) {
        rep.alpha = 1.0;
        rep.capped = true;
    }
    return rep;
}

namespace {

double smooth_step(double s)
{
    // 1 for s <= 0, 0 for s >= 1, smooth in between.
    if (s <= 0.0)
        return 1.0;
    if (s >= 1.0)
        return 0.0;
    double a = std::exp(-1.0 / (1.0 - s)), b = std::exp(-1.0 / s);
    return a / (a + b);
}

struct Cutoff {
    double delta;
    int n;
    double operator()(const Vec& y) const { return smooth_step((norm(y, n) - 0.5 * delta) / (0.5 * delta)); }
    double lipschitz() const
    {
        double best = 0.0;
        const int S = 4000;
        for (int i = 0; i < S; ++i) {
            double s0 = static_cast<double>(i) / S, s1 = static_cast<double>(i + 1) / S;
            best = std::max(best, std::abs(smooth_step(s1) - smooth_step(s0)) * S);
        }
        return best * 2.0 / delta;
    }
};

// Integral of g(z) over |z| >= r0 by radial shells with breaks, Gauss in r and
// a uniform rule in angle. Returns value and the gap to a half-size rule.
template <class G>
std::pair<double, double> exterior_integral(int n, const std::vector<double>& breaks, int radial, int angular, G&& g)
{
    auto run = [&](int nr, int na) {
        const GaussRule& rule = gauss_legendre(nr);
        double total = 0.0;
        for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
            double a = breaks[b], c = breaks[b + 1];
            for (std::size_t q = 0; q < rule.x.size(); ++q) {
                double r = 0.5 * (a + c) + 0.5 * (c - a) * rule.x[q];
                double wr = 0.5 * (c - a) * rule.w[q];
                if (n == 1) {
                    total += wr * (g(Vec{r, 0.0}) + g(Vec{-r, 0.0}));
                } else {
                    double acc = 0.0;
                    for (int j = 0; j < na; ++j) {
                        double th = (j + 0.5) * 2.0 * std::numbers::pi / na;
                        acc += g(Vec{r * std::cos(th), r * std::sin(th)});
                    }
                    total += wr * r * acc * 2.0 * std::numbers::pi / na;
                }
            }
        }
        return total;
    };
    double fine = run(radial, angular);
    double coarse = run(std::max(2, radial / 2), std::max(8, angular / 2));
    return {fine, std::abs(fine - coarse)};
}

}  // namespace

QuotientReport difference_quotient_probe(const BoundedFunction& u, const KernelSpec& K, double beta,
                                         const std::vector<Vec>& h_set, double delta, const QuotientConfig& cfg)
{
    const int n = u.dim();
    if (K.n() != n)
        throw InvalidArgument("kernel and function dimensions differ");
    if (!(beta > 0.0 && beta <= 1.0))
        throw InvalidArgument("beta must lie in (0, 1]");
    if (!(delta > 0.0) || h_set.empty())
        throw InvalidArgument("difference quotient probe needs delta > 0 and a nonempty h set");
    for (const Vec& h : h_set) {
        double nh = norm(h, n);
        if (!(nh > 0.0) || !(nh < delta / 16.0))
            throw InvalidArgument("every h must satisfy 0 < |h| < delta / 16");
    }
    const double s = K.sigma();
    const double usup = u.sup_bound();
    const Cutoff phi{delta, n};
    const double lip = phi.lipschitz();
    const double display = radial_smoothness_display(K, delta / 4.0);
    const double r_far = delta * std::ldexp(1.0, 40);
    std::vector<double> breaks{delta / 4.0, 3.0 * delta / 8.0, delta / 2.0, 0.75 * delta, delta};
    while (breaks.back() < r_far)
        breaks.push_back(2.0 * breaks.back());

    QuotientReport rep;
    rep.beta = beta;
    rep.delta = delta;
    for (const Vec& h : h_set) {
        const double nh = norm(h, n);
        const double hb = std::pow(nh, beta);
        QuotientRow row;
        row.h = h;
        auto w = [u, h, hb](const Vec& x) { return (u.evaluate(add(x, h)) - u.evaluate(x)) / hb; };
        double wsup = 2.0 * usup / hb;
        BoundedFunction wf = BoundedFunction::from_closed_form(n, u.half_width(), u.spacing(), w,
                                                               Exterior::callable(w, wsup), wsup);
        HolderReport hr = oscillation_cascade(wf, cfg.N, cfg.k_max);
        row.alpha = hr.alpha;
        row.capped = hr.capped;

        auto i1 = exterior_integral(n, breaks, cfg.radial_nodes, cfg.angular_nodes, [&](const Vec& z) {
            double c = 1.0 - phi(sub(z, h));
            return c == 0.0 ? 0.0 : u.evaluate(z) * c * (K(sub(z, h)) - K(z));
        });
        auto i2 = exterior_integral(n, breaks, cfg.radial_nodes, cfg.angular_nodes, [&](const Vec& z) {
            double c = phi(z) - phi(sub(z, h));
            return c == 0.0 ? 0.0 : u.evaluate(z) * c * K(z);
        });
        // Beyond r_far both integrands are bounded by |u| (K(z - h) + K(z)).
        double far = usup * 2.0 * K.mass() * (2.0 - s) * std::pow(0.5 * r_far, -s) / s;
        row.L1 = i1.first / hb;
        row.L2 = i2.first / hb;
        row.L1_err = (i1.second + far) / hb;
        row.L2_err = (i2.second + far) / hb;
        double rel = std::pow(nh, 1.0 - beta);
        row.L1_bound = usup * display * rel;
        double inner = 0.5 * delta - nh;
        row.L2_bound = usup * lip * K.mass() * (2.0 - s) * std::pow(inner, -s) / s * rel;
        row.L1_ok = std::abs(row.L1) <= row.L1_bound + row.L1_err;
        row.L2_ok = std::abs(row.L2) <= row.L2_bound + row.L2_err;
        rep.tails_ok = rep.tails_ok && row.L1_ok && row.L2_ok;
        rep.min_alpha = std::min(rep.min_alpha, row.alpha);
        rep.rows.push_back(row);
    }
    rep.indicated_exponent = beta + rep.min_alpha;
    return rep;
}

BarrierScenario barrier_scenario(int n, double p, double sigma, double lambda_lo, double lambda_hi, double eps0,
                                 const QuadConfig& cfg, double nu, double h)
{
    if (!(eps0 > 0.0) || !(nu > 0.0 && nu < 1.0))
        throw InvalidArgument("scenario needs eps0 > 0 and nu in (0, 1)");
    BarrierScenario sc;
    sc.psi = build_psi(n, p, 0.125);
    sc.sigma = sigma;
    sc.eps0 = eps0;
    sc.nu = nu;
    DefectResult d = psi_defect(sigma, sc.psi, lambda_lo, lambda_hi, cfg);
    if (!(d.sup > 0.0))
        throw NumericalFailure("Psi defect vanished; the scenario scale is undefined");
    sc.defect_sup = d.sup;
    sc.kappa = eps0 / d.sup;
    const PsiParams P = sc.psi;
    const double top = special_psi({0.0, 0.0}, P);
    const double kappa = sc.kappa;
    auto fn = [P, top, kappa](const Vec& x) { return kappa * (top - special_psi(x, P)); };
    sc.u = BoundedFunction::from_closed_form(n, 2.0, h, fn, Exterior::constant(kappa * top), kappa * top);

    std::vector<double> q1;
    for (std::size_t k = 0; k < sc.u.node_count(); ++k) {
        Vec x = sc.u.node(k);
        if (std::abs(x[0]) <= 0.5 && (n == 1 || std::abs(x[1]) <= 0.5))
            q1.push_back(sc.u.values()[k]);
    }
    std::sort(q1.begin(), q1.end());
    sc.inf_q1 = q1.front();
    const double cell = std::pow(h, n);
    std::size_t need = static_cast<std::size_t>(std::ceil(nu / cell - 1e-9));
    if (need == 0 || need > q1.size())
        throw InvalidArgument("nu is not attainable on this grid");
    sc.M = q1[need - 1];
    auto count = std::upper_bound(q1.begin(), q1.end(), sc.M) - q1.begin();
    sc.measure_at_M = static_cast<double>(count) * cell;
    return sc;
}

}  // namespace nonloc
