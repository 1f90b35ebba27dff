#include "nonloc/nonlocal_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nonloc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double pos(double v) { return v > 0.0 ? v : 0.0; }
double neg(double v) { return v < 0.0 ? -v : 0.0; }

// Vector-valued version of integrate_shell: f(y, out) writes k values.
template <class F>
void integrate_shell_multi(int n, double r0, double r1, int m, int A, std::size_t k, F&& f, std::vector<double>& val,
                           std::vector<double>& err)
{
    const GaussRule& g = gauss_legendre(m);
    std::vector<double> buf(k), acc(k);
    auto radial = [&](double a, double b, int nang, std::vector<double>& out) {
        std::fill(out.begin(), out.end(), 0.0);
        double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (int i = 0; i < m; ++i) {
            double r = mid + half * g.x[i];
            std::fill(acc.begin(), acc.end(), 0.0);
            double wang = 1.0;
            if (n == 1) {
                f(Vec{r, 0.0}, buf.data());
                for (std::size_t q = 0; q < k; ++q)
                    acc[q] += buf[q];
                f(Vec{-r, 0.0}, buf.data());
                for (std::size_t q = 0; q < k; ++q)
                    acc[q] += buf[q];
            } else {
                double dth = kTwoPi / nang;
                for (int j = 0; j < nang; ++j) {
                    double th = (j + 0.5) * dth;
                    f(Vec{r * std::cos(th), r * std::sin(th)}, buf.data());
                    for (std::size_t q = 0; q < k; ++q)
                        acc[q] += buf[q];
                }
                wang = dth * r;
            }
            for (std::size_t q = 0; q < k; ++q)
                out[q] += g.w[i] * half * wang * acc[q];
        }
    };
    std::vector<double> fa(k), fb(k), coarse(k), half_ang(k);
    double mid = 0.5 * (r0 + r1);
    radial(r0, mid, A, fa);
    radial(mid, r1, A, fb);
    radial(r0, r1, A, coarse);
    if (n == 2 && A >= 8)
        radial(r0, r1, A / 2, half_ang);
    for (std::size_t q = 0; q < k; ++q) {
        double fine = fa[q] + fb[q];
        val[q] += fine;
        double e = std::abs(fine - coarse[q]);
        if (n == 2 && A >= 8)
            e += std::abs(coarse[q] - half_ang[q]);
        err[q] += e;
    }
}

double effective_eps(const BoundedFunction& u, const QuadConfig& cfg)
{
    // Multilinear interpolation has kinks at nodes, so the PV part below one
    // cell cannot be resolved from grid data.
    return u.closed_form() ? cfg.eps_pv : std::max(cfg.eps_pv, u.spacing());
}

bool box_inside_ball(const BoundedFunction& u, const Vec& x, double R)
{
    int n = u.dim();
    return R >= norm(x, n) + u.half_width() * std::sqrt(static_cast<double>(n)) * (1.0 + 1e-12);
}

// Integral over y in [p, q] (0 < p < q <= inf) of (2-s) a y^{-1-s}.
double power_piece(double a, double s, double p, double q)
{
    if (!(q > p))
        return 0.0;
    double tq = std::isinf(q) ? 0.0 : std::pow(q, -s);
    return (2.0 - s) * a * (std::pow(p, -s) - tq) / s;
}

struct FamilyTerm {
    const KernelSpec* K;
};

// Mid field and tail for several kernels and thresholds sharing the same u, x, grad.
std::vector<OperatorValue> linear_family(const BoundedFunction& u, const Vec& x, const Vec& grad,
                                         const std::vector<const KernelSpec*>& Ks, const std::vector<double>& ts,
                                         const QuadConfig& cfg, const Openings& open)
{
    cfg.validate();
    const int n = u.dim();
    const double eps = effective_eps(u, cfg);
    const double R = cfg.R_trunc;
    if (!(R > eps))
        throw InvalidArgument("R_trunc must exceed the PV cutoff");
    const std::size_t nk = Ks.size(), nt = ts.size();
    for (double t : ts)
        if (!(t >= eps))
            throw InvalidArgument("threshold t below the PV cutoff");
    for (const KernelSpec* K : Ks)
        if (K->n() != n)
            throw InvalidArgument("kernel dimension does not match the function");
    const double u0 = u.evaluate(x);

    std::vector<double> extra{0.5};
    for (double t : ts)
        if (std::isfinite(t))
            extra.push_back(t);
    auto edges = dyadic_breaks(eps, R, extra);

    const std::size_t k = nk * nt;
    std::vector<double> mid(k, 0.0), merr(k, 0.0);
    std::vector<double> kv(nk);
    auto integrand = [&](const Vec& y, double* out) {
        double d1 = u.evaluate(add(x, y)) - u0;
        double gy = dot(grad, y, n);
        double r = norm(y, n);
        for (std::size_t a = 0; a < nk; ++a)
            kv[a] = (*Ks[a])(y);
        for (std::size_t a = 0; a < nk; ++a)
            for (std::size_t j = 0; j < nt; ++j)
                out[a * nt + j] = (r < ts[j] ? d1 - gy : d1) * kv[a];
    };
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        integrate_shell_multi(n, edges[i], edges[i + 1], cfg.radial_nodes, cfg.angular_nodes, k, integrand, mid,
                              merr);

    // Integral of u(x+y) K(y) over |y| > R, per kernel.
    std::vector<double> t3(nk, 0.0), t3err(nk, 0.0);
    const Exterior& ext = u.exterior();
    const double sup = u.sup_bound();
    bool outside = box_inside_ball(u, x, R);
    if (cfg.bound_only_tail) {
        for (std::size_t a = 0; a < nk; ++a) {
            double s = Ks[a]->sigma();
            t3err[a] = sup * Ks[a]->mass() * (2.0 - s) * std::pow(R, -s) / s;
        }
    } else if (outside && ext.kind == ExteriorKind::constant) {
        for (std::size_t a = 0; a < nk; ++a) {
            double s = Ks[a]->sigma();
            t3[a] = ext.value * Ks[a]->mass() * (2.0 - s) * std::pow(R, -s) / s;
        }
    } else if (outside && ext.kind == ExteriorKind::indicator_slab && n == 1) {
        for (std::size_t a = 0; a < nk; ++a) {
            double s = Ks[a]->sigma();
            double ap = Ks[a]->coefficient({1.0, 0.0}), am = Ks[a]->coefficient({-1.0, 0.0});
            double v = power_piece(ap, s, std::max(R, ext.lo - x[0]), ext.hi - x[0]) +
                       power_piece(am, s, std::max(R, x[0] - ext.hi), x[0] - ext.lo);
            t3[a] = ext.value * v;
        }
    } else {
        int m = std::max(4, cfg.radial_nodes / 2), A = std::max(8, cfg.angular_nodes / 2);
        auto f = [&](const Vec& y, double* out) {
            double v = u.evaluate(add(x, y));
            for (std::size_t a = 0; a < nk; ++a)
                out[a] = v * (*Ks[a])(y);
        };
        double r0 = R;
        auto remainder = [&](double Rf) {
            double worst = 0.0;
            for (std::size_t a = 0; a < nk; ++a) {
                double s = Ks[a]->sigma();
                worst = std::max(worst, sup * Ks[a]->mass() * (2.0 - s) * std::pow(Rf, -s) / s);
            }
            return worst;
        };
        for (int shell = 0; shell < cfg.max_tail_shells && remainder(r0) > cfg.tail_tol; ++shell) {
            integrate_shell_multi(n, r0, 2.0 * r0, m, A, nk, f, t3, t3err);
            r0 *= 2.0;
        }
        for (std::size_t a = 0; a < nk; ++a) {
            double s = Ks[a]->sigma();
            t3err[a] += sup * Ks[a]->mass() * (2.0 - s) * std::pow(r0, -s) / s;
        }
    }

    std::vector<OperatorValue> res(k);
    for (std::size_t a = 0; a < nk; ++a) {
        const KernelSpec& K = *Ks[a];
        double s = K.sigma();
        double mass = K.mass();
        double t1 = -u0 * mass * (2.0 - s) * std::pow(R, -s) / s;
        double gm = dot(grad, K.first_moment(), n);
        double near_scale = 0.5 * mass * std::pow(eps, 2.0 - s);
        for (std::size_t j = 0; j < nt; ++j) {
            OperatorValue& o = res[a * nt + j];
            double t2 = 0.0;
            if (ts[j] > R) {
                double tt = std::isinf(ts[j]) ? 0.0 : std::pow(ts[j], 1.0 - s);
                t2 = -gm * (2.0 - s) * (std::pow(R, 1.0 - s) - tt) / (s - 1.0);
            }
            o.mid_field = mid[a * nt + j];
            o.tail = t1 + t2 + t3[a];
            o.near_field = 0.0;
            o.value = o.near_field + o.mid_field + o.tail;
            o.near_lo = -open.below * near_scale;
            o.near_hi = open.above * near_scale;
            if (std::isnan(o.near_lo))
                o.near_lo = 0.0;
            if (std::isnan(o.near_hi))
                o.near_hi = 0.0;
            o.quad_err = merr[a * nt + j];
            o.tail_err = t3err[a];
            o.err_est = std::max(-o.near_lo, o.near_hi) + o.quad_err + o.tail_err;
        }
    }
    return res;
}

Openings resolve_openings(const BoundedFunction& u, const Vec& x, const QuadConfig& cfg,
                          const std::optional<Openings>& open)
{
    if (open)
        return *open;
    Openings o = measure_openings(u, x, cfg);
    if (!std::isfinite(o.above) || !std::isfinite(o.below))
        throw NumericalFailure("operator undefined: u is not punctually C^{1,1} at the probe point");
    return o;
}

// Integral over r in [a, b] of (2-s)(A + B r) r^{-1-s}.
double linear_piece(double A, double B, double s, double a, double b)
{
    if (!(b > a))
        return 0.0;
    double ia = std::pow(a, -s), ib = std::isinf(b) ? 0.0 : std::pow(b, -s);
    double ja = std::pow(a, 1.0 - s), jb = std::isinf(b) ? 0.0 : std::pow(b, 1.0 - s);
    return (2.0 - s) * (A * (ia - ib) / s + B * (ja - jb) / (s - 1.0));
}

}  // namespace

double mu(const BoundedFunction& u, const Vec& x, const Vec& y, const Vec& grad, double t)
{
    if (!(t > 0.0))
        throw InvalidArgument("threshold t must be positive");
    int n = u.dim();
    double d = u.evaluate(add(x, y)) - u.evaluate(x);
    if (norm(y, n) < t)
        d -= dot(grad, y, n);
    return d;
}

ExtremalMu extremal_mu_from(double d1, double g, double ynorm)
{
    if (ynorm < 0.5) {
        double d = d1 - g;
        return {pos(d), pos(d), neg(d), neg(d)};
    }
    double d2 = d1 - g;
    return {std::max(pos(d1), pos(d2)), std::min(pos(d1), pos(d2)), std::max(neg(d1), neg(d2)),
            std::min(neg(d1), neg(d2))};
}

ExtremalMu extremal_mu(const BoundedFunction& u, const Vec& x, const Vec& y, const Vec& grad)
{
    int n = u.dim();
    return extremal_mu_from(u.evaluate(add(x, y)) - u.evaluate(x), dot(grad, y, n), norm(y, n));
}

double pucci_integrand(const ExtremalMu& e, double lambda_lo, double lambda_hi, int sign)
{
    return sign > 0 ? lambda_hi * e.sup_plus - lambda_lo * e.inf_minus
                    : lambda_lo * e.inf_plus - lambda_hi * e.sup_minus;
}

Openings measure_openings(const BoundedFunction& u, const Vec& x, const QuadConfig& cfg)
{
    double radius = std::max(2.0 * u.spacing(), effective_eps(u, cfg));
    auto [up, down] = touching_opening(u, x, radius);
    return {up.opening, down.opening};
}

OperatorValue linear_op(const BoundedFunction& u, const Vec& x, const Vec& grad, double t, const KernelSpec& K,
                        const QuadConfig& cfg, std::optional<Openings> open)
{
    Openings o = resolve_openings(u, x, cfg, open);
    return linear_family(u, x, grad, {&K}, {t}, cfg, o)[0];
}

namespace {

OperatorValue pucci_impl(const BoundedFunction& u, const Vec& x, const Vec& grad, double lo, double hi, double s,
                         int sign, const QuadConfig& cfg, const Openings& open)
{
    cfg.validate();
    if (!(s > 1.0 && s < 2.0))
        throw InvalidArgument("sigma must lie in (1, 2)");
    if (!(lo > 0.0 && lo <= hi))
        throw InvalidArgument("need 0 < lambda <= Lambda");
    const int n = u.dim();
    const double eps = effective_eps(u, cfg);
    const double R = cfg.R_trunc;
    const double u0 = u.evaluate(x);
    const double w = omega(n);

    auto integrand = [&](const Vec& y, double* out) {
        double r = norm(y, n);
        double d1 = u.evaluate(add(x, y)) - u0;
        ExtremalMu e = extremal_mu_from(d1, dot(grad, y, n), r);
        out[0] = (2.0 - s) * pucci_integrand(e, lo, hi, sign) / std::pow(r, n + s);
    };
    std::vector<double> mid(1, 0.0), merr(1, 0.0);
    auto edges = dyadic_breaks(eps, R, {0.5});
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        integrate_shell_multi(n, edges[i], edges[i + 1], cfg.radial_nodes, cfg.angular_nodes, 1, integrand, mid,
                              merr);

    const double sup = u.sup_bound();
    const double gn = norm(grad, n);
    auto remainder = [&](double Rf) {
        return (2.0 - s) * hi * w * (2.0 * sup * std::pow(Rf, -s) / s + gn * std::pow(Rf, 1.0 - s) / (s - 1.0));
    };
    std::vector<double> tail(1, 0.0), terr(1, 0.0);
    const Exterior& ext = u.exterior();
    if (cfg.bound_only_tail) {
        terr[0] = remainder(R);
    } else if (ext.kind == ExteriorKind::constant && box_inside_ball(u, x, R)) {
        // For |y| > R the increment is d1 = c - u(x) and the second candidate is
        // d1 - r (grad . theta); along each ray the integrand is piecewise linear in r.
        const double d1 = ext.value - u0;
        auto ray = [&](const Vec& th) {
            double q = dot(grad, th, n);
            auto P = [&](double r) { return pucci_integrand(extremal_mu_from(d1, r * q, r), lo, hi, sign); };
            std::vector<double> cuts{R};
            if (q != 0.0 && d1 / q > R)
                cuts.push_back(d1 / q);
            cuts.push_back(kInf);
            double total = 0.0;
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                double a = cuts[i], b = cuts[i + 1];
                double r1 = a * 1.25 + 1.0, r2 = a * 1.5 + 2.0;
                if (std::isfinite(b)) {
                    r1 = a + 0.25 * (b - a);
                    r2 = a + 0.75 * (b - a);
                }
                double p1 = P(r1), p2 = P(r2);
                double B = (p2 - p1) / (r2 - r1);
                double A = p1 - B * r1;
                total += linear_piece(A, B, s, a, b);
            }
            return total;
        };
        if (n == 1) {
            tail[0] = ray({1.0, 0.0}) + ray({-1.0, 0.0});
        } else {
            auto circle = [&](int A) {
                double acc = 0.0, dth = kTwoPi / A;
                for (int j = 0; j < A; ++j) {
                    double th = (j + 0.5) * dth;
                    acc += ray({std::cos(th), std::sin(th)});
                }
                return acc * dth;
            };
            tail[0] = circle(cfg.angular_nodes);
            terr[0] = std::abs(tail[0] - circle(cfg.angular_nodes / 2));
        }
    } else {
        int m = std::max(4, cfg.radial_nodes / 2), A = std::max(8, cfg.angular_nodes / 2);
        double r0 = R;
        for (int shell = 0; shell < cfg.max_tail_shells && remainder(r0) > cfg.tail_tol; ++shell) {
            integrate_shell_multi(n, r0, 2.0 * r0, m, A, 1, integrand, tail, terr);
            r0 *= 2.0;
        }
        terr[0] += remainder(r0);
    }

    OperatorValue o;
    o.mid_field = mid[0];
    o.tail = tail[0];
    o.near_field = 0.0;
    o.value = o.near_field + o.mid_field + o.tail;
    double e = 0.5 * w * std::pow(eps, 2.0 - s);
    // Near field: mu lies in [-(below/2)|y|^2, (above/2)|y|^2].
    double c_up = sign > 0 ? hi : lo;
    double c_dn = sign > 0 ? lo : hi;
    o.near_hi = open.above == 0.0 ? 0.0 : c_up * open.above * e;
    o.near_lo = open.below == 0.0 ? 0.0 : -c_dn * open.below * e;
    o.quad_err = merr[0];
    o.tail_err = terr[0];
    o.err_est = std::max(-o.near_lo, o.near_hi) + o.quad_err + o.tail_err;
    return o;
}

}  // namespace

OperatorValue pucci(const BoundedFunction& u, const Vec& x, const Vec& grad, double lambda_lo, double lambda_hi,
                    double sigma, int sign, const QuadConfig& cfg, std::optional<Openings> open)
{
    Openings o = resolve_openings(u, x, cfg, open);
    return pucci_impl(u, x, grad, lambda_lo, lambda_hi, sigma, sign, cfg, o);
}

InfSupValue infsup_op(const BoundedFunction& u, const Vec& x, const Vec& grad, const KernelTable& table,
                      const std::vector<double>& t_set, int mode, const QuadConfig& cfg, std::optional<Openings> open)
{
    if (table.empty() || table[0].empty())
        throw InvalidArgument("empty kernel table");
    if (t_set.empty())
        throw InvalidArgument("empty threshold set");
    const std::size_t na = table.size(), nb = table[0].size(), nt = t_set.size();
    std::vector<const KernelSpec*> Ks;
    for (const auto& row : table) {
        if (row.size() != nb)
            throw InvalidArgument("kernel table rows must have equal length");
        for (const auto& K : row)
            Ks.push_back(&K);
    }
    Openings o = resolve_openings(u, x, cfg, open);
    auto vals = linear_family(u, x, grad, Ks, t_set, cfg, o);
    auto at = [&](std::size_t a, std::size_t b, std::size_t j) -> const OperatorValue& {
        return vals[(a * nb + b) * nt + j];
    };

    InfSupValue best;
    double best_val = mode > 0 ? -kInf : kInf;
    for (std::size_t j = 0; j < nt; ++j) {
        double inf_b = kInf;
        int arg_a = -1, arg_b = -1;
        for (std::size_t b = 0; b < nb; ++b) {
            double sup_a = -kInf;
            int sa = -1;
            for (std::size_t a = 0; a < na; ++a)
                if (at(a, b, j).value > sup_a) {
                    sup_a = at(a, b, j).value;
                    sa = static_cast<int>(a);
                }
            if (sup_a < inf_b) {
                inf_b = sup_a;
                arg_a = sa;
                arg_b = static_cast<int>(b);
            }
        }
        bool better = mode > 0 ? inf_b > best_val : inf_b < best_val;
        if (better) {
            best_val = inf_b;
            best.t_index = static_cast<int>(j);
            best.alpha = arg_a;
            best.beta = arg_b;
        }
    }
    best.op = at(best.alpha, best.beta, best.t_index);
    // inf and sup are 1-Lipschitz in the max norm, so the worst entry bounds the error.
    for (const auto& v : vals) {
        best.op.near_lo = std::min(best.op.near_lo, v.near_lo);
        best.op.near_hi = std::max(best.op.near_hi, v.near_hi);
        best.op.quad_err = std::max(best.op.quad_err, v.quad_err);
        best.op.tail_err = std::max(best.op.tail_err, v.tail_err);
    }
    best.op.err_est = std::max(-best.op.near_lo, best.op.near_hi) + best.op.quad_err + best.op.tail_err;
    return best;
}

double pucci_t_gap(const BoundedFunction& u, const Vec& x, const Vec& grad, double lambda_lo, double lambda_hi,
                   double sigma, int sign, const QuadConfig& cfg, std::optional<Openings> open)
{
    Openings o = resolve_openings(u, x, cfg, open);
    const int n = u.dim();
    double pointwise = pucci_impl(u, x, grad, lambda_lo, lambda_hi, sigma, sign, cfg, o).value;
    // For a fixed t the best kernel takes Lambda where mu_t has the favourable sign.
    double best = sign > 0 ? -kInf : kInf;
    const double eps = effective_eps(u, cfg);
    const double u0 = u.evaluate(x);
    for (double t : cfg.t_set) {
        auto f = [&](const Vec& y, double* out) {
            double r = norm(y, n);
            double m = u.evaluate(add(x, y)) - u0 - (r < t ? dot(grad, y, n) : 0.0);
            double v = sign > 0 ? lambda_hi * pos(m) - lambda_lo * neg(m) : lambda_lo * pos(m) - lambda_hi * neg(m);
            out[0] = (2.0 - sigma) * v / std::pow(r, n + sigma);
        };
        std::vector<double> val(1, 0.0), err(1, 0.0);
        std::vector<double> extra{0.5};
        if (std::isfinite(t))
            extra.push_back(t);
        double top = cfg.R_trunc;
        if (std::isfinite(t))
            top = std::max(top, 4.0 * t);
        auto edges = dyadic_breaks(eps, top, extra);
        for (std::size_t i = 0; i + 1 < edges.size(); ++i)
            integrate_shell_multi(n, edges[i], edges[i + 1], cfg.radial_nodes, cfg.angular_nodes, 1, f, val, err);
        double r0 = top;
        for (int shell = 0; shell < cfg.max_tail_shells / 4; ++shell) {
            integrate_shell_multi(n, r0, 2.0 * r0, std::max(4, cfg.radial_nodes / 2),
                                  std::max(8, cfg.angular_nodes / 2), 1, f, val, err);
            r0 *= 2.0;
        }
        best = sign > 0 ? std::max(best, val[0]) : std::min(best, val[0]);
    }
    return sign > 0 ? pointwise - best : best - pointwise;
}

OperatorValue apply_operator(const OperatorSpec& op, const BoundedFunction& u, const Vec& x, const Vec& grad,
                             const QuadConfig& cfg, std::optional<Openings> open)
{
    Openings o = resolve_openings(u, x, cfg, open);
    if (auto p = std::get_if<PucciSpec>(&op))
        return pucci_impl(u, x, grad, p->lambda_lo, p->lambda_hi, p->sigma, p->sign, cfg, o);
    if (auto l = std::get_if<LinearSpec>(&op))
        return linear_family(u, x, grad, {&l->K}, {l->t}, cfg, o)[0];
    const auto& s = std::get<InfSupSpec>(op);
    return infsup_op(u, x, grad, s.table, s.t_set, s.mode, cfg, o).op;
}

ViscosityReport viscosity_check(const BoundedFunction& u, const Region& region, const ScalarField& f, Inequality side,
                                const OperatorSpec& op, const QuadConfig& cfg, double slack, double touch_radius)
{
    const int n = u.dim();
    std::vector<std::size_t> nodes;
    for (std::size_t k = 0; k < u.node_count(); ++k)
        if (norm(sub(u.node(k), region.center), n) < region.radius)
            nodes.push_back(k);
    double radius = touch_radius > 0.0 ? touch_radius : std::max(2.0 * u.spacing(), effective_eps(u, cfg));

    struct Item {
        int state = 0;  // 0 skipped, 1 pass, 2 fail
        double margin = kInf;
    };
    std::vector<Item> items(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t i) {
        Vec x = u.node(nodes[i]);
        for (int k = 0; k < n; ++k)
            if (std::abs(x[k]) + radius > u.half_width())
                return;  // no room for the touching stencil
        auto [up, down] = touching_opening(u, x, radius);
        const TouchingData& t = side == Inequality::sub ? up : down;
        if (!std::isfinite(t.opening))
            return;
        Openings o{up.opening, down.opening};
        OperatorValue v = apply_operator(op, u, x, t.grad, cfg, o);
        double fx = f(x);
        double m = side == Inequality::sub ? v.upper() - fx : fx - v.lower();
        m += slack;
        items[i].margin = m;
        items[i].state = m >= 0.0 ? 1 : 2;
    });
    ViscosityReport rep;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].state == 0) {
            ++rep.skipped;
            continue;
        }
        ++rep.tested;
        if (items[i].state == 1)
            ++rep.passed;
        else
            ++rep.failed;
        if (items[i].margin < rep.worst_margin) {
            rep.worst_margin = items[i].margin;
            rep.worst_point = u.node(nodes[i]);
        }
    }
    return rep;
}

}  // namespace nonloc
