#include "nonloc/envelope_abp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "nonloc/nonlocal_eval.hpp"

namespace nonloc {

std::size_t EnvelopeResult::contact_count() const
{
    return static_cast<std::size_t>(std::count(contact.begin(), contact.end(), 1));
}

namespace {

double cross(const Vec& o, const Vec& a, const Vec& b)
{
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// max sum(l_j v_j) subject to sum l_j = 1, sum l_j P_j = x0, l >= 0, by a revised
// simplex on the three equality rows. The optimal dual (a, b) gives the
// supporting plane a + b.x, so b is a supergradient of the hull at x0.
struct HullLp {
    double value = 0.0;
    Vec grad{0.0, 0.0};
};

bool invert3(const double m[3][3], double out[3][3])
{
    double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                 m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if (std::abs(det) < 1e-300)
        return false;
    out[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    out[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    out[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    out[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
    out[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    out[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    out[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
    out[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    out[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
    return true;
}

HullLp hull_lp(const std::vector<Vec>& P, const std::vector<double>& V, const Vec& x0, std::array<int, 3> start,
               double tol)
{
    std::array<int, 3> basis = start;
    double Binv[3][3];
    double xB[3];
    auto refactor = [&]() {
        double Bm[3][3];
        for (int i = 0; i < 3; ++i) {
            const Vec& p = P[basis[i]];
            Bm[0][i] = 1.0;
            Bm[1][i] = p[0];
            Bm[2][i] = p[1];
        }
        if (!invert3(Bm, Binv))
            throw NumericalFailure("singular basis in the envelope LP");
        double rhs[3] = {1.0, x0[0], x0[1]};
        for (int i = 0; i < 3; ++i) {
            xB[i] = Binv[i][0] * rhs[0] + Binv[i][1] * rhs[1] + Binv[i][2] * rhs[2];
            if (xB[i] < 0.0 && xB[i] > -1e-12)
                xB[i] = 0.0;
        }
    };
    refactor();
    const int N = static_cast<int>(P.size());
    double y[3] = {0.0, 0.0, 0.0};
    for (int it = 0; it < 100000; ++it) {
        for (int k = 0; k < 3; ++k)
            y[k] = V[basis[0]] * Binv[0][k] + V[basis[1]] * Binv[1][k] + V[basis[2]] * Binv[2][k];
        bool bland = it > 500;
        int enter = -1;
        double best = tol;
        for (int j = 0; j < N; ++j) {
            double rc = V[j] - (y[0] + y[1] * P[j][0] + y[2] * P[j][1]);
            if (rc > best) {
                enter = j;
                if (bland)
                    break;
                best = rc;
            }
        }
        if (enter < 0)
            break;
        double d[3];
        for (int i = 0; i < 3; ++i)
            d[i] = Binv[i][0] + Binv[i][1] * P[enter][0] + Binv[i][2] * P[enter][1];
        int leave = -1;
        double ratio = kInf;
        for (int i = 0; i < 3; ++i)
            if (d[i] > 1e-12) {
                double r = xB[i] / d[i];
                if (r < ratio - 1e-15 || (r <= ratio + 1e-15 && leave >= 0 && basis[i] < basis[leave])) {
                    ratio = r;
                    leave = i;
                }
            }
        if (leave < 0)
            throw NumericalFailure("unbounded envelope LP");
        basis[leave] = enter;
        if (it % 32 == 31) {
            refactor();
            continue;
        }
        double piv = d[leave];
        for (int k = 0; k < 3; ++k)
            Binv[leave][k] /= piv;
        xB[leave] /= piv;
        for (int i = 0; i < 3; ++i) {
            if (i == leave)
                continue;
            for (int k = 0; k < 3; ++k)
                Binv[i][k] -= d[i] * Binv[leave][k];
            xB[i] -= d[i] * xB[leave];
            if (xB[i] < 0.0 && xB[i] > -1e-12)
                xB[i] = 0.0;
        }
    }
    refactor();
    for (int k = 0; k < 3; ++k)
        y[k] = V[basis[0]] * Binv[0][k] + V[basis[1]] * Binv[1][k] + V[basis[2]] * Binv[2][k];
    HullLp r;
    r.value = xB[0] * V[basis[0]] + xB[1] * V[basis[1]] + xB[2] * V[basis[2]];
    r.grad = {y[1], y[2]};
    return r;
}

void envelope_1d(EnvelopeResult& env, const std::vector<double>& v)
{
    const BoundedFunction& u = env.u;
    std::vector<std::size_t> pts;
    for (std::size_t k = 0; k < u.node_count(); ++k)
        if (env.in_b2[k])
            pts.push_back(k);
    // Upper hull, collinear points dropped.
    std::vector<std::size_t> hull;
    for (std::size_t k : pts) {
        Vec pk{u.node(k)[0], v[k]};
        while (hull.size() >= 2) {
            std::size_t a = hull[hull.size() - 2], b = hull.back();
            Vec pa{u.node(a)[0], v[a]}, pb{u.node(b)[0], v[b]};
            if (cross(pa, pb, pk) >= 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(k);
    }
    env.hull = hull;
    auto slope = [&](std::size_t i) {
        std::size_t a = hull[i], b = hull[i + 1];
        return (v[b] - v[a]) / (u.node(b)[0] - u.node(a)[0]);
    };
    std::size_t seg = 0;
    for (std::size_t idx = 0; idx < pts.size(); ++idx) {
        std::size_t k = pts[idx];
        double x = u.node(k)[0];
        if (hull.size() == 1) {
            env.gamma[k] = v[k];
            continue;
        }
        while (seg + 2 < hull.size() && u.node(hull[seg + 1])[0] <= x)
            ++seg;
        double xa = u.node(hull[seg])[0];
        double s = slope(seg);
        env.gamma[k] = k == hull[seg] ? v[k] : (k == hull[seg + 1] ? v[k] : v[hull[seg]] + s * (x - xa));
        double g = s;
        if (k == hull[seg] && seg > 0)
            g = 0.5 * (slope(seg - 1) + s);
        else if (k == hull[seg + 1] && seg + 2 < hull.size())
            g = 0.5 * (s + slope(seg + 1));
        env.supergrad[k] = {g, 0.0};
    }
}

void envelope_2d(EnvelopeResult& env, const std::vector<double>& v, double vmax)
{
    const BoundedFunction& u = env.u;
    const int N = u.nodes_per_axis();
    std::vector<std::size_t> cand;
    for (std::size_t k = 0; k < u.node_count(); ++k) {
        if (!env.in_b2[k])
            continue;
        auto [i, j] = u.multi_index(k);
        bool boundary = false;
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int q = 0; q < 4; ++q) {
            int a = i + di[q], b = j + dj[q];
            if (a < 0 || b < 0 || a >= N || b >= N || !env.in_b2[u.index(a, b)])
                boundary = true;
        }
        if (boundary || v[k] > 0.0)
            cand.push_back(k);
    }
    env.candidates = cand;
    if (vmax <= 0.0)
        return;
    const double tol = 1e-13 * (1.0 + vmax);
    std::vector<std::size_t> nodes;
    for (std::size_t k = 0; k < u.node_count(); ++k)
        if (env.in_b2[k])
            nodes.push_back(k);
    parallel_for(nodes.size(), [&](std::size_t q) {
        std::size_t k = nodes[q];
        auto [i, j] = u.multi_index(k);
        // Columns: candidates, then the node and two neighbours inside B_2 for the start basis.
        std::vector<Vec> P;
        std::vector<double> V;
        P.reserve(cand.size() + 3);
        for (std::size_t c : cand) {
            P.push_back(u.node(c));
            V.push_back(v[c]);
        }
        int si = i + 1 < N && env.in_b2[u.index(i + 1, j)] ? 1 : -1;
        int sj = j + 1 < N && env.in_b2[u.index(i, j + 1)] ? 1 : -1;
        std::size_t ext[3] = {k, u.index(i + si, j), u.index(i, j + sj)};
        int base = static_cast<int>(P.size());
        for (std::size_t e : ext) {
            P.push_back(u.node(e));
            V.push_back(v[e]);
        }
        HullLp r = hull_lp(P, V, u.node(k), {base, base + 1, base + 2}, tol);
        env.gamma[k] = std::max(r.value, v[k]);
        env.supergrad[k] = r.grad;
    });
}

// Sutherland-Hodgman clip of a convex polygon by {z : a . z >= c}.
std::vector<Vec> clip(const std::vector<Vec>& poly, const Vec& a, double c)
{
    std::vector<Vec> out;
    const std::size_t m = poly.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Vec& p = poly[i];
        const Vec& q = poly[(i + 1) % m];
        double fp = a[0] * p[0] + a[1] * p[1] - c;
        double fq = a[0] * q[0] + a[1] * q[1] - c;
        if (fp >= 0.0)
            out.push_back(p);
        if ((fp >= 0.0) != (fq >= 0.0)) {
            double t = fp / (fp - fq);
            out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
        }
    }
    return out;
}

}  // namespace

EnvelopeResult concave_envelope(const BoundedFunction& u, double tol_contact)
{
    const int n = u.dim();
    if (u.half_width() < 2.0)
        throw InvalidArgument("the grid box must contain B_2");
    EnvelopeResult env;
    env.u = u;
    const std::size_t M = u.node_count();
    env.gamma.assign(M, 0.0);
    env.supergrad.assign(M, Vec{0.0, 0.0});
    env.in_b2.assign(M, 0);
    env.contact.assign(M, 0);
    std::vector<double> v(M, 0.0);
    double vmax = 0.0;
    for (std::size_t k = 0; k < M; ++k) {
        Vec x = u.node(k);
        double r = norm(x, n);
        double val = u.values()[k];
        if (r > 0.5 + 1e-12 && val > 0.0)
            throw InvalidArgument("u must be nonpositive outside B_{1/2}");
        if (r <= 2.0 + 1e-12) {
            env.in_b2[k] = 1;
            v[k] = std::max(val, 0.0);
            vmax = std::max(vmax, v[k]);
        }
    }
    env.tol_contact = tol_contact >= 0.0 ? tol_contact : 1e-9 * (1.0 + vmax);
    if (n == 1)
        envelope_1d(env, v);
    else
        envelope_2d(env, v, vmax);
    if (vmax <= 0.0)
        return env;
    for (std::size_t k = 0; k < M; ++k) {
        if (norm(u.node(k), n) < 1.0 && env.gamma[k] - u.values()[k] <= env.tol_contact)
            env.contact[k] = 1;
    }
    return env;
}

std::vector<Vec> superdifferential(const EnvelopeResult& env, std::size_t node)
{
    const BoundedFunction& u = env.u;
    if (!env.in_b2.at(node))
        throw InvalidArgument("node outside B_2");
    if (u.dim() == 1) {
        const auto& H = env.hull;
        double g = env.supergrad[node][0];
        auto it = std::find(H.begin(), H.end(), node);
        if (it == H.end() || H.size() < 2)
            return {{g, 0.0}, {g, 0.0}};
        std::size_t i = static_cast<std::size_t>(it - H.begin());
        auto slope = [&](std::size_t a, std::size_t b) {
            return (env.gamma[b] - env.gamma[a]) / (u.node(b)[0] - u.node(a)[0]);
        };
        // At the ends of B_2 the hull continues with any slope keeping it above zero;
        // only interior vertices carry a bounded interval.
        if (i == 0 || i + 1 == H.size())
            return {{g, 0.0}, {g, 0.0}};
        double right = slope(H[i], H[i + 1]), left = slope(H[i - 1], H[i]);
        return {{right, 0.0}, {left, 0.0}};
    }
    // {b : gamma(x0) + b.(x_j - x0) >= v_j for all candidates}.
    Vec x0 = u.node(node);
    double g0 = env.gamma[node];
    double span = 0.0;
    for (std::size_t c : env.candidates)
        span = std::max(span, std::abs(std::max(u.values()[c], 0.0) - g0));
    double B = 2.0 * (span + 1.0) / u.spacing();
    std::vector<Vec> poly{{-B, -B}, {B, -B}, {B, B}, {-B, B}};
    for (std::size_t c : env.candidates) {
        if (c == node)
            continue;
        Vec d = sub(u.node(c), x0);
        double vc = std::max(u.values()[c], 0.0);
        poly = clip(poly, d, vc - g0);
        if (poly.empty())
            break;
    }
    return poly;
}

double g_eta(const Vec& z, double eta, int n)
{
    if (!(eta > 0.0))
        throw InvalidArgument("eta must be positive");
    if (n == 1)
        return 1.0 / (std::abs(z[0]) + eta);
    return 1.0 / (dot(z, z, 2) + eta * eta);
}

double ma_measure(const EnvelopeResult& env, std::size_t node, double eta)
{
    if (!(eta > 0.0))
        throw InvalidArgument("eta must be positive");
    auto poly = superdifferential(env, node);
    if (env.u.dim() == 1) {
        auto G = [eta](double z) { return (z < 0 ? -1.0 : 1.0) * std::log1p(std::abs(z) / eta); };
        return std::max(0.0, G(poly[1][0]) - G(poly[0][0]));
    }
    if (poly.size() < 3)
        return 0.0;
    // Signed sum over the fan triangles (0, p_i, p_{i+1}); on each, integrate in
    // polar coordinates with the radial part in closed form.
    const GaussRule& gl = gauss_legendre(16);
    double total = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec& a = poly[i];
        const Vec& b = poly[(i + 1) % poly.size()];
        double ta = std::atan2(a[1], a[0]);
        double dt = std::atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1]);
        if (dt == 0.0)
            continue;
        Vec e = sub(b, a);
        double acc = 0.0;
        for (std::size_t q = 0; q < gl.x.size(); ++q) {
            double th = ta + 0.5 * dt * (1.0 + gl.x[q]);
            Vec w{std::cos(th), std::sin(th)};
            // a + s e = rho w
            double den = w[0] * e[1] - w[1] * e[0];
            if (den == 0.0)
                continue;
            double rho = (a[0] * e[1] - a[1] * e[0]) / den;
            acc += gl.w[q] * 0.5 * std::log1p(rho * rho / (eta * eta));
        }
        total += 0.5 * dt * acc;
    }
    return std::abs(total);
}

RingFamily ring_family(int n, const Vec& x, double sigma, int k_max)
{
    check_dim(n);
    if (!(sigma > 1.0 && sigma < 2.0))
        throw InvalidArgument("sigma must lie in (1, 2)");
    RingFamily R;
    R.center = x;
    R.rho0 = 1.0 / (16.0 * std::sqrt(static_cast<double>(n)));
    double r0 = R.rho0 * std::pow(2.0, -1.0 / (2.0 - sigma));
    for (int k = 0; k <= k_max + 1; ++k)
        R.radii.push_back(std::ldexp(r0, -k));
    return R;
}

RingCheck ring_measure_check(const EnvelopeResult& env, std::size_t node, double M, double f_val, double sigma,
                             double C, int k_max)
{
    const BoundedFunction& u = env.u;
    const int n = u.dim();
    if (!env.contact.at(node))
        throw InvalidArgument("ring check needs a contact point");
    if (!(M > 0.0))
        throw InvalidArgument("M must be positive");
    Vec x = u.node(node);
    Vec g = env.supergrad[node];
    RingFamily R = ring_family(n, x, sigma, k_max);
    const double h = u.spacing();
    double scale_f = f_val + norm(g, n);
    RingCheck res;
    for (int k = 0; k <= k_max; ++k) {
        double ro = R.radii[k], ri = R.radii[k + 1];
        int m = static_cast<int>(std::floor(ro / h));
        int total = 0, hit = 0;
        for (int i = -m; i <= m; ++i)
            for (int j = (n == 2 ? -m : 0); j <= (n == 2 ? m : 0); ++j) {
                Vec y{i * h, j * h};
                double r = norm(y, n);
                if (r < ri || r >= ro)
                    continue;
                ++total;
                if (extremal_mu(u, x, y, g).inf_minus >= M * ro * ro)
                    ++hit;
            }
        res.counts.push_back(total);
        if (total < 8) {
            ++res.skipped;
            res.fractions.push_back(std::nan(""));
            continue;
        }
        double frac = static_cast<double>(hit) / total;
        res.fractions.push_back(frac);
        double ratio = scale_f > 0.0 ? frac * M / scale_f : (frac > 0.0 ? kInf : 0.0);
        res.best_ratio = std::min(res.best_ratio, ratio);
        if (res.k_found < 0 && frac <= C * scale_f / M)
            res.k_found = k;
    }
    return res;
}

namespace {

struct CubeContext {
    const EnvelopeResult& env;
    const ScalarField& f;
    int n;
    double h;
    double C;
    double eta;
    double gamma;
    std::vector<std::size_t> contact;
};

bool in_closed(const Vec& x, const Vec& lo, double side, int n)
{
    const double tiny = 1e-12 * (1.0 + side);
    for (int k = 0; k < n; ++k)
        if (x[k] < lo[k] - tiny || x[k] > lo[k] + side + tiny)
            return false;
    return true;
}

bool in_half_open(const Vec& x, const Vec& lo, double side, int n)
{
    const double tiny = 1e-12 * (1.0 + side);
    for (int k = 0; k < n; ++k)
        if (x[k] < lo[k] - tiny || x[k] >= lo[k] + side - tiny)
            return false;
    return true;
}

// Grid nodes inside the closed cube with the given lower corner and side.
std::vector<std::size_t> nodes_in(const BoundedFunction& u, const Vec& lo, double side)
{
    const int n = u.dim();
    const double h = u.spacing(), L = u.half_width();
    const int N = u.nodes_per_axis();
    int a[2], b[2];
    for (int k = 0; k < 2; ++k) {
        if (k >= n) {
            a[k] = b[k] = 0;
            continue;
        }
        a[k] = std::max(0, static_cast<int>(std::ceil((lo[k] + L) / h - 1e-9)));
        b[k] = std::min(N - 1, static_cast<int>(std::floor((lo[k] + side + L) / h + 1e-9)));
    }
    std::vector<std::size_t> out;
    for (int j = a[1]; j <= b[1]; ++j)
        for (int i = a[0]; i <= b[0]; ++i)
            out.push_back(n == 1 ? u.index(i) : u.index(i, j));
    return out;
}

void evaluate_cube(const CubeContext& cx, Cube& q)
{
    const BoundedFunction& u = cx.env.u;
    const int n = cx.n;
    Vec lo{q.center[0] - 0.5 * q.side, n == 2 ? q.center[1] - 0.5 * q.side : 0.0};
    double vol = std::pow(q.side, n);
    // Samples of f and |grad Gamma| over the closed cube.
    std::vector<Vec> samples{q.center};
    for (int c = 0; c < (1 << n); ++c)
        samples.push_back({lo[0] + ((c & 1) ? q.side : 0.0), n == 2 ? lo[1] + ((c & 2) ? q.side : 0.0) : 0.0});
    double fsup = 0.0, gsup = 0.0;
    for (std::size_t k : nodes_in(u, lo, q.side)) {
        samples.push_back(u.node(k));
        if (cx.env.in_b2[k])
            gsup = std::max(gsup, norm(cx.env.supergrad[k], n));
    }
    for (const Vec& s : samples)
        fsup = std::max(fsup, std::abs(cx.f(s)));

    // (e)
    double lhs = 0.0;
    for (std::size_t k : cx.contact)
        if (in_half_open(u.node(k), lo, q.side, n))
            lhs += ma_measure(cx.env, k, cx.eta);
    double rhs = cx.C * (1.0 + std::pow(fsup / cx.eta, n)) * vol;
    q.lhs_e = lhs;
    q.rhs_e = rhs;
    q.e = lhs <= rhs;

    // (f) on the cube scaled by 4 sqrt(n) about its center.
    double big = 4.0 * std::sqrt(static_cast<double>(n)) * q.side;
    Vec blo{q.center[0] - 0.5 * big, n == 2 ? q.center[1] - 0.5 * big : 0.0};
    double thr = cx.C * (fsup + gsup) * q.diameter * q.diameter;
    int count = 0;
    for (std::size_t k : nodes_in(u, blo, big)) {
        double G = cx.env.in_b2[k] ? cx.env.gamma[k] : 0.0;
        if (u.values()[k] >= G - thr)
            ++count;
    }
    q.measure_f = count * std::pow(cx.h, n);
    q.f = q.measure_f > 0.0 && q.measure_f >= cx.gamma * vol;
}

}  // namespace

CubeCover cube_decomposition(const EnvelopeResult& env, const ScalarField& f, double sigma, const CubeConfig& cfg)
{
    const BoundedFunction& u = env.u;
    const int n = u.dim();
    if (!(sigma > 1.0 && sigma < 2.0))
        throw InvalidArgument("sigma must lie in (1, 2)");
    if (!(cfg.C > 0.0) || cfg.depth_cap < 0)
        throw InvalidArgument("invalid cube configuration");
    CubeCover cover;
    double rho0 = 1.0 / (16.0 * std::sqrt(static_cast<double>(n)));
    cover.d0 = rho0 * std::pow(2.0, -1.0 / (2.0 - sigma));
    cover.C = cfg.C;

    std::vector<std::size_t> contact;
    double fn = 0.0;
    for (std::size_t k = 0; k < u.node_count(); ++k)
        if (env.contact[k]) {
            contact.push_back(k);
            fn += std::pow(std::abs(f(u.node(k))), n) * std::pow(u.spacing(), n);
        }
    cover.eta = cfg.eta > 0.0 ? cfg.eta : std::max(std::pow(fn, 1.0 / n), 1e-8);
    if (contact.empty())
        return cover;

    CubeContext cx{env, f, n, u.spacing(), cfg.C, cover.eta, cfg.gamma, contact};
    const double s0 = cover.d0 / std::sqrt(static_cast<double>(n));
    const long m = static_cast<long>(std::ceil(1.0 / s0));

    auto touches = [&](const Vec& lo, double side) {
        for (std::size_t k : contact)
            if (in_closed(u.node(k), lo, side, n))
                return true;
        return false;
    };

    std::function<void(long, long, int)> visit = [&](long i, long j, int depth) {
        double side = std::ldexp(s0, -depth);
        Vec lo{i * side, n == 2 ? j * side : 0.0};
        if (!touches(lo, side))
            return;
        Cube q;
        q.side = side;
        q.diameter = side * std::sqrt(static_cast<double>(n));
        q.depth = depth;
        q.index = {i, j};
        q.center = {lo[0] + 0.5 * side, n == 2 ? lo[1] + 0.5 * side : 0.0};
        evaluate_cube(cx, q);
        if ((q.e && q.f) || depth >= cfg.depth_cap) {
            if (!(q.e && q.f))
                cover.max_depth_hit = true;
            cover.cubes.push_back(q);
            return;
        }
        for (int c = 0; c < (1 << n); ++c)
            visit(2 * i + (c & 1), n == 2 ? 2 * j + ((c >> 1) & 1) : 0, depth + 1);
    };
    for (long j = (n == 2 ? -m : 0); j <= (n == 2 ? m - 1 : 0); ++j)
        for (long i = -m; i <= m - 1; ++i)
            visit(i, j, 0);

    // (a) pairwise disjoint, compared on the finest dyadic level.
    auto span = [&](const Cube& q, int axis) {
        long scale_up = 1L << (cfg.depth_cap - q.depth);
        long a = q.index[axis] * scale_up;
        return std::pair<long, long>{a, a + scale_up};
    };
    for (std::size_t p = 0; p < cover.cubes.size() && cover.a; ++p)
        for (std::size_t q = p + 1; q < cover.cubes.size(); ++q) {
            bool overlap = true;
            for (int k = 0; k < n; ++k) {
                auto [a0, a1] = span(cover.cubes[p], k);
                auto [b0, b1] = span(cover.cubes[q], k);
                if (a1 <= b0 || b1 <= a0)
                    overlap = false;
            }
            if (overlap) {
                cover.a = false;
                break;
            }
        }
    // (b), (c), (d)
    for (std::size_t k : contact) {
        bool inside = false;
        for (const Cube& q : cover.cubes) {
            Vec lo{q.center[0] - 0.5 * q.side, q.center[1] - 0.5 * q.side};
            if (in_closed(u.node(k), lo, q.side, n)) {
                inside = true;
                break;
            }
        }
        cover.b = cover.b && inside;
    }
    for (const Cube& q : cover.cubes) {
        Vec lo{q.center[0] - 0.5 * q.side, q.center[1] - 0.5 * q.side};
        cover.c = cover.c && touches(lo, q.side);
        cover.d = cover.d && q.diameter <= cover.d0 * (1.0 + 1e-12);
        cover.e_all = cover.e_all && q.e;
        cover.f_all = cover.f_all && q.f;
        cover.gamma_measured = std::min(cover.gamma_measured, q.measure_f / std::pow(q.side, n));
    }
    return cover;
}

CubeCover calibrate_cover(const EnvelopeResult& env, const ScalarField& f, double sigma, CubeConfig cfg, int k_max)
{
    CubeCover last;
    for (int k = 0; k <= k_max; ++k) {
        cfg.C = std::pow(2.0, k / 4.0);
        last = cube_decomposition(env, f, sigma, cfg);
        if (!last.max_depth_hit)
            return last;
    }
    return last;
}

AlexandroffResult alexandroff_aggregate(const CubeCover& cover, const EnvelopeResult& env, const ScalarField& f,
                                        double eta)
{
    const BoundedFunction& u = env.u;
    const int n = u.dim();
    AlexandroffResult r;
    double fn = 0.0;
    for (std::size_t k = 0; k < u.node_count(); ++k) {
        if (norm(u.node(k), n) < 1.0)
            r.sup_u_plus = std::max(r.sup_u_plus, u.values()[k]);
        if (env.contact[k])
            fn += std::pow(std::abs(f(u.node(k))), n) * std::pow(u.spacing(), n);
    }
    r.f_norm = std::pow(fn, 1.0 / n);
    r.eta = eta > 0.0 ? eta : std::max(r.f_norm, 1e-8);
    for (std::size_t k = 0; k < u.node_count(); ++k)
        if (env.contact[k])
            r.lhs += ma_measure(env, k, r.eta);
    for (const Cube& q : cover.cubes) {
        Vec lo{q.center[0] - 0.5 * q.side, n == 2 ? q.center[1] - 0.5 * q.side : 0.0};
        double fsup = std::abs(f(q.center));
        for (int c = 0; c < (1 << n); ++c)
            fsup = std::max(fsup, std::abs(f({lo[0] + ((c & 1) ? q.side : 0.0),
                                               n == 2 ? lo[1] + ((c & 2) ? q.side : 0.0) : 0.0})));
        for (std::size_t k : nodes_in(u, lo, q.side))
            fsup = std::max(fsup, std::abs(f(u.node(k))));
        r.rhs += (1.0 + std::pow(fsup / r.eta, n)) * std::pow(q.side, n);
    }
    r.implied_C = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
    r.abp_ratio = r.f_norm > 0.0 ? r.sup_u_plus / r.f_norm : kInf;
    return r;
}

CzOutcome dyadic_cz_check(const std::vector<char>& A, const std::vector<char>& B, int n, int level, double delta)
{
    check_dim(n);
    if (level < 0 || level > 12)
        throw InvalidArgument("dyadic level out of range");
    const long side = 1L << level;
    const std::size_t cells = n == 1 ? side : side * side;
    if (A.size() != cells || B.size() != cells)
        throw InvalidArgument("mask size does not match the dyadic level");
    for (std::size_t k = 0; k < cells; ++k)
        if (A[k] && !B[k])
            throw InvalidArgument("A must be a subset of B");

    // counts[l] holds |A ∩ Q| and |B ∩ Q| in finest cells for every cube at level l.
    std::vector<std::vector<long>> ca(level + 1), cb(level + 1);
    ca[level].assign(A.begin(), A.end());
    cb[level].assign(B.begin(), B.end());
    for (int l = level - 1; l >= 0; --l) {
        long s = 1L << l;
        std::size_t m = n == 1 ? s : s * s;
        ca[l].assign(m, 0);
        cb[l].assign(m, 0);
        for (long j = 0; j < (n == 2 ? s : 1); ++j)
            for (long i = 0; i < s; ++i)
                for (int c = 0; c < (1 << n); ++c) {
                    long ci = 2 * i + (c & 1), cj = n == 2 ? 2 * j + ((c >> 1) & 1) : 0;
                    std::size_t child = static_cast<std::size_t>(cj * (2 * s) + ci);
                    ca[l][j * s + i] += ca[l + 1][child];
                    cb[l][j * s + i] += cb[l + 1][child];
                }
    }
    const double total = static_cast<double>(cells);
    double mA = ca[0][0] / total, mB = cb[0][0] / total;
    if (mA > delta)
        return CzOutcome::hypotheses_unmet;
    for (int l = 1; l <= level; ++l) {
        long s = 1L << l;
        double finest_per_cube = total / std::pow(static_cast<double>(s), n);
        for (long j = 0; j < (n == 2 ? s : 1); ++j)
            for (long i = 0; i < s; ++i) {
                long a = ca[l][j * s + i];
                if (a <= delta * finest_per_cube)
                    continue;
                long ps = s / 2;
                std::size_t parent = static_cast<std::size_t>((n == 2 ? j / 2 : 0) * ps + i / 2);
                if (cb[l - 1][parent] < finest_per_cube * (1 << n) - 0.5)
                    return CzOutcome::hypotheses_unmet;
            }
    }
    return mA <= delta * mB + 1e-15 ? CzOutcome::holds : CzOutcome::violated;
}

}  // namespace nonloc
