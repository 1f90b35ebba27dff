#include "nonloc/funcspace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nonloc {

double Exterior::operator()(const Vec& x, int n) const
{
    switch (kind) {
    case ExteriorKind::constant:
        return value;
    case ExteriorKind::power_decay:
        return value * std::pow(norm(x, n), -p);
    case ExteriorKind::indicator_slab:
        return (x[axis] >= lo && x[axis] <= hi) ? value : 0.0;
    case ExteriorKind::callable:
        return fn(x);
    }
    return 0.0;
}

double Exterior::sup_outside(double L, int) const
{
    switch (kind) {
    case ExteriorKind::constant:
    case ExteriorKind::indicator_slab:
        return std::abs(value);
    case ExteriorKind::power_decay:
        return std::abs(value) * std::pow(L, -p);
    case ExteriorKind::callable:
        return bound;
    }
    return 0.0;
}

namespace {

int grid_count(double L, double h)
{
    if (!(L > 0.0 && h > 0.0))
        throw InvalidArgument("box half-width and spacing must be positive");
    double cells = 2.0 * L / h;
    long k = std::lround(cells);
    if (k < 2 || std::abs(cells - static_cast<double>(k)) > 1e-9 * cells)
        throw InvalidArgument("spacing must divide the box width into at least two cells");
    return static_cast<int>(k) + 1;
}

}  // namespace

BoundedFunction BoundedFunction::from_grid(int n, double L, double h, std::vector<double> values, Exterior ext)
{
    check_dim(n);
    int N = grid_count(L, h);
    std::size_t expect = n == 1 ? static_cast<std::size_t>(N) : static_cast<std::size_t>(N) * N;
    if (values.size() != expect)
        throw InvalidArgument("grid value count does not match the box and spacing");
    auto st = std::make_shared<State>();
    st->n = n;
    st->L = L;
    st->h = h;
    st->N = N;
    st->values = std::move(values);
    st->ext = std::move(ext);
    double sup = st->ext.sup_outside(L, n);
    for (double v : st->values) {
        if (!std::isfinite(v))
            throw InvalidArgument("grid values must be finite");
        sup = std::max(sup, std::abs(v));
    }
    st->sup = sup;
    BoundedFunction u;
    u.s_ = std::move(st);
    return u;
}

BoundedFunction BoundedFunction::from_closed_form(int n, double L, double h, ScalarField f, Exterior ext,
                                                  double sup_bound)
{
    check_dim(n);
    int N = grid_count(L, h);
    std::size_t count = n == 1 ? static_cast<std::size_t>(N) : static_cast<std::size_t>(N) * N;
    std::vector<double> vals(count);
    for (std::size_t k = 0; k < count; ++k) {
        int i = static_cast<int>(k % N), j = static_cast<int>(k / N);
        Vec x{-L + i * h, n == 2 ? -L + j * h : 0.0};
        vals[k] = f(x);
    }
    BoundedFunction u = from_grid(n, L, h, std::move(vals), std::move(ext));
    auto st = std::make_shared<State>(*u.s_);
    st->interior = std::move(f);
    st->sup = std::max(st->sup, sup_bound);
    u.s_ = std::move(st);
    return u;
}

BoundedFunction BoundedFunction::from_csv(const std::string& path, int n, double L, double h, Exterior ext)
{
    check_dim(n);
    std::ifstream in(path);
    if (!in)
        throw InvalidArgument("cannot open grid file " + path);
    int N = grid_count(L, h);
    std::size_t count = n == 1 ? static_cast<std::size_t>(N) : static_cast<std::size_t>(N) * N;
    std::vector<double> vals(count, 0.0);
    std::vector<char> seen(count, 0);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double c[3];
        int got = 0;
        while (got < n + 1 && ss >> c[got])
            ++got;
        if (got != n + 1)
            continue;  // header or malformed row
        long i = std::lround((c[0] + L) / h);
        long j = n == 2 ? std::lround((c[1] + L) / h) : 0;
        if (i < 0 || i >= N || j < 0 || j >= N)
            throw InvalidArgument("grid file row outside the box: " + line);
        std::size_t k = static_cast<std::size_t>(j) * N + static_cast<std::size_t>(i);
        vals[k] = c[n];
        seen[k] = 1;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
        throw InvalidArgument("grid file does not cover every node");
    return from_grid(n, L, h, std::move(vals), std::move(ext));
}

int BoundedFunction::dim() const { return s_->n; }
double BoundedFunction::half_width() const { return s_->L; }
double BoundedFunction::spacing() const { return s_->h; }
int BoundedFunction::nodes_per_axis() const { return s_->N; }
std::size_t BoundedFunction::node_count() const { return s_->values.size(); }
bool BoundedFunction::closed_form() const { return static_cast<bool>(s_->interior); }
const std::vector<double>& BoundedFunction::values() const { return s_->values; }
double BoundedFunction::sup_bound() const { return s_->sup; }
const Exterior& BoundedFunction::exterior() const { return s_->ext; }

Vec BoundedFunction::node(std::size_t idx) const
{
    auto [i, j] = multi_index(idx);
    return {-s_->L + i * s_->h, s_->n == 2 ? -s_->L + j * s_->h : 0.0};
}

std::size_t BoundedFunction::index(int i, int j) const
{
    return static_cast<std::size_t>(j) * s_->N + static_cast<std::size_t>(i);
}

std::pair<int, int> BoundedFunction::multi_index(std::size_t idx) const
{
    return {static_cast<int>(idx % s_->N), static_cast<int>(idx / s_->N)};
}

bool BoundedFunction::in_box(const Vec& x) const
{
    double lim = s_->L * (1.0 + 1e-12);
    return std::abs(x[0]) <= lim && (s_->n == 1 || std::abs(x[1]) <= lim);
}

double BoundedFunction::interpolate(const Vec& x) const
{
    const State& s = *s_;
    auto locate = [&](double c, int& i, double& t) {
        double q = (c + s.L) / s.h;
        i = std::clamp(static_cast<int>(std::floor(q)), 0, s.N - 2);
        t = std::clamp(q - i, 0.0, 1.0);
    };
    int i, j;
    double tx, ty;
    locate(x[0], i, tx);
    if (s.n == 1) {
        if (tx == 0.0)
            return s.values[i];
        return (1.0 - tx) * s.values[i] + tx * s.values[i + 1];
    }
    locate(x[1], j, ty);
    const double* v = s.values.data();
    std::size_t k = static_cast<std::size_t>(j) * s.N + i;
    double a = (1.0 - tx) * v[k] + tx * v[k + 1];
    double b = (1.0 - tx) * v[k + s.N] + tx * v[k + s.N + 1];
    if (ty == 0.0)
        return a;
    return (1.0 - ty) * a + ty * b;
}

double BoundedFunction::evaluate(const Vec& x) const
{
    const State& s = *s_;
    if (!in_box(x))
        return s.ext(x, s.n);
    for (auto it = s.patches.rbegin(); it != s.patches.rend(); ++it)
        if (norm(sub(x, it->center), s.n) <= it->radius)
            return it->phi(x);
    if (s.interior)
        return s.interior(x);
    return interpolate(x);
}

BoundedFunction BoundedFunction::with_values(std::vector<double> values) const
{
    return from_grid(s_->n, s_->L, s_->h, std::move(values), s_->ext);
}

BoundedFunction surgery(const BoundedFunction& u, const ScalarField& phi, const Vec& center, double radius)
{
    const int n = u.dim();
    const double L = u.half_width(), h = u.spacing();
    if (!(radius > 0.0))
        throw InvalidArgument("surgery radius must be positive");
    for (int k = 0; k < n; ++k)
        if (std::abs(center[k]) + radius > L)
            throw InvalidArgument("surgery ball is not contained in the box");
    double uc = u.evaluate(center);
    if (std::abs(phi(center) - uc) > 1e-9 * (1.0 + std::abs(uc)))
        throw InvalidArgument("surgery needs phi(center) == u(center)");

    auto st = std::make_shared<BoundedFunction::State>(*u.s_);
    st->patches.push_back({center, radius, phi});
    double sup = st->sup;
    for (std::size_t k = 0; k < st->values.size(); ++k) {
        Vec x = u.node(k);
        if (norm(sub(x, center), n) <= radius) {
            st->values[k] = phi(x);
            sup = std::max(sup, std::abs(st->values[k]));
        }
    }
    double s = h / 4.0;
    int m = static_cast<int>(std::ceil(radius / s));
    for (int i = -m; i <= m; ++i)
        for (int j = (n == 2 ? -m : 0); j <= (n == 2 ? m : 0); ++j) {
            Vec d{i * s, j * s};
            if (norm(d, n) <= radius)
                sup = std::max(sup, std::abs(phi(add(center, d))));
        }
    st->sup = sup;
    BoundedFunction v;
    v.s_ = std::move(st);
    return v;
}

Vec gradient(const BoundedFunction& u, const Vec& x)
{
    const int n = u.dim();
    const double h = u.spacing(), L = u.half_width();
    Vec g{0.0, 0.0};
    for (int k = 0; k < n; ++k) {
        if (std::abs(x[k]) + h > L * (1.0 + 1e-12))
            throw InvalidArgument("gradient needs one node of margin inside the box");
        Vec e{0.0, 0.0};
        e[k] = h;
        g[k] = (u.evaluate(add(x, e)) - u.evaluate(sub(x, e))) / (2.0 * h);
    }
    return g;
}

namespace {

// min over v in [-B, B] of max_i (a_i + b_i v).
std::pair<double, double> min_max_lines(const std::vector<double>& a, const std::vector<double>& b, double B)
{
    double V = -kInf;
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (b[i] > 0.0)
            pos = true;
        else if (b[i] < 0.0)
            neg = true;
        else
            V = std::max(V, a[i]);
    }
    auto F = [&](double v) {
        double m = -kInf;
        for (std::size_t i = 0; i < a.size(); ++i)
            m = std::max(m, a[i] + b[i] * v);
        return m;
    };
    if (!pos && !neg)
        return {V, 0.0};
    if (!pos)
        return {F(B), B};
    if (!neg)
        return {F(-B), -B};
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(b[i] > 0.0))
            continue;
        for (std::size_t j = 0; j < a.size(); ++j) {
            if (!(b[j] < 0.0))
                continue;
            V = std::max(V, (b[i] * a[j] - a[i] * b[j]) / (b[i] - b[j]));
        }
    }
    double lo = -kInf, hi = kInf;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (b[i] > 0.0)
            hi = std::min(hi, (V - a[i]) / b[i]);
        else if (b[i] < 0.0)
            lo = std::max(lo, (V - a[i]) / b[i]);
    }
    double v = lo <= hi ? 0.5 * (lo + hi) : 0.5 * (lo + hi);
    if (v < -B || v > B) {
        v = std::clamp(v, -B, B);
        return {F(v), v};
    }
    return {V, v};
}

}  // namespace

std::pair<double, Vec> min_max_affine(int n, const std::vector<double>& c, const std::vector<Vec>& s, double box)
{
    std::vector<double> a(c.size()), b(c.size());
    if (n == 1) {
        for (std::size_t i = 0; i < c.size(); ++i) {
            a[i] = c[i];
            b[i] = -s[i][0];
        }
        auto [V, v] = min_max_lines(a, b, box);
        return {V, Vec{v, 0.0}};
    }
    auto inner = [&](double v1, double* v2) {
        for (std::size_t i = 0; i < c.size(); ++i) {
            a[i] = c[i] - s[i][0] * v1;
            b[i] = -s[i][1];
        }
        auto [V, w] = min_max_lines(a, b, box);
        if (v2)
            *v2 = w;
        return V;
    };
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = -box, hi = box;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = inner(x1, nullptr), f2 = inner(x2, nullptr);
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + box); ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = inner(x1, nullptr);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = inner(x2, nullptr);
        }
    }
    double v1 = 0.5 * (lo + hi), v2 = 0.0;
    double V = inner(v1, &v2);
    return {V, Vec{v1, v2}};
}

namespace {

struct OpeningFit {
    double M = 0.0;
    Vec v{0.0, 0.0};
};

OpeningFit fit_opening(int n, const std::vector<Vec>& d, const std::vector<double>& c)
{
    std::vector<double> alpha(d.size());
    std::vector<Vec> slope(d.size());
    double M0 = 0.0, cmax = 0.0, dmin = kInf;
    for (std::size_t i = 0; i < d.size(); ++i) {
        double r2 = dot(d[i], d[i], n);
        alpha[i] = 2.0 * c[i] / r2;
        slope[i] = scale(d[i], 2.0 / r2);
        M0 = std::max(M0, std::abs(alpha[i]));
        cmax = std::max(cmax, std::abs(c[i]));
        dmin = std::min(dmin, std::sqrt(r2));
    }
    double box = 2.0 * (M0 * dmin * dmin / 2.0 + cmax) / dmin + 1.0;
    auto [V, v] = min_max_affine(n, alpha, slope, box);
    return {std::max(0.0, V), v};
}

}  // namespace

std::pair<TouchingData, TouchingData> touching_opening(const BoundedFunction& u, const Vec& x, double radius)
{
    const int n = u.dim();
    const double h = u.spacing();
    if (radius < 2.0 * h * (1.0 - 1e-12))
        throw InvalidArgument("touching radius must be at least two grid spacings");
    const double u0 = u.evaluate(x);
    // The coarse fit uses the even sublattice on twice the radius, a scaled copy
    // of the fine stencil: curvature data gives the same opening on both, while a
    // kink doubles from coarse to fine.
    int m = static_cast<int>(std::floor(2.0 * radius / h + 1e-9));
    std::vector<Vec> d, d2;
    std::vector<double> c, c2;
    double cmax = 0.0;
    for (int i = -m; i <= m; ++i)
        for (int j = (n == 2 ? -m : 0); j <= (n == 2 ? m : 0); ++j) {
            if (i == 0 && j == 0)
                continue;
            Vec dk{i * h, j * h};
            double r = norm(dk, n);
            bool in_fine = r <= radius * (1.0 + 1e-12);
            bool in_coarse = i % 2 == 0 && j % 2 == 0 && r <= 2.0 * radius * (1.0 + 1e-12);
            if (!in_fine && !in_coarse)
                continue;
            double ck = u.evaluate(add(x, dk)) - u0;
            if (in_fine) {
                cmax = std::max(cmax, std::abs(ck));
                d.push_back(dk);
                c.push_back(ck);
            }
            if (in_coarse) {
                d2.push_back(dk);
                c2.push_back(ck);
            }
        }
    double tol = 1e-9 * (std::abs(u0) + cmax) / (h * h);

    auto side = [&](double sign) {
        std::vector<double> cs(c.size()), cs2(c2.size());
        for (std::size_t i = 0; i < c.size(); ++i)
            cs[i] = sign * c[i];
        for (std::size_t i = 0; i < c2.size(); ++i)
            cs2[i] = sign * c2[i];
        OpeningFit fine = fit_opening(n, d, cs);
        OpeningFit coarse = fit_opening(n, d2, cs2);
        TouchingData t;
        t.x = x;
        t.side = sign > 0 ? Side::above : Side::below;
        t.grad = scale(fine.v, sign);
        t.opening = fine.M;
        if (fine.M > kOpeningCap || (fine.M > tol && fine.M > 1.5 * coarse.M + tol))
            t.opening = kInf;
        return t;
    };
    return {side(1.0), side(-1.0)};
}

}  // namespace nonloc
